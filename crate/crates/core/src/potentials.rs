use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::Result;
use crate::graph::NodeId;
use crate::particle::{SeededRng, StateVector};

/// Pointwise model access required by both message-passing schemes.
///
/// Pairwise methods are phrased as conditionals: `given` is the node whose
/// state is fixed and `target` is the node being sampled or scored.
pub trait Potentials: Sync {
    /// Unary potential `phi(X, Y)` of `node` at `state`, in `[0, 1]`.
    fn unary(&self, node: NodeId, state: &StateVector) -> f64;

    /// Draw `X_target ~ psi(X_target | X_given = given_state)`.
    fn pairwise_sample(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        rng: &mut SeededRng,
    ) -> Result<StateVector>;

    /// Density of `X_target = target_state` under
    /// `psi(X_target | X_given = given_state)`.
    fn pairwise_density(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        target_state: &StateVector,
    ) -> Result<f64>;

    /// Exploration sample covering the whole state domain of `node`.
    fn explore(&self, node: NodeId, rng: &mut SeededRng) -> StateVector;

    /// Initial particles for `node` (the iteration-0 belief).
    fn prior(&self, node: NodeId, count: usize, rng: &mut SeededRng) -> Vec<StateVector>;

    /// Small random move of a resampled belief particle, with kernel width
    /// `scale` relative to the model's own noise levels. The default keeps
    /// the particle unchanged.
    fn perturb(&self, node: NodeId, state: &StateVector, scale: f64, rng: &mut SeededRng) -> StateVector {
        let _ = (node, scale, rng);
        state.clone()
    }
}

impl<P: Potentials + ?Sized> Potentials for &P {
    fn unary(&self, node: NodeId, state: &StateVector) -> f64 {
        (**self).unary(node, state)
    }

    fn pairwise_sample(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        rng: &mut SeededRng,
    ) -> Result<StateVector> {
        (**self).pairwise_sample(given, target, given_state, rng)
    }

    fn pairwise_density(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        target_state: &StateVector,
    ) -> Result<f64> {
        (**self).pairwise_density(given, target, given_state, target_state)
    }

    fn explore(&self, node: NodeId, rng: &mut SeededRng) -> StateVector {
        (**self).explore(node, rng)
    }

    fn prior(&self, node: NodeId, count: usize, rng: &mut SeededRng) -> Vec<StateVector> {
        (**self).prior(node, count, rng)
    }

    fn perturb(&self, node: NodeId, state: &StateVector, scale: f64, rng: &mut SeededRng) -> StateVector {
        (**self).perturb(node, state, scale, rng)
    }
}

/// Evaluation counters, shared across threads.
#[derive(Debug, Default)]
pub struct OpCounters {
    pub unary: AtomicU64,
    pub pairwise_sample: AtomicU64,
    pub pairwise_density: AtomicU64,
    pub gibbs_normalizer: AtomicU64,
}

impl OpCounters {
    pub fn get(counter: &AtomicU64) -> u64 {
        counter.load(Ordering::Relaxed)
    }

    pub(crate) fn bump(counter: &AtomicU64, n: u64) {
        counter.fetch_add(n, Ordering::Relaxed);
    }

    pub fn reset(&self) {
        for c in [
            &self.unary,
            &self.pairwise_sample,
            &self.pairwise_density,
            &self.gibbs_normalizer,
        ] {
            c.store(0, Ordering::Relaxed);
        }
    }
}

/// Wraps a potential bundle and counts every evaluation.
pub struct Counting<P> {
    pub inner: P,
    pub counters: OpCounters,
}

impl<P> Counting<P> {
    pub fn new(inner: P) -> Self {
        Counting {
            inner,
            counters: OpCounters::default(),
        }
    }
}

impl<P: Potentials> Potentials for Counting<P> {
    fn unary(&self, node: NodeId, state: &StateVector) -> f64 {
        OpCounters::bump(&self.counters.unary, 1);
        self.inner.unary(node, state)
    }

    fn pairwise_sample(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        rng: &mut SeededRng,
    ) -> Result<StateVector> {
        OpCounters::bump(&self.counters.pairwise_sample, 1);
        self.inner.pairwise_sample(given, target, given_state, rng)
    }

    fn pairwise_density(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        target_state: &StateVector,
    ) -> Result<f64> {
        OpCounters::bump(&self.counters.pairwise_density, 1);
        self.inner.pairwise_density(given, target, given_state, target_state)
    }

    fn explore(&self, node: NodeId, rng: &mut SeededRng) -> StateVector {
        self.inner.explore(node, rng)
    }

    fn prior(&self, node: NodeId, count: usize, rng: &mut SeededRng) -> Vec<StateVector> {
        self.inner.prior(node, count, rng)
    }

    fn perturb(&self, node: NodeId, state: &StateVector, scale: f64, rng: &mut SeededRng) -> StateVector {
        self.inner.perturb(node, state, scale, rng)
    }
}
