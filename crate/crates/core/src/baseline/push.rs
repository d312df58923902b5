//! Push message passing with Gaussian-mixture messages.
//!
//! For `t -> s`, samples of the pre-message `phi_t * prod_{u != s} m_{u->t}`
//! are drawn by Gibbs sampling the mixture product and importance-weighting
//! by `phi_t`, pushed through `psi(X_s | X_t)`, and smoothed into a mixture
//! by kernel density estimation. Producing `M` samples costs
//! `K * D * M^2` pairing normalizers for `D` incoming mixtures of `M`
//! components and `K` sweeps.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::engine::{stream_key, EngineConfig, Phase};
use crate::error::{Error, Result};
use crate::graph::{GraphTopology, NodeId, Slot};
use crate::particle::{normalize_weights, systematic_resample, SeededRng, StateVector, WeightedParticleSet};
use crate::potentials::{OpCounters, Potentials};
use crate::trace::{Belief, IterationRecord, Trace};

use super::gibbs::gibbs_product_sample;
use super::gmm::{kde_fit, mixture_pdf, GaussianMixture};

/// Default Gibbs sweeps per product sample.
pub const DEFAULT_SWEEPS: usize = 50;

/// Inputs to one push update of `t -> s`.
pub struct PushInputs<'a, P: ?Sized> {
    pub slot: Slot,
    /// Messages `u -> t` for every `u` in `N(t) \ s`.
    pub incoming: &'a [&'a GaussianMixture],
    pub potentials: &'a P,
    /// Periodic-coordinate mask of `X_s`.
    pub periodic: &'a [bool],
    pub particles: usize,
    pub sweeps: usize,
    pub counters: Option<&'a OpCounters>,
}

/// Computes `m_{t->s}` as a mixture of `particles` kernels. With no
/// incoming mixtures (a leaf sender) pre-message samples come from the
/// sender's prior instead of a Gibbs product.
pub fn push_message_update<P: Potentials + ?Sized>(
    inputs: &PushInputs<'_, P>,
    rng: &mut SeededRng,
) -> Result<GaussianMixture> {
    let (t, s) = (inputs.slot.from, inputs.slot.to);
    let m = inputs.particles;
    let pre: Vec<StateVector> = if inputs.incoming.is_empty() {
        inputs.potentials.prior(t, m, rng)
    } else {
        (0..m)
            .map(|_| gibbs_product_sample(inputs.incoming, inputs.sweeps, rng, inputs.counters))
            .collect::<Result<_>>()?
    };

    let weights = pre.iter().map(|x| inputs.potentials.unary(t, x)).collect();
    let pre = match normalize_weights(WeightedParticleSet::new(pre, weights)?) {
        Ok(set) => systematic_resample(&set, m, rng)?,
        Err(Error::DegenerateWeights) => (0..m).map(|_| inputs.potentials.explore(t, rng)).collect(),
        Err(e) => return Err(e),
    };

    let pushed = pre
        .iter()
        .map(|x_t| inputs.potentials.pairwise_sample(t, s, x_t, rng))
        .collect::<Result<Vec<_>>>()?;
    kde_fit(&pushed, inputs.periodic)
}

/// Belief of `s` by importance sampling: draw `M` points from each incoming
/// mixture, weight by `phi_s * prod_t m_t / mean_t m_t`, resample.
pub fn mixture_belief<P: Potentials + ?Sized>(
    s: NodeId,
    incoming: &[&GaussianMixture],
    potentials: &P,
    per_message: usize,
    rng: &mut SeededRng,
) -> Result<Belief> {
    let mut particles = Vec::with_capacity(per_message * incoming.len());
    for m in incoming {
        particles.extend((0..per_message).map(|_| m.sample(rng)));
    }
    let mut weights = Vec::with_capacity(particles.len());
    for x in &particles {
        let densities = incoming.iter().map(|m| mixture_pdf(m, x)).collect::<Result<Vec<_>>>()?;
        let proposal = densities.iter().sum::<f64>() / densities.len() as f64;
        let product: f64 = densities.iter().product();
        let w = if proposal > 0.0 {
            potentials.unary(s, x) * product / proposal
        } else {
            0.0
        };
        weights.push(if w.is_finite() { w } else { 0.0 });
    }
    let weighted = normalize_weights(WeightedParticleSet::new(particles, weights)?)?;
    let samples = systematic_resample(&weighted, weighted.len(), rng)?;
    Ok(Belief {
        samples: WeightedParticleSet::uniform(samples),
        weighted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushConfig {
    pub engine: EngineConfig,
    /// Gibbs sweeps per product sample (`K`).
    pub sweeps: usize,
}

impl PushConfig {
    pub fn validate(&self) -> Result<()> {
        self.engine.validate()?;
        if self.sweeps == 0 {
            return Err(Error::InvalidConfig("sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

pub struct PushEngine<'a, P: ?Sized> {
    graph: &'a GraphTopology,
    potentials: &'a P,
    config: PushConfig,
    slots: Vec<Slot>,
    iteration: usize,
    messages: BTreeMap<Slot, GaussianMixture>,
    beliefs: BTreeMap<NodeId, Belief>,
    pub counters: OpCounters,
}

impl<'a, P: Potentials + ?Sized> PushEngine<'a, P> {
    /// Iteration 0: every message is a KDE of `M` prior particles.
    pub fn new(graph: &'a GraphTopology, potentials: &'a P, config: PushConfig) -> Result<Self> {
        config.validate()?;
        let m = config.engine.particles.max(2);
        let slots = graph.slots();
        let mut messages = BTreeMap::new();
        let mut prior_sets: BTreeMap<Slot, Vec<StateVector>> = BTreeMap::new();
        for (k, &slot) in slots.iter().enumerate() {
            let mut rng = SeededRng::stream(config.engine.seed, stream_key(0, Phase::Init, k));
            let particles = potentials.prior(slot.to, m, &mut rng);
            let periodic = graph.kind(slot.to)?.periodic_mask();
            messages.insert(slot, kde_fit(&particles, &periodic)?);
            prior_sets.insert(slot, particles);
        }
        let mut beliefs = BTreeMap::new();
        for s in graph.nodes() {
            let pooled: Vec<StateVector> = graph
                .incoming_slots(s)?
                .iter()
                .flat_map(|slot| prior_sets[slot].iter().cloned())
                .collect();
            beliefs.insert(s, Belief::uniform(pooled));
        }
        Ok(PushEngine {
            graph,
            potentials,
            config,
            slots,
            iteration: 0,
            messages,
            beliefs,
            counters: OpCounters::default(),
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn messages(&self) -> &BTreeMap<Slot, GaussianMixture> {
        &self.messages
    }

    pub fn snapshot(&self) -> IterationRecord {
        IterationRecord {
            iteration: self.iteration,
            beliefs: self.beliefs.clone(),
            message_seconds: 0.0,
            belief_seconds: 0.0,
            fallbacks: 0,
        }
    }

    pub fn message_phase(&self) -> Result<BTreeMap<Slot, GaussianMixture>> {
        let n = self.iteration + 1;
        let work = |(k, &slot): (usize, &Slot)| -> Result<(Slot, GaussianMixture)> {
            let mut rng = SeededRng::stream(self.config.engine.seed, stream_key(n, Phase::Message, k));
            let incoming: Vec<&GaussianMixture> = self
                .graph
                .incoming_slots_excluding(slot.from, slot.to)?
                .iter()
                .map(|u| self.messages.get(u).ok_or(Error::MissingMessage(u.from, u.to)))
                .collect::<Result<_>>()?;
            let periodic = self.graph.kind(slot.to)?.periodic_mask();
            let inputs = PushInputs {
                slot,
                incoming: &incoming,
                potentials: self.potentials,
                periodic: &periodic,
                particles: self.config.engine.particles.max(2),
                sweeps: self.config.sweeps,
                counters: Some(&self.counters),
            };
            Ok((slot, push_message_update(&inputs, &mut rng)?))
        };
        if self.config.engine.parallel {
            self.slots.par_iter().enumerate().map(work).collect()
        } else {
            self.slots.iter().enumerate().map(work).collect()
        }
    }

    pub fn belief_phase(&self, messages: &BTreeMap<Slot, GaussianMixture>) -> Result<BTreeMap<NodeId, Belief>> {
        let n = self.iteration + 1;
        let work = |s: NodeId| -> Result<(NodeId, Belief)> {
            let mut rng = SeededRng::stream(self.config.engine.seed, stream_key(n, Phase::Belief, s.0 as usize));
            let incoming: Vec<&GaussianMixture> = self
                .graph
                .incoming_slots(s)?
                .iter()
                .map(|slot| &messages[slot])
                .collect();
            if incoming.is_empty() {
                return Ok((s, self.beliefs[&s].clone()));
            }
            let belief = match mixture_belief(s, &incoming, self.potentials, self.config.engine.particles, &mut rng) {
                Err(Error::DegenerateWeights) => self.beliefs[&s].clone(),
                other => other?,
            };
            Ok((s, belief))
        };
        let nodes: Vec<NodeId> = self.graph.nodes().collect();
        if self.config.engine.parallel {
            nodes.into_par_iter().map(work).collect()
        } else {
            nodes.into_iter().map(work).collect()
        }
    }

    pub fn step(&mut self) -> Result<IterationRecord> {
        let n = self.iteration + 1;
        let started = Instant::now();
        let messages = self.message_phase().map_err(|e| e.at_iteration(n))?;
        let message_seconds = started.elapsed().as_secs_f64();
        let started = Instant::now();
        let beliefs = self.belief_phase(&messages).map_err(|e| e.at_iteration(n))?;
        let belief_seconds = started.elapsed().as_secs_f64();
        self.messages = messages;
        self.beliefs = beliefs;
        self.iteration = n;
        Ok(IterationRecord {
            iteration: n,
            beliefs: self.beliefs.clone(),
            message_seconds,
            belief_seconds,
            fallbacks: 0,
        })
    }
}

/// Runs `config.engine.iterations` push iterations. Record 0 is the
/// initialization.
pub fn run_push_inference<P: Potentials + ?Sized>(
    graph: &GraphTopology,
    potentials: &P,
    config: PushConfig,
) -> Result<Trace> {
    let mut engine = PushEngine::new(graph, potentials, config)?;
    let mut trace = Trace {
        records: vec![engine.snapshot()],
    };
    for _ in 0..config.engine.iterations {
        trace.records.push(engine.step()?);
    }
    Ok(trace)
}
