//! Per-iteration inference record and its line-delimited JSON form.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;
use crate::particle::{effective_sample_size, max_weight_particle, StateVector, WeightedParticleSet};

/// A node marginal after a belief update.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    /// Resampled set with uniform weights.
    pub samples: WeightedParticleSet,
    /// The normalized set before resampling; the MLE is read from here.
    pub weighted: WeightedParticleSet,
}

impl Belief {
    /// A belief whose weighted and resampled forms coincide.
    pub fn uniform(particles: Vec<StateVector>) -> Self {
        let samples = WeightedParticleSet::uniform(particles);
        Belief {
            weighted: samples.clone(),
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mle(&self) -> &StateVector {
        max_weight_particle(&self.weighted).expect("beliefs are never empty")
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub beliefs: BTreeMap<NodeId, Belief>,
    pub message_seconds: f64,
    pub belief_seconds: f64,
    /// Messages replaced by exploration samples after their weights collapsed.
    pub fallbacks: usize,
}

impl IterationRecord {
    pub fn mles(&self) -> BTreeMap<NodeId, StateVector> {
        self.beliefs.iter().map(|(&id, b)| (id, b.mle().clone())).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub records: Vec<IterationRecord>,
}

impl Trace {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn mles(&self, iteration: usize) -> Option<BTreeMap<NodeId, StateVector>> {
        self.records.get(iteration).map(IterationRecord::mles)
    }

    pub fn lines(&self) -> impl Iterator<Item = TraceLine> + '_ {
        self.records.iter().flat_map(|rec| {
            rec.beliefs
                .iter()
                .map(move |(&node, belief)| TraceLine::new(rec, node, belief))
        })
    }

    /// One JSON object per `(iteration, node)`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for line in self.lines() {
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub iteration: usize,
    pub node: NodeId,
    pub mle: StateVector,
    pub mle_weight: f64,
    pub belief_size: usize,
    pub belief_mean: Vec<f64>,
    pub belief_std: Vec<f64>,
    pub weighted_ess: f64,
    pub message_seconds: f64,
    pub belief_seconds: f64,
}

impl TraceLine {
    fn new(rec: &IterationRecord, node: NodeId, belief: &Belief) -> Self {
        let samples = belief.samples.particles();
        let dim = samples.first().map_or(0, |p| p.len());
        let n = samples.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for p in samples {
            mean.iter_mut().zip(p.iter()).for_each(|(m, v)| *m += v / n);
        }
        let mut var = vec![0.0; dim];
        for p in samples {
            var.iter_mut()
                .zip(p.iter().zip(&mean))
                .for_each(|(s, (v, m))| *s += (v - m).powi(2) / n);
        }
        let idx = crate::particle::max_weight_index(&belief.weighted).unwrap_or(0);
        TraceLine {
            iteration: rec.iteration,
            node,
            mle: belief.mle().clone(),
            mle_weight: belief.weighted.weights().get(idx).copied().unwrap_or(0.0),
            belief_size: belief.len(),
            belief_mean: mean,
            belief_std: var.into_iter().map(f64::sqrt).collect(),
            weighted_ess: effective_sample_size(&belief.weighted).unwrap_or(0.0),
            message_seconds: rec.message_seconds,
            belief_seconds: rec.belief_seconds,
        }
    }
}
