//! Pull message passing.
//!
//! A message `t -> s` is a set of `M` weighted samples of `X_s`. The sample
//! locations are pulled from the recipient's previous belief (plus a share
//! of exploration samples); each location is then weighted by how well it
//! agrees with the sender's own evidence:
//!
//! ```text
//! w_ts(i) = phi_t(X_t(i)) * prod_{u in N(t)\s} sum_j w_ut(j) psi(mu_ts(i), mu_ut(j)),
//! X_t(i) ~ psi(X_t | X_s = mu_ts(i))
//! ```
//!
//! Beliefs reweight every incoming message particle by the recipient's
//! unary potential, pool them and resample. All slots of one iteration read
//! only the previous iteration's messages and beliefs, so the schedule is
//! synchronous and each slot may run on its own thread.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphTopology, NodeId, Slot};
use crate::particle::{normalize_weights, systematic_resample, SeededRng, StateVector, WeightedParticleSet};
use crate::potentials::Potentials;
use crate::trace::{Belief, IterationRecord, Trace};

/// Belief roughening is off by default: the plain update keeps a belief
/// concentrated at a fixed point, while a roughened MLE can jump by more
/// than the pairwise position noise between iterations.
pub const DEFAULT_ROUGHENING: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Particles per message (`M`).
    pub particles: usize,
    /// Share of message locations drawn from the exploration sampler.
    pub explore_fraction: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Width of the kernel move applied to resampled belief particles,
    /// relative to the model's noise levels. Zero keeps exact copies.
    pub roughening: f64,
    /// Update slots and beliefs on the rayon pool. Results do not depend on
    /// this flag.
    pub parallel: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            particles: 75,
            explore_fraction: 0.5,
            iterations: 25,
            seed: 0,
            roughening: DEFAULT_ROUGHENING,
            parallel: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::InvalidConfig("particles must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.explore_fraction) {
            return Err(Error::InvalidConfig(format!(
                "explore_fraction {} outside [0, 1]",
                self.explore_fraction
            )));
        }
        if !(self.roughening >= 0.0 && self.roughening.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "roughening {} must be finite and non-negative",
                self.roughening
            )));
        }
        Ok(())
    }
}

/// Messages and beliefs after some iteration.
#[derive(Debug, Clone)]
pub struct InferenceState {
    pub iteration: usize,
    pub messages: BTreeMap<Slot, WeightedParticleSet>,
    pub beliefs: BTreeMap<NodeId, Belief>,
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Phase {
    Init = 0,
    Message = 1,
    Belief = 2,
}

/// Stream key for one unit of work; independent of execution order.
pub(crate) fn stream_key(iteration: usize, phase: Phase, index: usize) -> u64 {
    ((iteration as u64) << 32) | ((phase as u64) << 24) | index as u64
}

/// Number of message locations taken from the previous belief.
pub fn belief_share(count: usize, explore_fraction: f64) -> usize {
    // tolerance keeps e.g. 0.7 * 10 = 7.000000000000001 from rounding up
    let exact = (1.0 - explore_fraction) * count as f64;
    ((exact - 1e-9).ceil().max(0.0) as usize).min(count)
}

/// Draws `count` message locations: `ceil((1 - explore_fraction) * count)`
/// resampled from `belief`, the rest from `explorer`, in shuffled order.
pub fn draw_message_locations(
    belief: &WeightedParticleSet,
    count: usize,
    explore_fraction: f64,
    explorer: Option<&mut dyn FnMut(&mut SeededRng) -> StateVector>,
    rng: &mut SeededRng,
) -> Result<Vec<StateVector>> {
    let mut from_belief = belief_share(count, explore_fraction);
    let mut explorer = explorer;
    if belief.is_empty() {
        if explorer.is_none() {
            return Err(Error::NoProposal);
        }
        from_belief = 0;
    } else if explorer.is_none() {
        from_belief = count;
    }

    let mut out = if from_belief > 0 {
        systematic_resample(belief, from_belief, rng)?
    } else {
        Vec::with_capacity(count)
    };
    if let Some(explore) = explorer.as_mut() {
        for _ in from_belief..count {
            out.push(explore(rng));
        }
    }
    out.shuffle(rng);
    Ok(out)
}

/// Weights `locations` (samples of `X_s`) for the message `t -> s` against
/// the sender's unary potential and its other incoming messages.
pub fn compute_message_weights<P: Potentials + ?Sized>(
    graph: &GraphTopology,
    locations: Vec<StateVector>,
    t: NodeId,
    s: NodeId,
    incoming_prev: &BTreeMap<Slot, WeightedParticleSet>,
    potentials: &P,
    rng: &mut SeededRng,
) -> Result<WeightedParticleSet> {
    let senders = graph.incoming_slots_excluding(t, s)?;
    let incoming = senders
        .iter()
        .map(|slot| incoming_prev.get(slot).ok_or(Error::MissingMessage(slot.from, slot.to)))
        .collect::<Result<Vec<_>>>()?;

    let mut weights = Vec::with_capacity(locations.len());
    for mu in &locations {
        let x_t = potentials.pairwise_sample(s, t, mu, rng)?;
        let w_unary = potentials.unary(t, &x_t);

        let mut w_neigh = 1.0;
        for message in &incoming {
            let mut total = 0.0;
            for (mu_ut, w_ut) in message.iter() {
                total += w_ut * potentials.pairwise_density(t, s, mu_ut, mu)?;
            }
            w_neigh *= total;
        }
        weights.push(w_neigh * w_unary);
    }
    normalize_weights(WeightedParticleSet::new(locations, weights)?)
}

/// Pure exploration samples at uniform weight.
fn exploration_message<P: Potentials + ?Sized>(
    potentials: &P,
    s: NodeId,
    count: usize,
    rng: &mut SeededRng,
) -> WeightedParticleSet {
    WeightedParticleSet::uniform((0..count).map(|_| potentials.explore(s, rng)).collect())
}

/// One pull update of `slot` from `state` (the previous iteration). A
/// message whose weights all vanish is replaced by exploration samples; the
/// returned flag reports that.
pub fn update_message_with_fallback<P: Potentials + ?Sized>(
    graph: &GraphTopology,
    state: &InferenceState,
    slot: Slot,
    config: &EngineConfig,
    potentials: &P,
    rng: &mut SeededRng,
) -> Result<(WeightedParticleSet, bool)> {
    let (t, s) = (slot.from, slot.to);
    let empty = WeightedParticleSet::default();
    let belief = state.beliefs.get(&s).map_or(&empty, |b| &b.samples);
    let mut explore = |rng: &mut SeededRng| potentials.explore(s, rng);
    let locations = draw_message_locations(
        belief,
        config.particles,
        config.explore_fraction,
        Some(&mut explore),
        rng,
    )?;
    match compute_message_weights(graph, locations, t, s, &state.messages, potentials, rng) {
        Ok(message) => Ok((message, false)),
        Err(Error::DegenerateWeights) => Ok((exploration_message(potentials, s, config.particles, rng), true)),
        Err(e) => Err(e),
    }
}

pub fn update_message<P: Potentials + ?Sized>(
    graph: &GraphTopology,
    state: &InferenceState,
    slot: Slot,
    config: &EngineConfig,
    potentials: &P,
    rng: &mut SeededRng,
) -> Result<WeightedParticleSet> {
    update_message_with_fallback(graph, state, slot, config, potentials, rng).map(|(m, _)| m)
}

/// Belief of `s` from its incoming messages: reweight each message by
/// `phi_s`, renormalize per message, pool, normalize, resample.
pub fn update_belief<P: Potentials + ?Sized>(
    s: NodeId,
    incoming: &[&WeightedParticleSet],
    potentials: &P,
    rng: &mut SeededRng,
) -> Result<Belief> {
    combine_messages(s, incoming, potentials, rng, false)
}

fn combine_messages<P: Potentials + ?Sized>(
    s: NodeId,
    incoming: &[&WeightedParticleSet],
    potentials: &P,
    rng: &mut SeededRng,
    skip_degenerate: bool,
) -> Result<Belief> {
    let mut reweighted = Vec::with_capacity(incoming.len());
    for message in incoming {
        let weights = message.iter().map(|(mu, w)| w * potentials.unary(s, mu)).collect();
        let set = WeightedParticleSet::new(message.particles().to_vec(), weights)?;
        match normalize_weights(set) {
            Ok(set) => reweighted.push(set),
            Err(Error::DegenerateWeights) if skip_degenerate => {
                // keep the particles at zero weight so T stays sum(M)
                reweighted.push(WeightedParticleSet::new(
                    message.particles().to_vec(),
                    vec![0.0; message.len()],
                )?);
            }
            Err(e) => return Err(e),
        }
    }
    let pooled = WeightedParticleSet::concat(&reweighted);
    if pooled.is_empty() {
        return Err(Error::EmptySet);
    }
    let weighted = normalize_weights(pooled)?;
    let samples = systematic_resample(&weighted, weighted.len(), rng)?;
    Ok(Belief {
        samples: WeightedParticleSet::uniform(samples),
        weighted,
    })
}

/// Drives pull message passing over a graph one iteration at a time.
pub struct PullEngine<'a, P: ?Sized> {
    graph: &'a GraphTopology,
    potentials: &'a P,
    config: EngineConfig,
    slots: Vec<Slot>,
    state: InferenceState,
}

impl<'a, P: Potentials + ?Sized> PullEngine<'a, P> {
    /// Builds iteration 0: every message `u -> t` holds `M` prior particles
    /// of `X_t` at uniform weight and each belief pools its incoming
    /// messages.
    pub fn new(graph: &'a GraphTopology, potentials: &'a P, config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let slots = graph.slots();
        let m = config.particles;
        let messages: BTreeMap<Slot, WeightedParticleSet> = slots
            .iter()
            .enumerate()
            .map(|(k, &slot)| {
                let mut rng = SeededRng::stream(config.seed, stream_key(0, Phase::Init, k));
                let particles = potentials.prior(slot.to, m, &mut rng);
                (slot, WeightedParticleSet::uniform(particles))
            })
            .collect();
        let beliefs = graph
            .nodes()
            .map(|s| {
                let pooled: Vec<StateVector> = graph
                    .incoming_slots(s)?
                    .iter()
                    .flat_map(|slot| messages[slot].particles().iter().cloned())
                    .collect();
                let particles = if pooled.is_empty() {
                    let mut rng = SeededRng::stream(config.seed, stream_key(0, Phase::Belief, s.0 as usize));
                    potentials.prior(s, m, &mut rng)
                } else {
                    pooled
                };
                Ok((s, Belief::uniform(particles)))
            })
            .collect::<Result<_>>()?;
        Ok(PullEngine {
            graph,
            potentials,
            config,
            slots,
            state: InferenceState {
                iteration: 0,
                messages,
                beliefs,
            },
        })
    }

    pub fn state(&self) -> &InferenceState {
        &self.state
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn snapshot(&self) -> IterationRecord {
        IterationRecord {
            iteration: self.state.iteration,
            beliefs: self.state.beliefs.clone(),
            message_seconds: 0.0,
            belief_seconds: 0.0,
            fallbacks: 0,
        }
    }

    /// Updates every message from the previous iteration. Returns the new
    /// messages and the number of exploration fallbacks.
    pub fn message_phase(&self) -> Result<(BTreeMap<Slot, WeightedParticleSet>, usize)> {
        let n = self.state.iteration + 1;
        let work = |(k, &slot): (usize, &Slot)| {
            let mut rng = SeededRng::stream(self.config.seed, stream_key(n, Phase::Message, k));
            update_message_with_fallback(self.graph, &self.state, slot, &self.config, self.potentials, &mut rng)
                .map(|(m, fell_back)| (slot, m, fell_back))
        };
        let updated: Vec<_> = if self.config.parallel {
            self.slots.par_iter().enumerate().map(work).collect::<Result<_>>()?
        } else {
            self.slots.iter().enumerate().map(work).collect::<Result<_>>()?
        };
        let fallbacks = updated.iter().filter(|(_, _, f)| *f).count();
        let messages = updated.into_iter().map(|(slot, m, _)| (slot, m)).collect();
        Ok((messages, fallbacks))
    }

    /// Beliefs from freshly updated `messages`. A node whose incoming
    /// messages all vanish under its unary potential keeps its previous
    /// belief.
    pub fn belief_phase(&self, messages: &BTreeMap<Slot, WeightedParticleSet>) -> Result<BTreeMap<NodeId, Belief>> {
        let n = self.state.iteration + 1;
        let nodes: Vec<NodeId> = self.graph.nodes().collect();
        let work = |s: &NodeId| -> Result<(NodeId, Belief)> {
            let s = *s;
            let mut rng = SeededRng::stream(self.config.seed, stream_key(n, Phase::Belief, s.0 as usize));
            let incoming: Vec<&WeightedParticleSet> = self
                .graph
                .incoming_slots(s)?
                .iter()
                .map(|slot| &messages[slot])
                .collect();
            if incoming.is_empty() {
                return Ok((s, self.state.beliefs[&s].clone()));
            }
            let belief = match update_belief(s, &incoming, self.potentials, &mut rng) {
                Err(Error::DegenerateWeights) => {
                    match combine_messages(s, &incoming, self.potentials, &mut rng, true) {
                        Err(Error::DegenerateWeights) => self.state.beliefs[&s].clone(),
                        other => other?,
                    }
                }
                other => other?,
            };
            Ok((s, self.roughen(s, belief, &mut rng)))
        };
        if self.config.parallel {
            nodes.par_iter().map(work).collect()
        } else {
            nodes.iter().map(work).collect()
        }
    }

    fn roughen(&self, s: NodeId, belief: Belief, rng: &mut SeededRng) -> Belief {
        if self.config.roughening == 0.0 {
            return belief;
        }
        let scale = self.config.roughening;
        let moved = belief
            .samples
            .particles()
            .iter()
            .map(|p| self.potentials.perturb(s, p, scale, rng))
            .collect();
        Belief {
            samples: WeightedParticleSet::uniform(moved),
            weighted: belief.weighted,
        }
    }

    /// Runs one synchronous iteration and returns its record.
    pub fn step(&mut self) -> Result<IterationRecord> {
        let n = self.state.iteration + 1;
        let started = Instant::now();
        let (messages, fallbacks) = self.message_phase().map_err(|e| e.at_iteration(n))?;
        let message_seconds = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let beliefs = self.belief_phase(&messages).map_err(|e| e.at_iteration(n))?;
        let belief_seconds = started.elapsed().as_secs_f64();

        self.state = InferenceState {
            iteration: n,
            messages,
            beliefs,
        };
        Ok(IterationRecord {
            iteration: n,
            beliefs: self.state.beliefs.clone(),
            message_seconds,
            belief_seconds,
            fallbacks,
        })
    }
}

/// Runs `config.iterations` pull iterations. Record 0 is the initialization.
pub fn run_inference<P: Potentials + ?Sized>(
    graph: &GraphTopology,
    potentials: &P,
    config: EngineConfig,
) -> Result<Trace> {
    let mut engine = PullEngine::new(graph, potentials, config)?;
    let mut trace = Trace {
        records: vec![engine.snapshot()],
    };
    for _ in 0..config.iterations {
        trace.records.push(engine.step()?);
    }
    Ok(trace)
}
