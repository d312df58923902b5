//! Weighted particle sets shared by the pull engine and the push baseline.

use std::ops::{Deref, DerefMut};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum(w) - 1|` for a set to count as normalized.
pub const NORMALIZED_TOLERANCE: f64 = 1e-9;

/// A node state: `(x, y, r)` for circles, `(x, y, alpha, w, h)` for links,
/// or any fixed-length real vector for generic nodes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        StateVector(values.into())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        StateVector(v)
    }
}

impl<const N: usize> From<[f64; N]> for StateVector {
    fn from(v: [f64; N]) -> Self {
        StateVector(v.to_vec())
    }
}

/// Deterministic random stream. Streams derived with [`SeededRng::stream`]
/// from the same seed are independent of each other and of call order, so
/// work keyed by stream id gives identical results sequentially or in
/// parallel.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn stream(seed: u64, key: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(key);
        SeededRng { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Particles paired with nonnegative weights.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightedParticleSet {
    particles: Vec<StateVector>,
    weights: Vec<f64>,
}

impl WeightedParticleSet {
    /// Pairs particles with weights. Weights must be finite and nonnegative
    /// but need not sum to one.
    pub fn new(particles: Vec<StateVector>, weights: Vec<f64>) -> Result<Self> {
        if particles.len() != weights.len() {
            return Err(Error::LengthMismatch {
                particles: particles.len(),
                weights: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeight(w));
        }
        Ok(WeightedParticleSet { particles, weights })
    }

    /// Equal weights summing to one.
    pub fn uniform(particles: Vec<StateVector>) -> Self {
        let n = particles.len();
        let weights = vec![1.0 / n.max(1) as f64; n];
        WeightedParticleSet { particles, weights }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[StateVector] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateVector, f64)> {
        self.particles.iter().zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_weight() - 1.0).abs() <= NORMALIZED_TOLERANCE
    }

    /// `true` when no weight is positive.
    pub fn is_degenerate(&self) -> bool {
        !self.weights.iter().any(|&w| w > 0.0)
    }

    pub fn into_parts(self) -> (Vec<StateVector>, Vec<f64>) {
        (self.particles, self.weights)
    }

    /// Concatenates sets, keeping their weights as they are.
    pub fn concat<'a>(sets: impl IntoIterator<Item = &'a WeightedParticleSet>) -> Self {
        let mut out = WeightedParticleSet::default();
        for set in sets {
            out.particles.extend_from_slice(&set.particles);
            out.weights.extend_from_slice(&set.weights);
        }
        out
    }

    /// Weighted per-coordinate mean. Angular coordinates are not unwrapped.
    pub fn weighted_mean(&self) -> Option<StateVector> {
        let dim = self.particles.first()?.len();
        let total = self.total_weight();
        if total <= 0.0 {
            return None;
        }
        let mut mean = vec![0.0; dim];
        for (p, w) in self.iter() {
            for (m, v) in mean.iter_mut().zip(p.iter()) {
                *m += w * v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= total);
        Some(mean.into())
    }

    fn check_normalized(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let sum = self.total_weight();
        if (sum - 1.0).abs() > NORMALIZED_TOLERANCE {
            return Err(Error::NotNormalized(sum));
        }
        Ok(())
    }
}

/// Rescales weights to sum to one. Sets that already sum to one within
/// rounding are returned unchanged, so the operation is idempotent.
pub fn normalize_weights(mut set: WeightedParticleSet) -> Result<WeightedParticleSet> {
    let sum = set.total_weight();
    if !(sum.is_finite() && sum > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    let slack = 4.0 * f64::EPSILON * set.len() as f64;
    if (sum - 1.0).abs() > slack {
        set.weights.iter_mut().for_each(|w| *w /= sum);
    }
    Ok(set)
}

/// Systematic resampling: one uniform offset, `count` evenly spaced
/// pointers through the cumulative weights. Particle `i` appears either
/// `floor(count * w_i)` or `ceil(count * w_i)` times.
pub fn systematic_resample(set: &WeightedParticleSet, count: usize, rng: &mut SeededRng) -> Result<Vec<StateVector>> {
    set.check_normalized()?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let step = 1.0 / count as f64;
    let offset = rng.random::<f64>() * step;
    let last = set.len() - 1;

    let mut out = Vec::with_capacity(count);
    let mut index = 0;
    let mut cumulative = set.weights[0];
    for k in 0..count {
        let pointer = offset + k as f64 * step;
        while pointer >= cumulative && index < last {
            index += 1;
            cumulative += set.weights[index];
        }
        // rounding in the cumulative sum can leave trailing zero-weight
        // particles selected; step back to the last one with mass
        let mut pick = index;
        while set.weights[pick] == 0.0 && pick > 0 {
            pick -= 1;
        }
        out.push(set.particles[pick].clone());
    }
    Ok(out)
}

/// Highest-weight particle, lowest index on ties.
pub fn max_weight_particle(set: &WeightedParticleSet) -> Result<&StateVector> {
    max_weight_index(set).map(|i| &set.particles[i])
}

pub fn max_weight_index(set: &WeightedParticleSet) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut best = 0;
    for (i, &w) in set.weights.iter().enumerate().skip(1) {
        if w > set.weights[best] {
            best = i;
        }
    }
    Ok(best)
}

/// `1 / sum(w_i^2)` for a normalized set.
pub fn effective_sample_size(set: &WeightedParticleSet) -> Result<f64> {
    set.check_normalized()?;
    Ok(1.0 / set.weights.iter().map(|w| w * w).sum::<f64>())
}
