//! Gibbs sampling from a product of Gaussian mixtures without expanding
//! all `prod M_j` components.

use rand::Rng;

use crate::error::{Error, Result};
use crate::particle::{SeededRng, StateVector};
use crate::potentials::OpCounters;

use super::gmm::{draw_gaussian, gaussian_product, log_gaussian, GaussianMixture};

/// Labels of the currently selected component in each input mixture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector(pub Vec<usize>);

/// Runs `sweeps` Gibbs sweeps over component labels and returns one draw
/// from the product Gaussian of the final selection.
///
/// Each label update for mixture `j` scores every component `l` by
/// `w_j(l) * N(mu_l; mu_rest, var_l + var_rest)`, where `rest` is the
/// product of the other selected components. When `counters` is given,
/// one `gibbs_normalizer` tick is recorded per scored component.
pub fn gibbs_product_sample(
    mixtures: &[&GaussianMixture],
    sweeps: usize,
    rng: &mut SeededRng,
    counters: Option<&OpCounters>,
) -> Result<StateVector> {
    let labels = gibbs_labels(mixtures, sweeps, rng, counters)?;
    let periodic = mixtures[0].periodic();
    let factors = selected(mixtures, &labels);
    let product = gaussian_product(&factors, periodic)?;
    Ok(draw_gaussian(&product.mean, &product.var, periodic, rng))
}

/// The label chain alone, after `sweeps` sweeps from an initialization
/// drawn from each mixture's weights.
pub fn gibbs_labels(
    mixtures: &[&GaussianMixture],
    sweeps: usize,
    rng: &mut SeededRng,
    counters: Option<&OpCounters>,
) -> Result<LabelVector> {
    let Some(first) = mixtures.first() else {
        return Err(Error::TooFewInputs { needed: 1, got: 0 });
    };
    if sweeps == 0 {
        return Err(Error::InvalidConfig("Gibbs sweeps must be at least 1".into()));
    }
    let periodic = first.periodic();
    if let Some(m) = mixtures.iter().find(|m| m.dim() != first.dim()) {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            got: m.dim(),
        });
    }

    let mut labels: Vec<usize> = mixtures
        .iter()
        .map(|m| draw_label(m.components().iter().map(|c| c.weight.ln()), rng))
        .collect();
    let mut scores = Vec::new();

    for _ in 0..sweeps {
        for j in 0..mixtures.len() {
            let rest: Vec<(&[f64], &[f64])> = mixtures
                .iter()
                .zip(&labels)
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, (m, &l))| {
                    let c = &m.components()[l];
                    (c.mean.as_ref(), c.var.as_slice())
                })
                .collect();
            let rest = if rest.is_empty() {
                None
            } else {
                Some(gaussian_product(&rest, periodic)?)
            };

            scores.clear();
            for c in mixtures[j].components() {
                let pairing = match &rest {
                    None => 0.0,
                    Some(r) => {
                        let var: Vec<f64> = c.var.iter().zip(&r.var).map(|(a, b)| a + b).collect();
                        log_gaussian(&c.mean, &r.mean, &var, periodic)
                    }
                };
                scores.push(c.weight.ln() + pairing);
            }
            if let Some(counters) = counters {
                OpCounters::bump(&counters.gibbs_normalizer, scores.len() as u64);
            }
            labels[j] = draw_label(scores.iter().copied(), rng);
        }
    }
    Ok(LabelVector(labels))
}

fn selected<'a>(mixtures: &[&'a GaussianMixture], labels: &LabelVector) -> Vec<(&'a [f64], &'a [f64])> {
    mixtures
        .iter()
        .zip(&labels.0)
        .map(|(m, &l)| {
            let c = &m.components()[l];
            (c.mean.as_ref(), c.var.as_slice())
        })
        .collect()
}

/// Categorical draw from unnormalized log-probabilities.
fn draw_label(log_p: impl Iterator<Item = f64> + Clone, rng: &mut SeededRng) -> usize {
    let max = log_p.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // every score underflowed: fall back to uniform
        let n = log_p.count();
        return rng.random_range(0..n);
    }
    let total: f64 = log_p.clone().map(|l| (l - max).exp()).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, l) in log_p.enumerate() {
        let p = (l - max).exp();
        acc += p;
        if p > 0.0 {
            last = i;
        }
        if u < acc {
            return i;
        }
    }
    last
}
