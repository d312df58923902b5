//! Diagonal-covariance Gaussian mixtures and their exact products.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::angle::{wrap_positive, wrap_residual};
use crate::error::{Error, Result};
use crate::particle::{SeededRng, StateVector};

/// Default cap on the number of components an exact product may expand to.
pub const EXACT_PRODUCT_CAP: usize = 100_000;

/// Relative bandwidth floor used when a coordinate has zero spread.
pub const BANDWIDTH_FLOOR: f64 = 1e-3;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: StateVector,
    /// Diagonal of the covariance.
    pub var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
    periodic: Vec<bool>,
}

impl GaussianMixture {
    /// Builds a mixture and normalizes its weights. `periodic[k]` marks
    /// coordinate `k` as an angle; its residuals are wrapped to `(-pi, pi]`.
    pub fn new(components: Vec<Component>, periodic: Vec<bool>) -> Result<Self> {
        let dim = periodic.len();
        if components.is_empty() {
            return Err(Error::EmptySet);
        }
        for c in &components {
            if c.mean.len() != dim || c.var.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.mean.len().max(c.var.len()),
                });
            }
            if c.var.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
                return Err(Error::SingularCovariance);
            }
            if !(c.weight.is_finite() && c.weight >= 0.0) {
                return Err(Error::InvalidWeight(c.weight));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::DegenerateWeights);
        }
        let components = components
            .into_iter()
            .map(|c| Component {
                weight: c.weight / total,
                ..c
            })
            .collect();
        Ok(GaussianMixture { components, periodic })
    }

    /// Shorthand for scalar mixtures: `(weight, mean, variance)` triples.
    pub fn scalar(parts: &[(f64, f64, f64)]) -> Result<Self> {
        let components = parts
            .iter()
            .map(|&(weight, mean, var)| Component {
                weight,
                mean: StateVector::new([mean]),
                var: vec![var],
            })
            .collect();
        GaussianMixture::new(components, vec![false])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.periodic.len()
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    /// Ancestral sample: pick a component by weight, then draw from it.
    pub fn sample(&self, rng: &mut SeededRng) -> StateVector {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                pick = i;
                break;
            }
        }
        let c = &self.components[pick];
        draw_gaussian(&c.mean, &c.var, &self.periodic, rng)
    }
}

pub(crate) fn draw_gaussian(mean: &[f64], var: &[f64], periodic: &[bool], rng: &mut SeededRng) -> StateVector {
    mean.iter()
        .zip(var)
        .zip(periodic)
        .map(|((&m, &v), &p)| {
            let z: f64 = rng.sample(StandardNormal);
            let x = m + v.sqrt() * z;
            if p {
                wrap_positive(x)
            } else {
                x
            }
        })
        .collect::<Vec<_>>()
        .into()
}

/// `log N(x; mean, diag(var))` with periodic residual wrapping.
pub(crate) fn log_gaussian(x: &[f64], mean: &[f64], var: &[f64], periodic: &[bool]) -> f64 {
    let mut acc = 0.0;
    for k in 0..x.len() {
        let mut d = x[k] - mean[k];
        if periodic[k] {
            d = wrap_residual(d);
        }
        acc -= 0.5 * (LN_2PI + var[k].ln() + d * d / var[k]);
    }
    acc
}

/// Closed-form product of Gaussian densities.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProduct {
    pub mean: StateVector,
    pub var: Vec<f64>,
    /// Log of the integral of the unnormalized product.
    pub log_normalizer: f64,
}

/// Product of diagonal Gaussians given as `(mean, variance)` pairs.
/// Periodic coordinates are unwrapped against the first factor's mean
/// before combining.
pub fn gaussian_product(factors: &[(&[f64], &[f64])], periodic: &[bool]) -> Result<GaussianProduct> {
    let Some(&(first, _)) = factors.first() else {
        return Err(Error::TooFewInputs { needed: 1, got: 0 });
    };
    let dim = periodic.len();
    for (m, v) in factors {
        if m.len() != dim || v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.len().max(v.len()),
            });
        }
        if v.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::SingularCovariance);
        }
    }

    let n = factors.len() as f64;
    let mut mean = vec![0.0; dim];
    let mut var = vec![0.0; dim];
    let mut log_normalizer = 0.0;
    for k in 0..dim {
        let align = |m: f64| {
            if periodic[k] {
                first[k] + wrap_residual(m - first[k])
            } else {
                m
            }
        };
        let precision: f64 = factors.iter().map(|(_, v)| 1.0 / v[k]).sum();
        let mu = factors.iter().map(|(m, v)| align(m[k]) / v[k]).sum::<f64>() / precision;
        let spread: f64 = factors.iter().map(|(m, v)| (align(m[k]) - mu).powi(2) / v[k]).sum();
        let log_dets: f64 = factors.iter().map(|(_, v)| v[k].ln()).sum();
        log_normalizer += -0.5 * (n - 1.0) * LN_2PI - 0.5 * log_dets - 0.5 * precision.ln() - 0.5 * spread;
        mean[k] = if periodic[k] { wrap_positive(mu) } else { mu };
        var[k] = 1.0 / precision;
    }
    Ok(GaussianProduct {
        mean: mean.into(),
        var,
        log_normalizer,
    })
}

/// Density of the mixture at `x`.
pub fn mixture_pdf(m: &GaussianMixture, x: &[f64]) -> Result<f64> {
    if x.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: x.len(),
        });
    }
    Ok(m.components
        .iter()
        .map(|c| c.weight * log_gaussian(x, &c.mean, &c.var, &m.periodic).exp())
        .sum())
}

/// Expands the product of `mixtures` into all `prod M_j` components.
pub fn exact_mixture_product(mixtures: &[&GaussianMixture]) -> Result<GaussianMixture> {
    exact_mixture_product_capped(mixtures, EXACT_PRODUCT_CAP)
}

pub fn exact_mixture_product_capped(mixtures: &[&GaussianMixture], cap: usize) -> Result<GaussianMixture> {
    let Some(first) = mixtures.first() else {
        return Err(Error::TooFewInputs { needed: 1, got: 0 });
    };
    let periodic = first.periodic().to_vec();
    let total: u128 = mixtures.iter().map(|m| m.len() as u128).product();
    if total > cap as u128 {
        return Err(Error::ProductTooLarge { components: total, cap });
    }

    let mut labels = vec![0usize; mixtures.len()];
    let mut out = Vec::with_capacity(total as usize);
    let mut log_weights = Vec::with_capacity(total as usize);
    loop {
        let chosen: Vec<&Component> = mixtures.iter().zip(&labels).map(|(m, &l)| &m.components[l]).collect();
        let factors: Vec<(&[f64], &[f64])> = chosen.iter().map(|c| (c.mean.as_ref(), c.var.as_slice())).collect();
        let product = gaussian_product(&factors, &periodic)?;
        let log_w = chosen.iter().map(|c| c.weight.ln()).sum::<f64>() + product.log_normalizer;
        log_weights.push(log_w);
        out.push(Component {
            weight: 0.0,
            mean: product.mean,
            var: product.var,
        });

        // mixed-radix increment over the label vector
        let mut j = 0;
        loop {
            if j == labels.len() {
                return finish(out, log_weights, periodic);
            }
            labels[j] += 1;
            if labels[j] < mixtures[j].len() {
                break;
            }
            labels[j] = 0;
            j += 1;
        }
    }
}

fn finish(mut components: Vec<Component>, log_weights: Vec<f64>, periodic: Vec<bool>) -> Result<GaussianMixture> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    for (c, lw) in components.iter_mut().zip(log_weights) {
        c.weight = (lw - max).exp();
    }
    GaussianMixture::new(components, periodic)
}

/// One equal-weight kernel per particle, diagonal bandwidth by the rule of
/// thumb `h_k = sigma_k * n^(-1 / (dim + 4))`. Zero-spread coordinates get
/// a bandwidth of [`BANDWIDTH_FLOOR`].
pub fn kde_fit(particles: &[StateVector], periodic: &[bool]) -> Result<GaussianMixture> {
    let n = particles.len();
    if n < 2 {
        return Err(Error::TooFewInputs { needed: 2, got: n });
    }
    let dim = periodic.len();
    if let Some(p) = particles.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    let scale = (n as f64).powf(-1.0 / (dim as f64 + 4.0));
    let mut var = vec![0.0; dim];
    for (k, v) in var.iter_mut().enumerate() {
        let sigma = if periodic[k] {
            circular_spread(particles.iter().map(|p| p[k]))
        } else {
            let mean = particles.iter().map(|p| p[k]).sum::<f64>() / n as f64;
            let ss: f64 = particles.iter().map(|p| (p[k] - mean).powi(2)).sum();
            (ss / (n as f64 - 1.0)).sqrt()
        };
        let h = (sigma * scale).max(BANDWIDTH_FLOOR);
        *v = h * h;
    }
    let components = particles
        .iter()
        .map(|p| {
            let mean: Vec<f64> = p
                .iter()
                .zip(periodic)
                .map(|(&x, &per)| if per { wrap_positive(x) } else { x })
                .collect();
            Component {
                weight: 1.0,
                mean: mean.into(),
                var: var.clone(),
            }
        })
        .collect();
    GaussianMixture::new(components, periodic.to_vec())
}

/// Sample standard deviation of angles measured as residuals from their
/// circular mean.
fn circular_spread(angles: impl Iterator<Item = f64> + Clone) -> f64 {
    let (s, c) = angles.clone().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    let centre = s.atan2(c);
    let (mut n, mut ss) = (0.0, 0.0);
    for a in angles {
        ss += wrap_residual(a - centre).powi(2);
        n += 1.0;
    }
    (ss / (n - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn normal_pdf(x: f64, m: f64, v: f64) -> f64 {
        (-(x - m).powi(2) / (2.0 * v)).exp() / (TAU * v).sqrt()
    }

    #[test]
    fn product_of_one_is_identity() {
        let p = gaussian_product(&[(&[1.5], &[2.0])], &[false]).unwrap();
        assert_eq!(p.mean[0], 1.5);
        assert_eq!(p.var[0], 2.0);
        assert_relative_eq!(p.log_normalizer, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn product_of_two_at_same_mean() {
        let p = gaussian_product(&[(&[0.0], &[1.0]), (&[0.0], &[1.0])], &[false]).unwrap();
        assert_eq!(p.mean[0], 0.0);
        assert_relative_eq!(p.var[0], 0.5);
    }

    #[test]
    fn product_normalizer_matches_quadrature() {
        let p = gaussian_product(&[(&[0.0], &[1.0]), (&[2.0], &[1.0])], &[false]).unwrap();
        assert_relative_eq!(p.mean[0], 1.0);
        assert_relative_eq!(p.var[0], 0.5);

        // trapezoid on a dense grid: oracle for the integral
        let (lo, hi, n) = (-12.0, 14.0, 20_001);
        let h = (hi - lo) / (n - 1) as f64;
        let integral: f64 = (0..n)
            .map(|i| {
                let x = lo + i as f64 * h;
                let f = normal_pdf(x, 0.0, 1.0) * normal_pdf(x, 2.0, 1.0);
                if i == 0 || i == n - 1 {
                    0.5 * f * h
                } else {
                    f * h
                }
            })
            .sum();
        assert_relative_eq!(p.log_normalizer.exp(), integral, max_relative = 1e-10);
        assert_relative_eq!(p.log_normalizer.exp(), normal_pdf(2.0, 0.0, 2.0), max_relative = 1e-12);
    }

    #[test]
    fn product_rejects_singular() {
        assert_eq!(
            gaussian_product(&[(&[0.0], &[0.0])], &[false]).unwrap_err(),
            Error::SingularCovariance
        );
    }

    #[test]
    fn periodic_product_across_seam() {
        let a = [TAU - 0.1];
        let b = [0.1];
        let p = gaussian_product(&[(&a, &[0.01]), (&b, &[0.01])], &[true]).unwrap();
        assert!(wrap_residual(p.mean[0]).abs() < 1e-12);
    }

    #[test]
    fn pdf_examples() {
        let unit = GaussianMixture::scalar(&[(1.0, 0.0, 1.0)]).unwrap();
        assert_relative_eq!(
            mixture_pdf(&unit, &[0.0]).unwrap(),
            0.398_942_280_401_432_7,
            epsilon = 1e-15
        );
        let pair = GaussianMixture::scalar(&[(0.5, -2.0, 1.0), (0.5, 2.0, 1.0)]).unwrap();
        assert_relative_eq!(
            mixture_pdf(&pair, &[2.0]).unwrap(),
            mixture_pdf(&pair, &[-2.0]).unwrap(),
            epsilon = 1e-15
        );
        assert!(matches!(
            mixture_pdf(&pair, &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exact_product_sizes() {
        let a = GaussianMixture::scalar(&[(0.3, -1.0, 1.0), (0.7, 1.0, 0.5)]).unwrap();
        let b = GaussianMixture::scalar(&[(0.5, 0.0, 2.0), (0.5, 2.0, 1.0)]).unwrap();
        assert_eq!(exact_mixture_product(&[&a, &b]).unwrap().len(), 4);
        assert!(matches!(
            exact_mixture_product_capped(&[&a, &b, &a], 7),
            Err(Error::ProductTooLarge { components: 8, cap: 7 })
        ));
    }

    #[test]
    fn product_with_broad_unit_component_reweights_only() {
        let a = GaussianMixture::scalar(&[(0.3, -1.0, 1.0), (0.7, 1.0, 0.5)]).unwrap();
        let wide = GaussianMixture::scalar(&[(1.0, 0.0, 1e12)]).unwrap();
        let p = exact_mixture_product(&[&a, &wide]).unwrap();
        for (c, orig) in p.components().iter().zip(a.components()) {
            assert_relative_eq!(c.mean[0], orig.mean[0], max_relative = 1e-9);
            assert_relative_eq!(c.var[0], orig.var[0], max_relative = 1e-9);
            assert_relative_eq!(c.weight, orig.weight, max_relative = 1e-9);
        }
    }

    #[test]
    fn exact_product_is_commutative() {
        let a = GaussianMixture::scalar(&[(0.3, -1.0, 1.0), (0.7, 1.0, 0.5)]).unwrap();
        let b = GaussianMixture::scalar(&[(0.2, 0.0, 2.0), (0.5, 2.0, 1.0), (0.3, -3.0, 0.7)]).unwrap();
        let ab = exact_mixture_product(&[&a, &b]).unwrap();
        let ba = exact_mixture_product(&[&b, &a]).unwrap();
        let key = |c: &Component| (c.mean[0] * 1e9).round() as i64;
        let mut x: Vec<_> = ab.components().iter().map(|c| (key(c), c.weight)).collect();
        let mut y: Vec<_> = ba.components().iter().map(|c| (key(c), c.weight)).collect();
        x.sort_by_key(|p| p.0);
        y.sort_by_key(|p| p.0);
        for (p, q) in x.iter().zip(&y) {
            assert_eq!(p.0, q.0);
            assert!((p.1 - q.1).abs() < 1e-12);
        }
    }

    #[test]
    fn kde_examples() {
        let two = [StateVector::new([0.0]), StateVector::new([10.0])];
        let m = kde_fit(&two, &[false]).unwrap();
        assert_eq!(m.len(), 2);
        assert!(m.components().iter().all(|c| c.weight == 0.5));
        let h = 50f64.sqrt() * 2f64.powf(-0.2);
        assert_relative_eq!(m.components()[0].var[0], h * h, max_relative = 1e-12);

        let same = vec![StateVector::new([3.0, 1.0]); 5];
        let m = kde_fit(&same, &[false, true]).unwrap();
        assert!(m.components()[0]
            .var
            .iter()
            .all(|&v| v == BANDWIDTH_FLOOR * BANDWIDTH_FLOOR));

        assert!(matches!(kde_fit(&two[..1], &[false]), Err(Error::TooFewInputs { .. })));
    }

    #[test]
    fn kde_integrates_to_one() {
        let pts: Vec<StateVector> = [-1.0, 0.3, 2.2, 2.5, 4.0]
            .iter()
            .map(|&x| StateVector::new([x]))
            .collect();
        let m = kde_fit(&pts, &[false]).unwrap();
        let h = 0.001;
        let integral: f64 = (0..30_000)
            .map(|i| mixture_pdf(&m, &[-15.0 + i as f64 * h]).unwrap() * h)
            .sum();
        assert_relative_eq!(integral, 1.0, epsilon = 1e-6);
    }
}
