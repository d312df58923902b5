//! Conditional samplers between neighbouring pattern parts and the
//! matching conditional densities.
//!
//! Each class is named `given -> generated`. Densities are products of
//! independent Gaussians on the residual between the generated state and
//! the noise-free prediction; angle residuals are wrapped to `(-pi, pi]`.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::angle::{wrap_positive, wrap_residual};
use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeKind};
use crate::particle::{SeededRng, StateVector};

use super::geometry::PatternParams;

/// Smallest size any sampled `w`, `h` or `r` is clamped to.
pub const MIN_SIZE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeClass {
    /// Outer link given its inner link.
    InnerToOuter,
    /// Inner link given its outer link.
    OuterToInner,
    /// Circle given an inner link.
    InnerToCircle,
    /// Inner link `arm` (2..=5) given the circle.
    CircleToInner { arm: u32 },
}

impl EdgeClass {
    /// Classifies the conditional `target | given`. Inner links take their
    /// arm index from their node id.
    pub fn between(given: (NodeId, NodeKind), target: (NodeId, NodeKind)) -> Result<Self> {
        use NodeKind::*;
        match (given.1, target.1) {
            (InnerLink, OuterLink) => Ok(EdgeClass::InnerToOuter),
            (OuterLink, InnerLink) => Ok(EdgeClass::OuterToInner),
            (InnerLink, Circle) => Ok(EdgeClass::InnerToCircle),
            (Circle, InnerLink) => Ok(EdgeClass::CircleToInner { arm: target.0 .0 }),
            _ => Err(Error::UnknownEdgeClass(given.0, target.0)),
        }
    }

    pub fn given_dim(self) -> usize {
        match self {
            EdgeClass::CircleToInner { .. } => 3,
            _ => 5,
        }
    }

    pub fn target_dim(self) -> usize {
        match self {
            EdgeClass::InnerToCircle => 3,
            _ => 5,
        }
    }

    /// Index of the angle coordinate of the generated state, if any.
    pub fn target_angle(self) -> Option<usize> {
        match self {
            EdgeClass::InnerToCircle => None,
            _ => Some(2),
        }
    }

    /// Per-coordinate standard deviations of the generated state.
    pub fn sigmas(self, p: &PatternParams) -> Vec<f64> {
        match self {
            EdgeClass::InnerToOuter | EdgeClass::CircleToInner { .. } => {
                vec![p.sigma_p, p.sigma_p, p.sigma_alpha, p.sigma_s, p.sigma_s]
            }
            // position noise is applied twice (at the joint and at the tip)
            EdgeClass::OuterToInner => {
                let sp = p.sigma_p * 2f64.sqrt();
                vec![sp, sp, p.sigma_alpha, p.sigma_s, p.sigma_s]
            }
            EdgeClass::InnerToCircle => vec![p.sigma_p, p.sigma_p, p.sigma_s],
        }
    }

    fn check_given(self, given: &[f64]) -> Result<()> {
        if given.len() != self.given_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.given_dim(),
                got: given.len(),
            });
        }
        Ok(())
    }
}

/// Noise-free generated state.
pub fn predict(class: EdgeClass, given: &[f64], p: &PatternParams) -> Result<StateVector> {
    class.check_given(given)?;
    let out = match class {
        EdgeClass::InnerToOuter => {
            let (x, y, a, w, h) = (given[0], given[1], given[2], given[3], given[4]);
            vec![x + w * a.cos(), y + w * a.sin(), wrap_positive(a), w, h]
        }
        EdgeClass::OuterToInner => {
            let (x, y, a, w, h) = (given[0], given[1], given[2], given[3], given[4]);
            let back = PI + a;
            vec![x + w * back.cos(), y + w * back.sin(), wrap_positive(back - PI), w, h]
        }
        EdgeClass::InnerToCircle => {
            vec![given[0], given[1], p.radius_from_link(given[3], given[4])]
        }
        EdgeClass::CircleToInner { arm } => {
            let (w, h) = p.link_dims(given[2]);
            vec![given[0], given[1], PatternParams::arm_angle(arm), w, h]
        }
    };
    Ok(out.into())
}

/// Draws the generated state given its neighbour.
pub fn pairwise_sample(class: EdgeClass, given: &[f64], p: &PatternParams, rng: &mut SeededRng) -> Result<StateVector> {
    class.check_given(given)?;
    let mut noise = |sigma: f64| sigma * rng.sample::<f64, _>(StandardNormal);
    let out = match class {
        EdgeClass::InnerToOuter => {
            let (x, y, a, w, h) = (given[0], given[1], given[2], given[3], given[4]);
            vec![
                x + w * a.cos() + noise(p.sigma_p),
                y + w * a.sin() + noise(p.sigma_p),
                wrap_positive(a + noise(p.sigma_alpha)),
                (w + noise(p.sigma_s)).max(MIN_SIZE),
                (h + noise(p.sigma_s)).max(MIN_SIZE),
            ]
        }
        EdgeClass::OuterToInner => {
            let (x, y, a, w, h) = (given[0], given[1], given[2], given[3], given[4]);
            let xj = x + noise(p.sigma_p);
            let yj = y + noise(p.sigma_p);
            let back = PI + a;
            vec![
                xj + w * back.cos() + noise(p.sigma_p),
                yj + w * back.sin() + noise(p.sigma_p),
                wrap_positive(back - PI + noise(p.sigma_alpha)),
                (w + noise(p.sigma_s)).max(MIN_SIZE),
                (h + noise(p.sigma_s)).max(MIN_SIZE),
            ]
        }
        EdgeClass::InnerToCircle => {
            let r = p.radius_from_link(given[3], given[4]);
            vec![
                given[0] + noise(p.sigma_p),
                given[1] + noise(p.sigma_p),
                (r + noise(p.sigma_s)).max(MIN_SIZE),
            ]
        }
        EdgeClass::CircleToInner { arm } => {
            let (w, h) = p.link_dims(given[2]);
            vec![
                given[0] + noise(p.sigma_p),
                given[1] + noise(p.sigma_p),
                wrap_positive(PatternParams::arm_angle(arm) + noise(p.sigma_alpha)),
                (w + noise(p.sigma_s)).max(MIN_SIZE),
                (h + noise(p.sigma_s)).max(MIN_SIZE),
            ]
        }
    };
    Ok(out.into())
}

/// Density of `target` under the sampler of `class` conditioned on `given`.
pub fn pairwise_density(class: EdgeClass, given: &[f64], target: &[f64], p: &PatternParams) -> Result<f64> {
    if target.len() != class.target_dim() {
        return Err(Error::DimensionMismatch {
            expected: class.target_dim(),
            got: target.len(),
        });
    }
    let mean = predict(class, given, p)?;
    let angle = class.target_angle();
    let mut log_density = 0.0;
    for (k, sigma) in class.sigmas(p).into_iter().enumerate() {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::SingularCovariance);
        }
        let mut d = target[k] - mean[k];
        if angle == Some(k) {
            d = wrap_residual(d);
        }
        let z = d / sigma;
        log_density -= 0.5 * z * z + sigma.ln() + 0.5 * (TAU).ln();
    }
    Ok(log_density.exp())
}

/// Density for `CircleToInner` when the arm index is unknown: the arm whose
/// nominal angle best explains `target` is used.
pub fn circle_to_inner_density_any_arm(given: &[f64], target: &[f64], p: &PatternParams) -> Result<f64> {
    let mut best = 0.0f64;
    for arm in 2..=5 {
        best = best.max(pairwise_density(EdgeClass::CircleToInner { arm }, given, target, p)?);
    }
    Ok(best)
}
