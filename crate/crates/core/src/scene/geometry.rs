use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::angle::wrap_positive;
use crate::particle::StateVector;

/// Filled circle: centre `(x, y)` and radius `r`, all in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclePose {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

/// Filled rectangle centred at `(x, y)` whose long side `w` points along
/// `alpha` (radians) and short side is `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkPose {
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    pub w: f64,
    pub h: f64,
}

impl CirclePose {
    pub fn to_state(self) -> StateVector {
        StateVector::new([self.x, self.y, self.r])
    }

    pub fn from_state(s: &[f64]) -> Self {
        CirclePose {
            x: s[0],
            y: s[1],
            r: s[2],
        }
    }
}

impl LinkPose {
    pub fn to_state(self) -> StateVector {
        StateVector::new([self.x, self.y, self.alpha, self.w, self.h])
    }

    pub fn from_state(s: &[f64]) -> Self {
        LinkPose {
            x: s[0],
            y: s[1],
            alpha: s[2],
            w: s[3],
            h: s[4],
        }
    }
}

/// Shape and noise constants of the articulated pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternParams {
    /// Link aspect ratio `w / h`.
    pub c: f64,
    pub delta_w: f64,
    pub delta_h: f64,
    /// Position noise (pixels).
    pub sigma_p: f64,
    /// Size noise (pixels).
    pub sigma_s: f64,
    /// Orientation noise (radians).
    pub sigma_alpha: f64,
}

impl Default for PatternParams {
    fn default() -> Self {
        PatternParams {
            c: 7.0,
            delta_w: 28.0 / 5.0,
            delta_h: 4.0 / 5.0,
            sigma_p: 10.0,
            sigma_s: 2.0,
            sigma_alpha: 15f64.to_radians(),
        }
    }
}

impl PatternParams {
    /// Same geometry with every noise scale set to zero.
    pub fn noiseless(self) -> Self {
        PatternParams {
            sigma_p: 0.0,
            sigma_s: 0.0,
            sigma_alpha: 0.0,
            ..self
        }
    }

    /// Link `(w, h)` implied by circle radius `r`.
    pub fn link_dims(&self, r: f64) -> (f64, f64) {
        let base = 2.0 * r * self.delta_w * self.delta_h / (self.c * self.delta_h + self.delta_w);
        (self.c * base, base)
    }

    /// Circle radius implied by link dimensions.
    pub fn radius_from_link(&self, w: f64, h: f64) -> f64 {
        0.5 * (w / self.delta_w + h / self.delta_h)
    }

    /// Nominal orientation of inner link `arm` (2..=5).
    pub fn arm_angle(arm: u32) -> f64 {
        wrap_positive(arm as f64 * FRAC_PI_2)
    }
}

/// Nominal part sizes for a pattern with circle radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartSizes {
    pub radius: f64,
    pub link_w: f64,
    pub link_h: f64,
}

impl PartSizes {
    pub fn from_radius(radius: f64, params: &PatternParams) -> Self {
        let (link_w, link_h) = params.link_dims(radius);
        PartSizes { radius, link_w, link_h }
    }
}
