use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle::wrap_positive;
use crate::graph::{pattern, NodeId};
use crate::particle::{SeededRng, StateVector};

use super::geometry::{CirclePose, LinkPose, PartSizes, PatternParams};
use super::raster::{BinaryImage, Part};

/// Clutter sizes are drawn uniformly from this band around the pattern's
/// part sizes.
pub const CLUTTER_SCALE: (f64, f64) = (0.7, 1.3);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub clutter_circles: usize,
    pub clutter_rectangles: usize,
    /// Leave the circle out of the image (its truth is still reported).
    pub occlude_circle: bool,
    /// Ground-truth circle; the links follow from it.
    pub pattern: CirclePose,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            width: 320,
            height: 320,
            clutter_circles: 12,
            clutter_rectangles: 100,
            occlude_circle: false,
            pattern: CirclePose {
                x: 160.0,
                y: 160.0,
                r: 12.0,
            },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub spec: SceneSpec,
    pub image: BinaryImage,
    /// Ground-truth state of every pattern node.
    pub truth: BTreeMap<NodeId, StateVector>,
    pub sizes: PartSizes,
}

/// Noise-free pattern states for a circle at `circle`.
pub fn pattern_states(circle: CirclePose, params: &PatternParams) -> BTreeMap<NodeId, StateVector> {
    let (w, h) = params.link_dims(circle.r);
    let mut truth = BTreeMap::new();
    truth.insert(pattern::CIRCLE, circle.to_state());
    for (&inner, &outer) in pattern::INNER.iter().zip(&pattern::OUTER) {
        let alpha = PatternParams::arm_angle(inner.0);
        let link = LinkPose {
            x: circle.x,
            y: circle.y,
            alpha,
            w,
            h,
        };
        truth.insert(inner, link.to_state());
        let tip = LinkPose {
            x: circle.x + w * alpha.cos(),
            y: circle.y + w * alpha.sin(),
            ..link
        };
        truth.insert(outer, tip.to_state());
    }
    truth
}

/// Renders clutter, then the pattern, from `spec.seed`.
pub fn generate_scene(spec: &SceneSpec, params: &PatternParams) -> Scene {
    let mut rng = SeededRng::new(spec.seed);
    let sizes = PartSizes::from_radius(spec.pattern.r, params);
    let mut image = BinaryImage::new(spec.width, spec.height);
    let (lo, hi) = CLUTTER_SCALE;
    let (w, h) = (spec.width as f64, spec.height as f64);

    for _ in 0..spec.clutter_circles {
        let c = CirclePose {
            x: rng.random_range(0.0..w),
            y: rng.random_range(0.0..h),
            r: sizes.radius * rng.random_range(lo..hi),
        };
        image.draw(&Part::Circle(c));
    }
    for _ in 0..spec.clutter_rectangles {
        let l = LinkPose {
            x: rng.random_range(0.0..w),
            y: rng.random_range(0.0..h),
            alpha: wrap_positive(rng.random_range(0.0..std::f64::consts::TAU)),
            w: sizes.link_w * rng.random_range(lo..hi),
            h: sizes.link_h * rng.random_range(lo..hi),
        };
        image.draw(&Part::Link(l));
    }

    let truth = pattern_states(spec.pattern, params);
    for (&id, state) in &truth {
        if id == pattern::CIRCLE {
            if !spec.occlude_circle {
                image.draw(&Part::Circle(CirclePose::from_state(state)));
            }
        } else {
            image.draw(&Part::Link(LinkPose::from_state(state)));
        }
    }
    Scene {
        spec: *spec,
        image,
        truth,
        sizes,
    }
}
