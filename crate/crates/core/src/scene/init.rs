use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::angle::wrap_positive;
use crate::graph::NodeKind;
use crate::particle::{SeededRng, StateVector};

use super::geometry::PartSizes;
use super::raster::BinaryImage;
use super::unary::unary_phi;

/// Rejection attempts allowed per requested particle before back-filling.
pub const ATTEMPTS_PER_PARTICLE: usize = 400;

/// Orientation jitter (radians) around the four canonical directions.
pub const INIT_ANGLE_JITTER: f64 = 0.05;

/// Uniform draw over the image for `kind`, with nominal part sizes.
pub fn uniform_state(image: &BinaryImage, kind: NodeKind, sizes: &PartSizes, rng: &mut SeededRng) -> StateVector {
    let x = rng.random_range(0.0..image.width() as f64);
    let y = rng.random_range(0.0..image.height() as f64);
    match kind {
        NodeKind::Circle => StateVector::new([x, y, sizes.radius]),
        NodeKind::InnerLink | NodeKind::OuterLink => {
            let alpha = rng.random_range(0.0..TAU);
            StateVector::new([x, y, alpha, sizes.link_w, sizes.link_h])
        }
        NodeKind::Generic { dim } => StateVector::new(vec![0.0; dim]),
    }
}

/// Coarse detection: uniform positions, canonical orientations with a
/// little jitter, nominal sizes; keep states with `phi > threshold`. If
/// too few pass within the attempt budget the rest are uniform draws.
pub fn init_particles(
    image: &BinaryImage,
    kind: NodeKind,
    sizes: &PartSizes,
    threshold: f64,
    count: usize,
    rng: &mut SeededRng,
) -> Vec<StateVector> {
    let mut accepted = Vec::with_capacity(count);
    let budget = count * ATTEMPTS_PER_PARTICLE;
    for _ in 0..budget {
        if accepted.len() == count {
            break;
        }
        let mut state = uniform_state(image, kind, sizes, rng);
        if kind.is_link() {
            let quarter = rng.random_range(0..4) as f64;
            let jitter: f64 = rng.sample(StandardNormal);
            state[2] = wrap_positive(quarter * FRAC_PI_2 + INIT_ANGLE_JITTER * jitter);
        }
        if unary_phi(&state, image, kind) > threshold {
            accepted.push(state);
        }
    }
    while accepted.len() < count {
        accepted.push(uniform_state(image, kind, sizes, rng));
    }
    accepted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::geometry::{LinkPose, PatternParams};
    use crate::scene::raster::Part;

    fn sizes() -> PartSizes {
        PartSizes::from_radius(12.0, &PatternParams::default())
    }

    #[test]
    fn blank_image_backfills() {
        let img = BinaryImage::new(64, 64);
        let mut rng = SeededRng::new(1);
        let out = init_particles(&img, NodeKind::Circle, &sizes(), 0.4, 20, &mut rng);
        assert_eq!(out.len(), 20);
        assert!(out.iter().all(|s| unary_phi(s, &img, NodeKind::Circle) == 0.0));
    }

    #[test]
    fn detections_cluster_on_isolated_part() {
        let s = sizes();
        let link = LinkPose {
            x: 100.0,
            y: 90.0,
            alpha: 0.0,
            w: s.link_w,
            h: s.link_h,
        };
        let img = BinaryImage::new(200, 200).rendered(&Part::Link(link));
        let mut rng = SeededRng::new(4);
        let out = init_particles(&img, NodeKind::InnerLink, &s, 0.4, 30, &mut rng);
        let mean_dist = out
            .iter()
            .map(|p| ((p[0] - link.x).powi(2) + (p[1] - link.y).powi(2)).sqrt())
            .sum::<f64>()
            / out.len() as f64;
        assert!(mean_dist < s.link_w / 2.0, "mean distance {mean_dist}");
        assert!(out.iter().all(|p| unary_phi(p, &img, NodeKind::InnerLink) > 0.4));
    }
}
