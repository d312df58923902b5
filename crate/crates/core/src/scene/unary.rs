use crate::graph::NodeKind;
use crate::particle::StateVector;

use super::geometry::{CirclePose, LinkPose};
use super::raster::{BinaryImage, Part};

/// The primitive a node of `kind` draws at `state`.
pub fn part_for(kind: NodeKind, state: &[f64]) -> Option<Part> {
    match kind {
        NodeKind::Circle => Some(Part::Circle(CirclePose::from_state(state))),
        NodeKind::InnerLink | NodeKind::OuterLink => Some(Part::Link(LinkPose::from_state(state))),
        NodeKind::Generic { .. } => None,
    }
}

/// Template overlap score in `[0, 1]`.
///
/// The node's template is rendered at `state`; `Q` counts its pixels, `P`
/// counts white image pixels inside the template's bounding box, and the
/// score is the number of pixels white in both divided by `max(P, Q)`.
/// Template pixels falling outside the image never match.
pub fn unary_phi(state: &StateVector, image: &BinaryImage, kind: NodeKind) -> f64 {
    let Some(part) = part_for(kind, state) else {
        return 0.0;
    };
    if !part.is_finite() {
        return 0.0;
    }
    let b = part.bounds();
    let inside = part.inside_test();
    let (mut template, mut observed, mut shared) = (0usize, 0usize, 0usize);
    for py in b.y0..=b.y1 {
        for px in b.x0..=b.x1 {
            let t = inside(px, py);
            let white = image.get(px, py);
            template += t as usize;
            observed += white as usize;
            shared += (t && white) as usize;
        }
    }
    let denom = template.max(observed);
    if denom == 0 {
        0.0
    } else {
        shared as f64 / denom as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_overlap_scores_one() {
        let link = LinkPose {
            x: 60.0,
            y: 40.0,
            alpha: 0.7,
            w: 56.0,
            h: 8.0,
        };
        let img = BinaryImage::new(120, 100).rendered(&Part::Link(link));
        assert_eq!(unary_phi(&link.to_state(), &img, NodeKind::InnerLink), 1.0);

        let circle = CirclePose {
            x: 30.0,
            y: 30.0,
            r: 9.0,
        };
        let img = BinaryImage::new(60, 60).rendered(&Part::Circle(circle));
        assert_eq!(unary_phi(&circle.to_state(), &img, NodeKind::Circle), 1.0);
    }

    #[test]
    fn black_region_scores_zero() {
        let img = BinaryImage::new(50, 50);
        let c = CirclePose {
            x: 25.0,
            y: 25.0,
            r: 5.0,
        }
        .to_state();
        assert_eq!(unary_phi(&c, &img, NodeKind::Circle), 0.0);
        // fully outside the image: P = 0, all template pixels unmatched
        let far = CirclePose {
            x: -100.0,
            y: 25.0,
            r: 5.0,
        }
        .to_state();
        assert_eq!(unary_phi(&far, &img, NodeKind::Circle), 0.0);
    }

    #[test]
    fn partial_overlap_is_fractional() {
        let link = LinkPose {
            x: 60.0,
            y: 40.0,
            alpha: 0.0,
            w: 56.0,
            h: 8.0,
        };
        let img = BinaryImage::new(120, 100).rendered(&Part::Link(link));
        let shifted = LinkPose { x: 74.0, ..link };
        let phi = unary_phi(&shifted.to_state(), &img, NodeKind::OuterLink);
        assert!(phi > 0.5 && phi < 1.0, "{phi}");
    }

    #[test]
    fn non_finite_state_scores_zero() {
        let img = BinaryImage::new(10, 10);
        let s = StateVector::new([f64::NAN, 1.0, 1.0]);
        assert_eq!(unary_phi(&s, &img, NodeKind::Circle), 0.0);
    }
}
