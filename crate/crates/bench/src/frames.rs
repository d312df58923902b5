//! Belief and MLE frames: the scene drawn dimmed with the estimate on top.

use pmpnbp::graph::GraphTopology;
use pmpnbp::scene::{part_for, GrayImage, Scene};
use pmpnbp::trace::IterationRecord;

/// Grey level of the observed image under an overlay.
pub const BACKGROUND: u8 = 80;
pub const MARK: u8 = 255;

fn base(scene: &Scene) -> GrayImage {
    scene.image.to_gray(BACKGROUND, 0)
}

/// Every belief particle of every node as a single marked pixel.
pub fn belief_frame(scene: &Scene, record: &IterationRecord) -> GrayImage {
    let mut frame = base(scene);
    for belief in record.beliefs.values() {
        for p in belief.samples.particles() {
            if p.len() >= 2 && p[0].is_finite() && p[1].is_finite() {
                frame.set(p[0].round() as i64, p[1].round() as i64, MARK);
            }
        }
    }
    frame
}

/// The MLE of every node rendered as its full part.
pub fn mle_frame(scene: &Scene, graph: &GraphTopology, record: &IterationRecord) -> GrayImage {
    let mut frame = base(scene);
    for (node, state) in record.mles() {
        let Ok(kind) = graph.kind(node) else { continue };
        if let Some(part) = part_for(kind, &state) {
            if part.is_finite() {
                frame.draw(&part, MARK);
            }
        }
    }
    frame
}
