//! `scene`: generate one scene for inspection.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use pmpnbp::graph::{pattern, NodeKind};
use pmpnbp::scene::{generate_scene, PatternParams, Scene};

use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::experiment::prepare_output;

pub const SCENE_PGM: &str = "scene.pgm";
pub const TRUTH_CSV: &str = "truth.csv";

/// Writes the trial-0 scene of `cfg` as `scene.pgm` plus its ground truth
/// as `truth.csv`; returns both paths.
pub fn write_scene(cfg: &ExperimentConfig, dir: &Path) -> Result<(Scene, PathBuf, PathBuf), RunError> {
    prepare_output(dir, false)?;
    let scene = generate_scene(&cfg.scene_spec(0), &PatternParams::default());
    let image_path = dir.join(SCENE_PGM);
    let wrap = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Write { path, source }
    };
    let file = File::create(&image_path).map_err(wrap(&image_path))?;
    scene.image.write_pgm(BufWriter::new(file)).map_err(wrap(&image_path))?;

    let truth_path = dir.join(TRUTH_CSV);
    let graph = pattern::graph();
    let mut out = csv::Writer::from_path(&truth_path)?;
    out.write_record(["node", "kind", "x", "y", "alpha", "w", "h", "r"])?;
    for (node, state) in &scene.truth {
        let kind = graph.kind(*node).unwrap_or(NodeKind::Generic { dim: state.len() });
        let cell = |i: usize| state.get(i).map_or(String::new(), |v| v.to_string());
        let record = match kind {
            NodeKind::Circle => vec![
                node.0.to_string(),
                "circle".into(),
                cell(0),
                cell(1),
                String::new(),
                String::new(),
                String::new(),
                cell(2),
            ],
            NodeKind::InnerLink | NodeKind::OuterLink => {
                let name = if kind == NodeKind::InnerLink { "inner" } else { "outer" };
                vec![
                    node.0.to_string(),
                    name.into(),
                    cell(0),
                    cell(1),
                    cell(2),
                    cell(3),
                    cell(4),
                    String::new(),
                ]
            }
            NodeKind::Generic { .. } => continue,
        };
        out.write_record(&record)?;
    }
    out.flush().map_err(wrap(&truth_path))?;
    Ok((scene, image_path, truth_path))
}
