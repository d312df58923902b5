//! `run`: repeated inference trials with frames, error curves and traces.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pmpnbp::baseline::{run_push_inference, PushConfig};
use pmpnbp::engine::run_inference;
use pmpnbp::graph::{pattern, GraphTopology, NodeId};
use pmpnbp::scene::{generate_scene, mle_position_error, node_position_errors, PatternParams, PatternPotentials};
use pmpnbp::trace::Trace;
use rayon::prelude::*;

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::RunError;
use crate::frames::{belief_frame, mle_frame};

pub const ERRORS_CSV: &str = "errors.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const FRAMES_DIR: &str = "frames";

/// Per-iteration MLE errors of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialErrors {
    pub trial: usize,
    /// `per_node[i]` holds the node errors at iteration `i`.
    pub per_node: Vec<Vec<(NodeId, f64)>>,
    pub mean: Vec<f64>,
}

/// Mean and standard deviation of the error across trials, per iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub iteration: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub trials: Vec<TrialErrors>,
    pub summary: Vec<SummaryRow>,
    pub frames_written: usize,
}

pub fn frame_path(dir: &Path, trial: usize, iteration: usize, kind: &str) -> PathBuf {
    dir.join(FRAMES_DIR)
        .join(format!("trial{trial:03}_iter{iteration:03}_{kind}.pgm"))
}

pub fn trace_path(dir: &Path, trial: usize) -> PathBuf {
    dir.join(format!("trace_trial{trial:03}.jsonl"))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), RunError> {
    let wrap = |source| RunError::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(wrap)?);
    body(&mut out).map_err(wrap)?;
    out.flush().map_err(wrap)
}

/// Creates the output tree and proves it writable before any compute.
pub fn prepare_output(dir: &Path, frames: bool) -> Result<(), RunError> {
    let fail = |source| RunError::Output {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(fail)?;
    if frames {
        fs::create_dir_all(dir.join(FRAMES_DIR)).map_err(fail)?;
    }
    let probe = dir.join(".write-probe");
    File::create(&probe).map_err(fail)?;
    fs::remove_file(&probe).map_err(fail)
}

/// Runs one trial of `cfg`.
pub fn run_trial(
    cfg: &ExperimentConfig,
    graph: &GraphTopology,
    trial: usize,
) -> Result<(pmpnbp::scene::Scene, Trace), RunError> {
    let params = PatternParams::default();
    let scene = generate_scene(&cfg.scene_spec(trial), &params);
    let potentials = PatternPotentials::for_scene(graph, &scene, params).with_threshold(cfg.init_threshold);
    let engine = cfg.engine_config(trial, cfg.particles);
    let trace = match cfg.algorithm {
        Algorithm::Pmpnbp => run_inference(graph, &potentials, engine),
        Algorithm::PampasBaseline => run_push_inference(
            graph,
            &potentials,
            PushConfig {
                engine,
                sweeps: cfg.sweeps,
            },
        ),
    }
    .map_err(|source| RunError::Inference { trial, source })?;
    Ok((scene, trace))
}

fn trial_errors(trial: usize, scene: &pmpnbp::scene::Scene, trace: &Trace) -> TrialErrors {
    let mut per_node = Vec::with_capacity(trace.records.len());
    let mut mean = Vec::with_capacity(trace.records.len());
    for record in &trace.records {
        let mles = record.mles();
        per_node.push(node_position_errors(&mles, &scene.truth).into_iter().collect());
        mean.push(mle_position_error(&mles, &scene.truth));
    }
    TrialErrors { trial, per_node, mean }
}

/// Per-iteration mean and (population) standard deviation across trials.
pub fn summarize(trials: &[TrialErrors]) -> Vec<SummaryRow> {
    let iterations = trials.iter().map(|t| t.mean.len()).min().unwrap_or(0);
    (0..iterations)
        .map(|i| {
            let n = trials.len() as f64;
            let mean = trials.iter().map(|t| t.mean[i]).sum::<f64>() / n;
            let var = trials.iter().map(|t| (t.mean[i] - mean).powi(2)).sum::<f64>() / n;
            SummaryRow {
                iteration: i,
                mean_error: mean,
                std_error: var.sqrt(),
                trials: trials.len(),
            }
        })
        .collect()
}

fn trial_artifacts(
    cfg: &ExperimentConfig,
    graph: &GraphTopology,
    trial: usize,
) -> Result<(TrialErrors, usize), RunError> {
    let (scene, trace) = run_trial(cfg, graph, trial)?;
    let dir = &cfg.output_dir;
    let mut frames = 0;
    if cfg.frames {
        for record in &trace.records {
            let belief = belief_frame(&scene, record);
            write_file(&frame_path(dir, trial, record.iteration, "belief"), |w| {
                belief.write_pgm(w)
            })?;
            let mle = mle_frame(&scene, graph, record);
            write_file(&frame_path(dir, trial, record.iteration, "mle"), |w| mle.write_pgm(w))?;
            frames += 2;
        }
    }
    write_file(&trace_path(dir, trial), |w| trace.write_jsonl(w))?;
    Ok((trial_errors(trial, &scene, &trace), frames))
}

pub fn write_errors_csv(path: &Path, trials: &[TrialErrors]) -> Result<(), RunError> {
    let mut out = csv::Writer::from_path(path)?;
    let nodes: Vec<NodeId> = trials
        .first()
        .and_then(|t| t.per_node.first())
        .map(|row| row.iter().map(|(id, _)| *id).collect())
        .unwrap_or_default();
    let mut header = vec!["trial".to_string(), "iteration".to_string()];
    header.extend(nodes.iter().map(|id| format!("node_{}", id.0)));
    header.push("mean_error".into());
    out.write_record(&header)?;
    for t in trials {
        for (i, row) in t.per_node.iter().enumerate() {
            let mut record = vec![t.trial.to_string(), i.to_string()];
            record.extend(row.iter().map(|(_, e)| e.to_string()));
            record.push(t.mean[i].to_string());
            out.write_record(&record)?;
        }
    }
    out.flush().map_err(|source| RunError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), RunError> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["iteration", "mean_error", "std_error", "trials"])?;
    for r in rows {
        out.write_record([
            r.iteration.to_string(),
            r.mean_error.to_string(),
            r.std_error.to_string(),
            r.trials.to_string(),
        ])?;
    }
    out.flush().map_err(|source| RunError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs every trial (in parallel; each trial is single-threaded and seeded
/// on its own) and writes frames, traces, `errors.csv` and `summary.csv`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    cfg.validate()?;
    prepare_output(&cfg.output_dir, cfg.frames)?;
    let graph = pattern::graph();
    let results: Vec<(TrialErrors, usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| trial_artifacts(cfg, &graph, trial))
        .collect::<Result<_, _>>()?;
    let frames_written = results.iter().map(|(_, f)| f).sum();
    let trials: Vec<TrialErrors> = results.into_iter().map(|(t, _)| t).collect();
    let summary = summarize(&trials);
    write_errors_csv(&cfg.output_dir.join(ERRORS_CSV), &trials)?;
    write_summary_csv(&cfg.output_dir.join(SUMMARY_CSV), &summary)?;
    Ok(RunReport {
        trials,
        summary,
        frames_written,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let t = |trial, mean: Vec<f64>| TrialErrors {
            trial,
            per_node: vec![vec![]; mean.len()],
            mean,
        };
        let rows = summarize(&[t(0, vec![10.0, 2.0]), t(1, vec![20.0, 4.0])]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].mean_error, 15.0);
        assert_eq!(rows[0].std_error, 5.0);
        assert_eq!(rows[1].mean_error, 3.0);
        assert_eq!(rows[1].trials, 2);
    }
}
