//! `bench`: per-iteration wall-clock of both algorithms as `M` grows.

use std::path::Path;

use pmpnbp::baseline::{PushConfig, PushEngine};
use pmpnbp::engine::PullEngine;
use pmpnbp::graph::pattern;
use pmpnbp::scene::{generate_scene, PatternParams, PatternPotentials};
use pmpnbp::trace::IterationRecord;

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{ConfigError, RunError};

/// Environment variable that would change the thread count.
pub const PARALLELISM_VAR: &str = "RAYON_NUM_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub particles: usize,
    /// Gibbs sweeps; zero for pmpnbp.
    pub sweeps: usize,
    pub phase: &'static str,
    pub median_seconds: f64,
    pub repetitions: usize,
}

/// Refuses a thread-count override other than one thread.
pub fn check_single_threaded(value: Option<&str>) -> Result<(), ConfigError> {
    match value {
        None => Ok(()),
        Some(v) if v.trim() == "1" => Ok(()),
        Some(v) => Err(ConfigError::ParallelismOverride(format!("{PARALLELISM_VAR}={v}"))),
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// One warm-up step followed by `repetitions` timed steps.
fn time_steps(
    repetitions: usize,
    mut step: impl FnMut() -> pmpnbp::Result<IterationRecord>,
) -> pmpnbp::Result<(f64, f64)> {
    step()?;
    let (mut message, mut belief) = (Vec::new(), Vec::new());
    for _ in 0..repetitions {
        let record = step()?;
        message.push(record.message_seconds);
        belief.push(record.belief_seconds);
    }
    Ok((median(&mut message), median(&mut belief)))
}

/// Times the message and belief phases of both algorithms for every `M`
/// in `cfg.bench_particles`, strictly sequentially on one thread.
pub fn run_scaling_benchmark(cfg: &ExperimentConfig) -> Result<Vec<BenchRow>, RunError> {
    cfg.validate()?;
    check_single_threaded(std::env::var(PARALLELISM_VAR).ok().as_deref())?;
    if cfg.bench_particles.len() < 2 {
        return Err(ConfigError::Range {
            key: "bench_M",
            message: "needs at least two particle counts".into(),
        }
        .into());
    }
    let graph = pattern::graph();
    let params = PatternParams::default();
    let scene = generate_scene(&cfg.scene_spec(0), &params);
    let potentials = PatternPotentials::for_scene(&graph, &scene, params).with_threshold(cfg.init_threshold);
    let fail = |source| RunError::Inference { trial: 0, source };

    let mut rows = Vec::new();
    for algorithm in [Algorithm::Pmpnbp, Algorithm::PampasBaseline] {
        for &m in &cfg.bench_particles {
            let engine = cfg.engine_config(0, m);
            let (sweeps, (message, belief)) = match algorithm {
                Algorithm::Pmpnbp => {
                    let mut pull = PullEngine::new(&graph, &potentials, engine).map_err(fail)?;
                    (0, time_steps(cfg.repetitions, || pull.step()).map_err(fail)?)
                }
                Algorithm::PampasBaseline => {
                    let config = PushConfig {
                        engine,
                        sweeps: cfg.sweeps,
                    };
                    let mut push = PushEngine::new(&graph, &potentials, config).map_err(fail)?;
                    (cfg.sweeps, time_steps(cfg.repetitions, || push.step()).map_err(fail)?)
                }
            };
            for (phase, seconds) in [("message", message), ("belief", belief)] {
                rows.push(BenchRow {
                    algorithm,
                    particles: m,
                    sweeps,
                    phase,
                    median_seconds: seconds,
                    repetitions: cfg.repetitions,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_bench_csv(path: &Path, rows: &[BenchRow]) -> Result<(), RunError> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["algorithm", "M", "K", "phase", "median_seconds", "repetitions"])?;
    for r in rows {
        out.write_record([
            r.algorithm.name().to_string(),
            r.particles.to_string(),
            r.sweeps.to_string(),
            r.phase.to_string(),
            r.median_seconds.to_string(),
            r.repetitions.to_string(),
        ])?;
    }
    out.flush().map_err(|source| RunError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn thread_override_detection() {
        assert!(check_single_threaded(None).is_ok());
        assert!(check_single_threaded(Some("1")).is_ok());
        assert!(matches!(
            check_single_threaded(Some("8")),
            Err(ConfigError::ParallelismOverride(_))
        ));
    }
}
