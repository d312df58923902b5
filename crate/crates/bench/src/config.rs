//! Experiment configuration: a flat TOML file whose keys mirror the fields
//! below, overridable from the command line.
//!
//! ```toml
//! # every key is optional
//! algorithm = "pmpnbp"        # or "pampas-baseline"
//! M = 200
//! iterations = 25
//! trials = 10
//! seed = 7
//! explore_fraction = 0.5
//! K = 50
//! occlude_circle = false
//! output_dir = "out"
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pmpnbp::engine::{EngineConfig, DEFAULT_ROUGHENING};
use pmpnbp::scene::{CirclePose, SceneSpec, DEFAULT_INIT_THRESHOLD};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Pmpnbp,
    PampasBaseline,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pmpnbp => "pmpnbp",
            Algorithm::PampasBaseline => "pampas-baseline",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pmpnbp" => Ok(Algorithm::Pmpnbp),
            "pampas-baseline" => Ok(Algorithm::PampasBaseline),
            other => Err(format!(
                "unknown algorithm `{other}` (expected pmpnbp or pampas-baseline)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// Particles per message.
    #[serde(rename = "M")]
    pub particles: usize,
    pub iterations: usize,
    pub trials: usize,
    /// Trial `k` uses seed `seed + k` for both the scene and the inference.
    pub seed: u64,
    pub explore_fraction: f64,
    /// Gibbs sweeps per product sample (baseline only).
    #[serde(rename = "K")]
    pub sweeps: usize,
    /// Kernel width of the belief roughening move (pmpnbp only; 0 disables).
    pub roughening: f64,
    /// `phi` threshold of the initial detections.
    pub init_threshold: f64,
    pub occlude_circle: bool,
    pub width: usize,
    pub height: usize,
    /// Ground-truth circle radius; the pattern sits at the image centre.
    pub radius: f64,
    pub clutter_circles: usize,
    pub clutter_rectangles: usize,
    /// Reuse the trial-0 scene for every trial instead of drawing a fresh
    /// one per trial.
    pub fixed_scene: bool,
    /// Write belief/MLE frames for every iteration.
    pub frames: bool,
    pub output_dir: PathBuf,
    /// Particle counts swept by `bench`.
    #[serde(rename = "bench_M")]
    pub bench_particles: Vec<usize>,
    /// Timed iterations per benchmark point, after one warm-up iteration.
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let scene = SceneSpec::default();
        let engine = EngineConfig::default();
        ExperimentConfig {
            algorithm: Algorithm::Pmpnbp,
            particles: engine.particles,
            iterations: engine.iterations,
            trials: 1,
            seed: 0,
            explore_fraction: engine.explore_fraction,
            sweeps: pmpnbp::baseline::DEFAULT_SWEEPS,
            roughening: DEFAULT_ROUGHENING,
            init_threshold: DEFAULT_INIT_THRESHOLD,
            occlude_circle: scene.occlude_circle,
            width: scene.width,
            height: scene.height,
            radius: scene.pattern.r,
            clutter_circles: scene.clutter_circles,
            clutter_rectangles: scene.clutter_rectangles,
            fixed_scene: false,
            frames: true,
            output_dir: PathBuf::from("out"),
            bench_particles: vec![50, 100, 200],
            repetitions: 3,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub algorithm: Option<Algorithm>,
    pub particles: Option<usize>,
    pub iterations: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub explore_fraction: Option<f64>,
    pub sweeps: Option<usize>,
    pub roughening: Option<f64>,
    pub occlude_circle: Option<bool>,
    pub fixed_scene: Option<bool>,
    pub frames: Option<bool>,
    pub output_dir: Option<PathBuf>,
    pub bench_particles: Option<Vec<usize>>,
    pub repetitions: Option<usize>,
}

macro_rules! apply {
    ($cfg:ident, $over:ident, $($field:ident),*) => {
        $(if let Some(v) = $over.$field { $cfg.$field = v; })*
    };
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Loads `path` (or the defaults), applies `overrides` and validates.
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        apply!(
            self,
            o,
            algorithm,
            particles,
            iterations,
            trials,
            seed,
            explore_fraction,
            sweeps,
            roughening,
            occlude_circle,
            fixed_scene,
            frames,
            output_dir,
            bench_particles,
            repetitions
        );
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |key: &'static str, message: String| Err(ConfigError::Range { key, message });
        if self.particles == 0 {
            return range("M", "must be at least 1".into());
        }
        if self.trials == 0 {
            return range("trials", "must be at least 1".into());
        }
        if self.algorithm == Algorithm::PampasBaseline && self.sweeps == 0 {
            return range("K", "must be at least 1 for the baseline".into());
        }
        if !(0.0..=1.0).contains(&self.explore_fraction) {
            return range(
                "explore_fraction",
                format!("{} is outside [0, 1]", self.explore_fraction),
            );
        }
        if !(self.roughening.is_finite() && self.roughening >= 0.0) {
            return range(
                "roughening",
                format!("{} must be finite and non-negative", self.roughening),
            );
        }
        if !(0.0..1.0).contains(&self.init_threshold) {
            return range("init_threshold", format!("{} is outside [0, 1)", self.init_threshold));
        }
        if self.width == 0 {
            return range("width", "must be at least 1".into());
        }
        if self.height == 0 {
            return range("height", "must be at least 1".into());
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return range("radius", format!("{} must be positive", self.radius));
        }
        if self.bench_particles.contains(&0) {
            return range("bench_M", "every particle count must be at least 1".into());
        }
        if self.repetitions < 3 {
            return range("repetitions", format!("{} is below the minimum of 3", self.repetitions));
        }
        Ok(())
    }

    /// Seed of trial `trial`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }

    pub fn scene_spec(&self, trial: usize) -> SceneSpec {
        let seed = if self.fixed_scene {
            self.seed
        } else {
            self.trial_seed(trial)
        };
        SceneSpec {
            width: self.width,
            height: self.height,
            clutter_circles: self.clutter_circles,
            clutter_rectangles: self.clutter_rectangles,
            occlude_circle: self.occlude_circle,
            pattern: CirclePose {
                x: self.width as f64 / 2.0,
                y: self.height as f64 / 2.0,
                r: self.radius,
            },
            seed,
        }
    }

    pub fn engine_config(&self, trial: usize, particles: usize) -> EngineConfig {
        EngineConfig {
            particles,
            explore_fraction: self.explore_fraction,
            iterations: self.iterations,
            seed: self.trial_seed(trial),
            roughening: self.roughening,
            parallel: false,
        }
    }
}
