use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use pmpnbp_bench::experiment::{ERRORS_CSV, SUMMARY_CSV};
use pmpnbp_bench::scaling::write_bench_csv;
use pmpnbp_bench::scene_cmd::write_scene;
use pmpnbp_bench::{
    run_experiment, run_scaling_benchmark, Algorithm, ConfigError, ExperimentConfig, Overrides, RunError,
};

/// Pull message passing on the articulated-pattern benchmark.
#[derive(Debug, Parser)]
#[command(name = "pmpnbp-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run inference trials; writes frames, errors.csv, summary.csv and traces.
    Run(Common),
    /// Time both algorithms over a sweep of particle counts.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Particle counts to sweep, comma separated.
        #[arg(long = "M-values", value_delimiter = ',')]
        m_values: Option<Vec<usize>>,
        /// Timed iterations per point (at least 3).
        #[arg(long)]
        repetitions: Option<usize>,
        /// CSV destination (default: <output_dir>/bench.csv).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate the trial-0 scene and its ground truth.
    Scene(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat TOML config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// Particles per message.
    #[arg(long = "M")]
    particles: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    explore_fraction: Option<f64>,
    /// Gibbs sweeps of the baseline.
    #[arg(long = "K")]
    sweeps: Option<usize>,
    #[arg(long)]
    roughening: Option<f64>,
    #[arg(long)]
    occlude_circle: bool,
    #[arg(long)]
    fixed_scene: bool,
    /// Skip writing per-iteration frames.
    #[arg(long)]
    no_frames: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            algorithm: self.algorithm,
            particles: self.particles,
            iterations: self.iterations,
            trials: self.trials,
            seed: self.seed,
            explore_fraction: self.explore_fraction,
            sweeps: self.sweeps,
            roughening: self.roughening,
            occlude_circle: self.occlude_circle.then_some(true),
            fixed_scene: self.fixed_scene.then_some(true),
            frames: self.no_frames.then_some(false),
            output_dir: self.output_dir.clone(),
            ..Overrides::default()
        }
    }

    fn load(&self, extra: impl FnOnce(&mut Overrides)) -> Result<ExperimentConfig, ConfigError> {
        let mut overrides = self.overrides();
        extra(&mut overrides);
        ExperimentConfig::load(self.config.as_deref(), overrides)
    }
}

enum Failure {
    Config(ConfigError),
    Run(RunError),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => Failure::Config(c),
            other => Failure::Run(other),
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(common) => {
            let cfg = common.load(|_| {})?;
            let report = run_experiment(&cfg)?;
            let dir = cfg.output_dir.display();
            if let Some(last) = report.summary.last() {
                println!(
                    "{} trial(s) of {}: mean error {:.2} px (std {:.2}) at iteration {}",
                    last.trials, cfg.algorithm, last.mean_error, last.std_error, last.iteration
                );
            }
            println!(
                "wrote {dir}/{ERRORS_CSV}, {dir}/{SUMMARY_CSV} and {} frame(s)",
                report.frames_written
            );
        }
        Command::Bench {
            common,
            m_values,
            repetitions,
            output,
        } => {
            let cfg = common.load(|o| {
                o.bench_particles = m_values;
                o.repetitions = repetitions;
            })?;
            let rows = run_scaling_benchmark(&cfg)?;
            let path = output.unwrap_or_else(|| cfg.output_dir.join("bench.csv"));
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|source| RunError::Output {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            write_bench_csv(&path, &rows)?;
            for r in rows.iter().filter(|r| r.phase == "message") {
                println!(
                    "{:16} M={:4} message phase {:.4} s",
                    r.algorithm, r.particles, r.median_seconds
                );
            }
            println!("wrote {}", path.display());
        }
        Command::Scene(common) => {
            let cfg = common.load(|_| {})?;
            let (scene, image, truth) = write_scene(&cfg, &cfg.output_dir)?;
            println!(
                "{}x{} scene, {} white pixels: {} and {}",
                scene.image.width(),
                scene.image.height(),
                scene.image.count_white(),
                image.display(),
                truth.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
