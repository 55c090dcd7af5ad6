use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qnls_harness::{emit_plots, run, ConfigError, Experiment, ExperimentConfig, RunError, RunManifest};

#[derive(Parser)]
#[command(name = "qnls", version, about = "Quintic NLS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Base seed of the sampled ensemble.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    t_end: Option<f64>,
}

#[derive(Subcommand)]
#[command(rename_all = "snake_case")]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Check a run's data files and write a gnuplot script.
    Plots { manifest: PathBuf },
    /// Print the default config of an experiment.
    Defaults { experiment: String },
    Conservation,
    PlaneWaveOrder,
    Continuity,
    LinearInvariance,
    SmoothingSweep,
    Growth,
    TransportMc,
    TruncationConvergence,
    FocusingLocal,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let (Some(seed), Some(m)) = (self.seed, cfg.measure.as_mut()) {
            m.base_seed = seed;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(dt) = self.dt {
            cfg.flow.dt = dt;
        }
        if let Some(t) = self.t_end {
            cfg.t_end = t;
        }
    }
}

fn config_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn execute(mut cfg: ExperimentConfig, overrides: &Overrides) -> ExitCode {
    overrides.apply(&mut cfg);
    match run(&cfg) {
        Ok(m) => report(&m),
        Err(RunError::Config(e)) => config_error(e),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn report(m: &RunManifest) -> ExitCode {
    if let Some(o) = &m.outcome {
        for c in &o.checks {
            println!("{} {}: {} (threshold {})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.threshold);
        }
        for n in &o.notes {
            println!("note: {n}");
        }
    }
    let dir = m.config.output_dir.display();
    if m.passed {
        println!("{}: PASS ({dir})", m.experiment);
        ExitCode::SUCCESS
    } else {
        println!("{}: FAIL: {} ({dir})", m.experiment, m.failure.as_deref().unwrap_or("unknown"));
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let experiment = match &cli.command {
        Command::Run { config } => {
            return match ExperimentConfig::load(config) {
                Ok(cfg) => execute(cfg, &cli.overrides),
                Err(e) => config_error(e),
            };
        }
        Command::Plots { manifest } => {
            let result = RunManifest::read(manifest).and_then(|m| {
                let dir = manifest.parent().map(PathBuf::from).unwrap_or_default();
                emit_plots(&m, &dir)
            });
            return match result {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            };
        }
        Command::Defaults { experiment } => {
            return match experiment.parse::<Experiment>() {
                Ok(e) => {
                    print!("{}", ExperimentConfig::defaults(e).to_toml());
                    ExitCode::SUCCESS
                }
                Err(e) => config_error(ConfigError::Parse(e)),
            };
        }
        Command::Conservation => Experiment::Conservation,
        Command::PlaneWaveOrder => Experiment::PlaneWaveOrder,
        Command::Continuity => Experiment::Continuity,
        Command::LinearInvariance => Experiment::LinearInvariance,
        Command::SmoothingSweep => Experiment::SmoothingSweep,
        Command::Growth => Experiment::Growth,
        Command::TransportMc => Experiment::TransportMc,
        Command::TruncationConvergence => Experiment::TruncationConvergence,
        Command::FocusingLocal => Experiment::FocusingLocal,
    };
    execute(ExperimentConfig::defaults(experiment), &cli.overrides)
}
