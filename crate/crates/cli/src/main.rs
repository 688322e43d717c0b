//! Command-line front end for the experiment harness.
//!
//! Exit codes: 0 pass, 1 bound check failed, 2 config error, 3 resource budget exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use adelic_walk::verify::{Experiment, ExperimentConfig, Outcome, Report};
use adelic_walk::Error;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "adelic-walk", version, about = "Random affine walks over Q: simulation and checks")]
struct Cli {
    /// TOML experiment config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; replica i uses seed XOR splitmix64(i)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of independent replicas
    #[arg(long, global = true)]
    replicas: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (0: one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the step law and report degeneracy
    Validate,
    /// Drift table and product-formula residual
    Drift,
    /// Count the gauge set at the identity against its bound
    Gauge {
        #[arg(long)]
        k: Option<f64>,
    },
    /// Exact sample paths
    Walk {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Boundary digits and real intervals per replica
    Boundary,
    /// Mean of ⟨A_n⁻¹q_n⟩/n along the grid
    Lln41,
    /// Frequency of ⟨Z_n⟩_P⁺/n within the positive-drift bound
    Lln43,
    /// Frequency of ‖x_n⁻¹π_n(ẑ)‖/n within the negative-drift bound
    Prop44,
    /// Exact entropies of the convolution powers
    Entropy {
        #[arg(long)]
        n_max: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. }
        | Error::BitSizeExceeded { .. }
        | Error::GaugeCapExceeded { .. }
        | Error::StabilizationFailed { .. } => 3,
        _ => 2,
    }
}

fn resolve(cli: &Cli) -> Result<(Experiment, ExperimentConfig), Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(r) = cli.replicas {
        cfg.replicas = r;
    }
    let experiment = match &cli.command {
        Command::Validate => Experiment::Validate,
        Command::Drift => Experiment::Drift,
        Command::Gauge { k } => {
            if let Some(k) = k {
                cfg.gauge.k = *k;
            }
            Experiment::Gauge
        }
        Command::Walk { n } => {
            if let Some(n) = n {
                cfg.walk.n = *n;
            }
            Experiment::Walk
        }
        Command::Boundary => Experiment::Boundary,
        Command::Lln41 => Experiment::Lln41,
        Command::Lln43 => Experiment::Lln43,
        Command::Prop44 => Experiment::Prop44,
        Command::Entropy { n_max } => {
            if let Some(n) = n_max {
                cfg.entropy.n_max = *n;
            }
            Experiment::Entropy
        }
    };
    cfg.check()?;
    Ok((experiment, cfg))
}

fn emit(cli: &Cli, report: &Report) -> std::io::Result<()> {
    let text = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, cfg) = match resolve(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match pool.install(|| experiment.run(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("error: writing report: {e}");
        return ExitCode::from(2);
    }
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    ExitCode::from(match report.outcome {
        Outcome::Pass => 0,
        Outcome::BoundFailed => 1,
        Outcome::BudgetExceeded => 3,
    })
}
