use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasilevel::PotentialSpec;
use quasilevel_cli::{run, CliError, Command, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "quasilevel", version, about = "Level lines of quasiperiodic potentials")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "quasilevel-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Sub {
    /// Trace one level set: CSV, SVG and a summary.
    Trace(RunArgs),
    /// Follow spanning lines across window scales and classify them.
    Classify(RunArgs),
    /// Open-line energy interval at several window sizes.
    Critical(RunArgs),
    /// Largest closed-line diameter per level.
    DCurve(RunArgs),
    /// Integer points close to a ray.
    LatticeApprox(RunArgs),
    /// Dihedral symmetry and sector-curve equivariance.
    SymmetryCheck(RunArgs),
    /// Print a star potential spec.
    Build {
        #[arg(long)]
        star_n: usize,
        /// Amplitudes per harmonic, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        amps: Vec<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        global_phase: f64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (command, args) = match cli.command {
        Sub::Build {
            star_n,
            amps,
            global_phase,
            out,
        } => {
            let spec = PotentialSpec::Star {
                n: star_n,
                amps,
                global_phase,
                phase_shift: None,
            };
            spec.build()?;
            let text = quasilevel_cli::format::json(&spec);
            return match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(path, e)),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
        }
        Sub::Trace(a) => (Command::Trace, a),
        Sub::Classify(a) => (Command::Classify, a),
        Sub::Critical(a) => (Command::Critical, a),
        Sub::DCurve(a) => (Command::DCurve, a),
        Sub::LatticeApprox(a) => (Command::LatticeApprox, a),
        Sub::SymmetryCheck(a) => (Command::SymmetryCheck, a),
    };
    let cfg = ExperimentConfig::load(&args.config)?;
    if cfg.command() != command {
        return Err(CliError::config(
            format!(
                "config is for `{}` but the subcommand is `{}`",
                cfg.command().name(),
                command.name()
            ),
            Some("command"),
        ));
    }
    let manifest = run(
        &cfg,
        &RunOptions {
            out_dir: args.out.clone(),
            jobs: args.jobs,
        },
    )?;
    for o in &manifest.outputs {
        println!("{}", args.out.join(&o.path).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
