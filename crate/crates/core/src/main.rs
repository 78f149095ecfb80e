use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use infomarket::commands::{
    cmd_all_states, cmd_classify, cmd_run, cmd_sweep, cmd_verify, load_config, write_payload,
    CmdError, CmdOutput,
};
use infomarket::config::{ExperimentConfig, Mode};

/// Exact simulator and analysis toolkit for iterated clearing-price
/// dynamics over Boolean securities.
#[derive(Parser)]
#[command(name = "infomarket", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the dynamics for one true state and write the trace JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output path (defaults to the config's `out`, then stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Round budget; defaults to 2^N, which always reaches equilibrium.
        #[arg(long)]
        max_rounds: Option<u32>,
    },
    /// Run every true state and write a JSON array of traces.
    AllStates {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep securities × priors; one CSV row per true state.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed for randomized priors.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker pool size (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Classify a security (and, when a prior is given, predict convergence).
    Classify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites: A1..A9 or `all`.
    Verify {
        /// Suite name; falls back to the config's `suite` field.
        suite: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(
    output: CmdOutput,
    out: Option<PathBuf>,
    cfg: Option<&ExperimentConfig>,
) -> Result<(), CmdError> {
    let out = out.or_else(|| cfg.and_then(|c| c.out.as_ref().map(PathBuf::from)));
    write_payload(&output.payload, out.as_deref())?;
    eprintln!("{}", output.summary);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode, CmdError> {
    match cli.command {
        Command::Run {
            config,
            out,
            max_rounds,
        } => {
            let cfg = load_config(&config)?;
            cfg.check_mode(Mode::Run)?;
            let output = cmd_run(&cfg, max_rounds)?;
            emit(output, out, Some(&cfg))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::AllStates { config, out } => {
            let cfg = load_config(&config)?;
            cfg.check_mode(Mode::AllStates)?;
            let output = cmd_all_states(&cfg)?;
            emit(output, out, Some(&cfg))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            out,
            seed,
            jobs,
        } => {
            let cfg = load_config(&config)?;
            cfg.check_mode(Mode::Sweep)?;
            let output = cmd_sweep(&cfg, seed, jobs)?;
            emit(output, out, Some(&cfg))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { config, out } => {
            let cfg = load_config(&config)?;
            cfg.check_mode(Mode::Classify)?;
            let output = cmd_classify(&cfg)?;
            emit(output, out, Some(&cfg))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, config, out } => {
            let cfg = config.map(|p| load_config(&p)).transpose()?;
            if let Some(cfg) = &cfg {
                cfg.check_mode(Mode::Verify)?;
            }
            let suite = suite
                .or_else(|| cfg.as_ref().and_then(|c| c.suite.clone()))
                .ok_or_else(|| {
                    CmdError::Schema("no suite given (positional argument or config 'suite')".into())
                })?;
            let (output, all_passed) = cmd_verify(&suite)?;
            emit(output, out, cfg.as_ref())?;
            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
