use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dwz_cli::{run, CliError, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "dwz",
    version,
    about = "Uplink base-station cooperation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate CDF per backhaul budget
    Cdf(RunArgs),
    /// Rate quantiles against the number of cooperative BSs
    VsBs(RunArgs),
    /// Outage rate of optimal compression against uniform quantization
    CompareQuant(RunArgs),
    /// Expected sum-rate against the number of users
    SumrateUsers(RunArgs),
    /// Two-user rate regions
    Region(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration; defaults apply to missing fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overrides the configuration
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; the JSON sidecar is written next to it
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs, experiment: Experiment) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.experiment = experiment;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_path.clone())
        .ok_or_else(|| CliError::Config("no output path: pass --out or set output_path".into()))?;
    cfg.output_path = Some(out.clone());
    cfg.validate()?;
    Ok((cfg, out))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (args, experiment) = match &cli.command {
        Command::Cdf(a) => (a, Experiment::Cdf),
        Command::VsBs(a) => (a, Experiment::VsBsCount),
        Command::CompareQuant(a) => (a, Experiment::CompareQuantization),
        Command::SumrateUsers(a) => (a, Experiment::SumrateVsUsers),
        Command::Region(a) => (a, Experiment::Region),
    };
    let (cfg, out) = match load(args, experiment) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("dwz: {e}");
            return ExitCode::from(1);
        }
    };
    let result = run(&cfg).and_then(|output| output.write(&out).map(|sidecar| (output, sidecar)));
    match result {
        Ok((output, sidecar)) => {
            eprintln!(
                "dwz: wrote {} and {} ({} trials, {} failed)",
                out.display(),
                sidecar.display(),
                output.sidecar.trials_completed,
                output.failures()
            );
            if output.failures() > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("dwz: {e}");
            ExitCode::from(1)
        }
    }
}
