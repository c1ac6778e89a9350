use std::fs::File;
use std::io::{BufWriter, Write};

use clap::{Parser, Subcommand};

use dormantwalk_cli::acceptance;
use dormantwalk_cli::commands;
use dormantwalk_cli::config::{ExperimentConfig, Format, Overrides};
use dormantwalk_cli::record::ResultRecord;
use dormantwalk_cli::{exit_code, AcceptanceFailure};

#[derive(Parser)]
#[command(name = "dormantwalk", version, about = "Survival of a dormant walker among a moving trap")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo survival over a time grid
    Simulate(Overrides),
    /// Bracketing curves from the truncated master equation
    Exact(Overrides),
    /// Lattice Green kernels
    Green(Overrides),
    /// Clock probabilities and the regeneration-time law
    Renewal(Overrides),
    /// Long-time asymptotics of every dormancy model
    Asympt(Overrides),
    /// Exact survival against the asymptotic predictions
    Compare(Overrides),
    /// Run the acceptance suite
    Accept {
        /// Criteria to run (all when omitted)
        ids: Vec<u8>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn emit(rec: &ResultRecord, config: &ExperimentConfig) -> anyhow::Result<()> {
    let rec = if config.format == Format::Json { rec.clone().stamped() } else { rec.clone() };
    match &config.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            rec.write(config.format, &mut w)?;
            w.flush()?;
        }
        None => rec.write(config.format, std::io::stdout().lock())?,
    }
    Ok(())
}

fn accept(ids: &[u8], config: &ExperimentConfig) -> anyhow::Result<()> {
    let outcomes = acceptance::run_all(ids, |o| eprintln!("{o}"));
    let mut rec = ResultRecord::new("accept", config);
    for o in &outcomes {
        rec.push_result(format!("criterion_{}", o.id), if o.passed { 1.0 } else { 0.0 }, None);
    }
    if config.out.is_some() {
        emit(&rec, config)?;
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(AcceptanceFailure(failed).into())
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    type Cmd = fn(&ExperimentConfig) -> anyhow::Result<ResultRecord>;
    let (overrides, f): (&Overrides, Cmd) = match &cli.command {
        Command::Simulate(o) => (o, commands::cmd_simulate),
        Command::Exact(o) => (o, commands::cmd_exact),
        Command::Green(o) => (o, commands::cmd_green),
        Command::Renewal(o) => (o, commands::cmd_renewal),
        Command::Asympt(o) => (o, commands::cmd_asympt),
        Command::Compare(o) => (o, commands::cmd_compare),
        Command::Accept { ids, overrides } => return accept(ids, &overrides.resolve()?),
    };
    let config = overrides.resolve()?;
    emit(&f(&config)?, &config)
}

fn main() {
    if let Some(n) = std::env::var("DORMANTWALK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().ok();
    }
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(exit_code(&e));
    }
}
