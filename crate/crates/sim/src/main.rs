use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metaprism_sim::experiments;
use metaprism_sim::output::Table;
use metaprism_sim::scenario::ProfileKind;
use metaprism_sim::{Result, Scenario, SimError};

#[derive(Parser, Debug)]
#[command(name = "metaprism", version, about = "Wideband metaprism link simulator")]
struct Cli {
    /// Scenario file (TOML). Defaults are used when omitted.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output CSV path; stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the metaprism phase profile.
    #[arg(long, global = true, value_enum)]
    profile: Option<ProfileKind>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SNR over the receiver region.
    SnrMap,
    /// Path loss of each profile along the region ray.
    PlSweep,
    /// Mean per-user rate against the number of users.
    RateSweep {
        #[arg(long, value_delimiter = ',')]
        users: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Normalized array factor per subcarrier.
    ArrayFactor,
    /// Per-cell LC loads for the configured profile.
    LcExport,
    /// Subcarrier assignment for one random draw of users.
    Assign {
        #[arg(long, default_value_t = 10)]
        users: usize,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut scenario = match &cli.scenario {
        Some(path) => Scenario::load(path)?,
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    if let Some(profile) = cli.profile {
        scenario.metaprism.profile = profile;
    }
    if let Command::RateSweep { users, trials } = &cli.command {
        if let Some(u) = users {
            scenario.rate_sweep.users = u.clone();
        }
        if let Some(t) = trials {
            scenario.rate_sweep.trials = *t;
        }
    }
    scenario.validate()?;
    log::info!("scenario {}", scenario.hash());

    let table: Table = match cli.command {
        Command::SnrMap => experiments::run_snr_map(&scenario)?,
        Command::PlSweep => experiments::run_pl_sweep(&scenario)?,
        Command::RateSweep { .. } => experiments::run_rate_sweep(&scenario)?,
        Command::ArrayFactor => experiments::run_array_factor(&scenario)?,
        Command::LcExport => experiments::run_lc_export(&scenario)?,
        Command::Assign { users } => experiments::run_assignment(&scenario, users)?,
    };
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(&mut w)?;
            w.flush()?;
        }
        None => table.write(io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn broken_pipe(e: &SimError) -> bool {
    match e {
        SimError::Io(e) => e.kind() == io::ErrorKind::BrokenPipe,
        SimError::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(e) if e.kind() == io::ErrorKind::BrokenPipe),
        _ => false,
    }
}

fn report(e: &SimError) -> ExitCode {
    if broken_pipe(e) {
        return ExitCode::SUCCESS;
    }
    let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{line}");
    ExitCode::FAILURE
}
