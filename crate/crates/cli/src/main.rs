use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use outage_cli::{execute, CliError, Command, Override, THREADS_ENV};

/// Outage probability of opportunistic AF/DF relaying over log-normal
/// fading with imperfect channel estimation.
#[derive(Parser)]
#[command(name = "relay-outage", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form outage over the P/N0 range.
    Analytic(RunArgs),
    /// Monte Carlo outage over the P/N0 range.
    Simulate(RunArgs),
    /// Both engines over the P/N0 range, with gap columns.
    Compare(RunArgs),
    /// Vary the axis given in the scenario's [sweep] section.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Override a scenario value, e.g. --set network.rho=0.9 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; overrides output.path. Without either, writes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; overrides output.format.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let (command, args) = match cli.command {
        Cmd::Analytic(a) => (Command::Analytic, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Compare(a) => (Command::Compare, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    let mut overrides = Vec::with_capacity(args.set.len() + 2);
    for arg in &args.set {
        match Override::parse(arg) {
            Ok(o) => overrides.push(o),
            Err(e) => return fail(&e),
        }
    }
    if let Some(out) = &args.out {
        overrides.push(Override::string("output.path", &out.to_string_lossy()));
    }
    if let Some(format) = &args.format {
        overrides.push(Override::string("output.format", format));
    }

    let exec = match execute(command, &args.scenario, &overrides) {
        Ok(exec) => exec,
        Err(e) => return fail(&e),
    };
    if exec.out_path.is_none() {
        print!("{}", exec.body);
    }
    let curve = &exec.report.curve;
    for e in &curve.errors {
        eprintln!(
            "error: point {} = {}: {}",
            exec.report.metadata.axis_name(),
            e.axis_value,
            e.message
        );
    }
    if !curve.errors.is_empty() {
        return fail(&CliError::PointsFailed {
            failed: curve.errors.len(),
            total: curve.errors.len() + curve.points.len(),
        });
    }
    ExitCode::SUCCESS
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
