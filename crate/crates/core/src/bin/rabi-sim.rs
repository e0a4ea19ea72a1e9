use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rabi_sim::experiment::{run_single, run_sweep, run_validate, run_wigner, Command, ExperimentPlan, Format};
use rabi_sim::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Sweep,
    Wigner,
    Validate,
    Single,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

/// Heralded Rabi-interaction simulations: sweeps, Wigner grids, self-checks.
#[derive(Debug, Parser)]
#[command(name = "rabi-sim", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML plan; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a plan entry, e.g. `--set setup.kappa=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Fmt>,
}

fn load(cli: &Cli, command: Command) -> rabi_sim::Result<ExperimentPlan> {
    let mut plan = match &cli.config {
        Some(path) => ExperimentPlan::load(path, &cli.set)?,
        None => ExperimentPlan::from_toml("", &cli.set)?,
    };
    plan.check_command(command)?;
    if let Some(out) = &cli.out {
        plan.out = out.clone();
    }
    if let Some(f) = cli.format {
        plan.format = match f {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
        };
    }
    Ok(plan)
}

fn exit_for(err: &Error) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

fn execute(command: Command, plan: &ExperimentPlan) -> rabi_sim::Result<u8> {
    match command {
        Command::Sweep => {
            let (path, rows) = run_sweep(plan)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            println!("{} ({} rows, {failed} failed)", path.display(), rows.len());
        }
        Command::Wigner => {
            let summary = run_wigner(plan)?;
            for s in &summary {
                match (&s.file, &s.error) {
                    (Some(f), _) => println!("{f} min {:e}", s.min.unwrap_or(f64::NAN)),
                    (None, Some(e)) => println!("{:?} {}: {e}", s.process, s.projection),
                    _ => {}
                }
            }
        }
        Command::Validate => {
            let (path, report) = run_validate(plan)?;
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("{}", path.display());
            return Ok(if report.passed { 0 } else { 1 });
        }
        Command::Single => {
            let (path, report) = run_single(plan)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            println!("{}", path.display());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Sweep => Command::Sweep,
        Cmd::Wigner => Command::Wigner,
        Cmd::Validate => Command::Validate,
        Cmd::Single => Command::Single,
    };
    let result = load(&cli, command).and_then(|plan| execute(command, &plan));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("rabi-sim: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}
