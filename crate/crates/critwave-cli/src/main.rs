//! `critwave`: command line front end for the critwave lab.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use critwave::blowup_law::ReducedMode;

/// Bad user input detected by the front end itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Parser)]
#[command(name = "critwave", version, about = "Type-II blow-up lab for the 4-D energy-critical wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    J,
    B,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate Q, ΛQ, Φ, V, W and Γ on a geometric grid.
    Tabulate {
        #[arg(long, default_value_t = 50.0)]
        rmax: f64,
        #[arg(long, default_value_t = 2000)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the approximate profile at one value of b.
    Profile {
        #[arg(long)]
        b: f64,
        #[arg(long = "M", default_value_t = 10.0)]
        m: f64,
        #[arg(long, default_value_t = 4000)]
        nodes: usize,
        #[arg(long)]
        out: PathBuf,
        /// Header JSON destination; stdout when absent.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compute the unstable eigenpair of the linearized operator.
    Spectrum {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Index counts, Gram matrix and Hardy constants.
    Coercivity {
        #[arg(long)]
        out: PathBuf,
        /// CSV of U, Ũ, B⁻¹ψ and B⁻¹Φ.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Integrate the reduced modulation law.
    Blowup {
        #[arg(long)]
        b0: f64,
        #[arg(long, value_enum, default_value = "b")]
        mode: Mode,
        #[arg(long, default_value_t = 1e6)]
        s_max: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Toy two-mode dichotomy: bisect for a₊* and list the exits.
    Dichotomy {
        #[arg(long)]
        b0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full wave simulation, optionally bisecting for d₊*.
    Simulate {
        #[arg(long)]
        b0: Option<String>,
        /// A number, or `auto` to bisect.
        #[arg(long)]
        dplus: Option<String>,
        /// key=value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        nodes: Option<String>,
        #[arg(long)]
        cfl: Option<String>,
        #[arg(long = "M")]
        m: Option<String>,
        #[arg(long)]
        cadence: Option<String>,
        /// Extra `key=value` override; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Summary JSON destination; stdout when absent.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run every acceptance check and print the ledger.
    Report {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the full wave simulation checks.
        #[arg(long)]
        no_simulation: bool,
    },
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("CRITWAVE_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Invalid(format!("CRITWAVE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    match cli.command {
        Command::Tabulate { rmax, nodes, out } => commands::tabulate(rmax, nodes, out.as_deref()),
        Command::Profile { b, m, nodes, out, json } => commands::profile(b, m, nodes, &out, json.as_deref()),
        Command::Spectrum { out, json } => commands::spectrum(&out, json.as_deref()),
        Command::Coercivity { out, tables } => commands::coercivity(&out, tables.as_deref()),
        Command::Blowup { b0, mode, s_max, out, json } => {
            let mode = match mode {
                Mode::J => ReducedMode::J,
                Mode::B => ReducedMode::B,
            };
            commands::blowup(b0, mode, s_max, &out, json.as_deref())
        }
        Command::Dichotomy { b0, out } => commands::dichotomy(b0, out.as_deref()),
        Command::Simulate { b0, dplus, config, nodes, cfl, m, cadence, set, out, json } => {
            let mut overrides = Vec::new();
            for (k, v) in [("nodes", nodes), ("cfl", cfl), ("m", m), ("cadence", cadence)] {
                if let Some(v) = v {
                    overrides.push((k.to_string(), v));
                }
            }
            for kv in set {
                let (k, v) =
                    kv.split_once('=').ok_or_else(|| Invalid(format!("--set expects KEY=VALUE, got {kv:?}")))?;
                overrides.push((k.trim().to_string(), v.trim().to_string()));
            }
            commands::simulate(&commands::SimulateArgs { b0, dplus, config, overrides, out, json })
        }
        Command::Report { out, no_simulation } => commands::report(out.as_deref(), no_simulation),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Invalid>().is_some() {
        return 2;
    }
    match e.downcast_ref::<critwave::Error>() {
        Some(err) if err.is_validation() => 2,
        _ => 1,
    }
}

/// A closed downstream pipe (`critwave tabulate | head`) is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
