use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use naifs_lab::{catalog, load_config, runner, LabError, Mode};

#[derive(Parser)]
#[command(name = "naifs", version, about = "Topological pressure lab for nonautonomous iterated function systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Proxy tolerance, overriding the config and the default.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config in its own mode (a path or a bundled example name).
    Run { config: String },
    /// Run the theorem checks of a config.
    Verify { config: String },
    /// Run the resolution and scale sweep of a config.
    Sweep { config: String },
    /// List built-in maps, spaces, potentials, projections, checks or examples.
    List { kind: String },
}

fn execute(cli: Cli) -> Result<u8, LabError> {
    if let Some(k) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global()
            .map_err(|e| LabError::Config(format!("--workers: {e}")))?;
    }
    let (arg, mode) = match cli.command {
        Command::List { kind } => {
            print!("{}", catalog::list(&kind)?);
            return Ok(0);
        }
        Command::Run { config } => (config, None),
        Command::Verify { config } => (config, Some(Mode::Verify)),
        Command::Sweep { config } => (config, Some(Mode::Sweep)),
    };
    let mut config = load_config(&arg)?;
    runner::Overrides { seed: cli.seed, out: cli.out, tol: cli.tol }.apply(&mut config);
    let outcome = runner::run(&config, mode)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    for c in &outcome.curves {
        println!("estimate {} (limsup proxy {}) at eps {}", c.estimate, c.limsup_proxy, c.final_eps);
    }
    if !outcome.records.is_empty() {
        println!("{} reports, {} violated", outcome.records.len(), outcome.violated());
    }
    Ok(if outcome.violated() > 0 { 1 } else { 0 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NAIFS_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
