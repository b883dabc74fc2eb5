use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use log::error;

use flowmap_fsi::diagnostics::{read_trace, trace_difference};
use flowmap_fsi::driver::{run, Method, ScenarioConfig, SimConfig, CATALOG};
use flowmap_fsi::SimError;

/// Thread count override for the data-parallel stages.
const THREADS_ENV: &str = "FLOWMAP_FSI_THREADS";

#[derive(Parser)]
#[command(name = "flowmap-fsi", version, about = "2D flow-map fluid simulator with elastic solid coupling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Frames to write after the initial one.
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// pfm, apic_midpoint, euler_sl or direct_hfmc.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dump_grids: bool,
    },
    /// Inspect the built-in scene catalog.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Compare two trace files column by column.
    DiffTrace {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Names and descriptions.
    List,
    /// Print a complete default config for one scene.
    Show { name: String },
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<SimError>() {
        Some(SimError::Config { .. }) | Some(SimError::MeshParse { .. }) => 2,
        Some(s) if s.is_numerical() => 3,
        _ => 1,
    }
}

fn simulate(
    config: PathBuf,
    frames: Option<usize>,
    output: Option<PathBuf>,
    method: Option<String>,
    seed: Option<u64>,
    dump_grids: bool,
) -> anyhow::Result<()> {
    let mut cfg = SimConfig::load(&config)?;
    if let Some(f) = frames {
        cfg.output.frames = f;
    }
    if let Some(o) = output {
        cfg.output.directory = o;
    }
    if let Some(m) = method {
        cfg.method = Method::parse(&m).ok_or_else(|| SimError::config("method", format!("unknown method '{m}'")))?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if dump_grids {
        cfg.output.dump_grids = true;
    }
    cfg.validate()?;
    let summary = run(cfg)?;
    println!(
        "{} steps, {} frames, t = {:.6}, trace {}",
        summary.steps,
        summary.frames,
        summary.time,
        summary.trace_path.display()
    );
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            config,
            frames,
            output,
            method,
            seed,
            dump_grids,
        } => simulate(config, frames, output, method, seed, dump_grids)?,
        Command::Scenarios { action } => match action {
            ScenarioAction::List => {
                for (name, about) in CATALOG {
                    println!("{name:<24} {about}");
                }
            }
            ScenarioAction::Show { name } => {
                let scene = ScenarioConfig::by_name(&name)
                    .ok_or_else(|| SimError::config("scenario.name", format!("unknown scenario '{name}'")))?;
                print!("{}", SimConfig::for_scenario(scene).to_toml());
            }
        },
        Command::DiffTrace { a, b, tol } => {
            let ta = read_trace(&a)?;
            let tb = read_trace(&b)?;
            match trace_difference(&ta, &tb) {
                None => {
                    println!("row counts differ: {} vs {}", ta.len(), tb.len());
                    return Ok(ExitCode::from(1));
                }
                Some(d) if d > tol => {
                    println!("max difference {d:e} exceeds {tol:e}");
                    return Ok(ExitCode::from(1));
                }
                Some(d) => println!("max difference {d:e} within {tol:e}"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Ok(n) = std::env::var(THREADS_ENV) {
        let threads = n
            .parse::<usize>()
            .with_context(|| format!("{THREADS_ENV}={n} is not a thread count"))
            .and_then(|t| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .context("thread pool setup")
            });
        if let Err(e) = threads {
            error!("{e:#}");
            return ExitCode::from(2);
        }
    }
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
