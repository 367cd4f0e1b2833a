use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use hybridsim::butler::{synthesize_butler_stages, StageKind};
use hybridsim::config::{parse_config, to_toml_string, ScenarioConfig};
use hybridsim::output::{emit_results, RunManifest};
use hybridsim::{ArchitectureRegistry, Simulator};

/// Hybrid precoding simulator with loss-aware RF beamforming networks.
#[derive(Debug, Parser)]
#[command(name = "hybridsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the Monte Carlo sweep of a scenario and write CSV results.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realizations: Option<usize>,
        /// Worker threads; never changes the numerical output.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Print the static and dynamic loss of every configured architecture.
    Lossbudget { config: PathBuf },
    /// Verify the Butler stage factorization of an N-point DFT.
    ButlerCheck { n: usize },
    /// List registered architectures.
    Architectures,
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    realizations: Option<usize>,
    workers: usize,
) -> Result<()> {
    let mut cfg = load(config)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(r) = realizations {
        cfg.realizations = r;
    }
    cfg.validate()?;
    RunManifest::new(config, out, to_toml_string(&cfg)).write(out)?;
    let sim = Simulator::new(cfg, &ArchitectureRegistry::with_builtins())?;
    let table = sim.sweep(workers)?;
    for path in emit_results(&table, out)? {
        println!("wrote {}", path.display());
    }
    for label in table.labels() {
        let series = table.series(label);
        if let (Some(first), Some(last)) = (series.first(), series.last()) {
            println!(
                "{label:<24} SE {:.3} .. {:.3} bits/s/Hz over rho {} .. {} dB",
                first.sum_se, last.sum_se, first.rho_db, last.rho_db
            );
        }
    }
    Ok(())
}

fn lossbudget(config: &Path) -> Result<()> {
    let cfg = load(config)?;
    println!("profile: {} {:?}", cfg.profile_name, cfg.profile);
    let sim = Simulator::new(cfg, &ArchitectureRegistry::with_builtins())?;
    println!(
        "{:<24} {:>6} {:>12} {:>13} {:>11}",
        "architecture", "n_rf", "static_db", "dynamic_db", "total_db"
    );
    for e in &sim.entries {
        let net = e.transmitter.network();
        let s = net.static_loss_db();
        let d = net.dynamic_loss_db();
        println!(
            "{:<24} {:>6} {:>12.4} {:>13.4} {:>11.4}",
            e.label,
            e.transmitter.n_rf(),
            s,
            d,
            s + d
        );
    }
    Ok(())
}

fn butler_check(n: usize) -> Result<bool> {
    let f = synthesize_butler_stages(n)?;
    let err = f.max_error();
    println!(
        "N = {n}: {} hybrid stages, {} phase stages, max |product - DFT| = {err:e}",
        f.count(StageKind::HybridCoupler),
        f.count(StageKind::PhaseShift)
    );
    Ok(err < 1e-10)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            realizations,
            workers,
        } => run(&config, &out, seed, realizations, workers).map(|_| true),
        Command::Lossbudget { config } => lossbudget(&config).map(|_| true),
        Command::ButlerCheck { n } => butler_check(n),
        Command::Architectures => {
            for a in ArchitectureRegistry::with_builtins().iter() {
                println!("{:<20} {}", a.name(), a.description());
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
