//! `fracnet`: run the fracture-network dissolution study from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fracnet_core::pipeline::{self, FeatureTable, StudyConfig, StudyReport};

#[derive(Parser)]
#[command(name = "fracnet", version, about = "Quartz dissolution in stochastic fracture networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and prune the network ensemble.
    Generate(Common),
    /// Write per-network feature tables and graph dumps.
    Features(Common),
    /// Run every (network, rate constant) simulation and build dataset.csv.
    Simulate(Common),
    /// Fit the random-forest models on dataset.csv.
    Train(Common),
    /// Render tables and plots from a trained study.
    Report(Common),
    /// simulate + train + report.
    All(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; desk defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides FRACNET_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides FRACNET_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(p) => StudyConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
            None => StudyConfig::desk(),
        };
        cfg.apply_env()?;
        if let Some(s) = self.seed {
            cfg.set("seed", &s.to_string())?;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Outcome {
    Ok,
    Partial,
}

fn setup_workers(n: usize) {
    #[cfg(feature = "parallel")]
    if n > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        log::warn!("built without the parallel feature; running on one thread");
    }
}

fn report_path(out: &Path) -> PathBuf {
    out.join("study_report.json")
}

fn simulate(cfg: &StudyConfig) -> Result<Outcome> {
    let s = pipeline::run_ensemble(cfg)?;
    println!(
        "{} networks ({} seeds skipped), {} simulations ({} reused, {} failed), {} rows -> {}",
        s.networks.len(),
        s.skipped_seeds.len(),
        s.simulations,
        s.reused,
        s.failures.len(),
        s.dataset_rows,
        s.dataset_path.display()
    );
    for f in &s.failures {
        eprintln!("failed: network {} k={:e}: {}", f.network_id, f.rate_constant, f.reason);
    }
    Ok(if s.failures.is_empty() { Outcome::Ok } else { Outcome::Partial })
}

fn train(cfg: &StudyConfig) -> Result<Outcome> {
    let path = cfg.out_dir.join("dataset.csv");
    let table = FeatureTable::read_csv(&path).with_context(|| format!("reading {}", path.display()))?;
    let report = pipeline::train_models(&table, cfg)?;
    std::fs::write(report_path(&cfg.out_dir), serde_json::to_string(&report)?)?;
    for m in &report.models {
        println!("{:<14} train {:.4}  test {:.4}  oob {:.4}", m.name, m.train_r2, m.test_r2, m.oob_score);
    }
    Ok(if report.skipped.is_empty() { Outcome::Ok } else { Outcome::Partial })
}

fn report(cfg: &StudyConfig) -> Result<Outcome> {
    let path = report_path(&cfg.out_dir);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let study: StudyReport = serde_json::from_str(&text)?;
    let files = pipeline::write_report(&study, &cfg.out_dir.join("report"))?;
    println!("{} report files in {}", files.len(), cfg.out_dir.join("report").display());
    Ok(Outcome::Ok)
}

fn run(cli: Cli) -> Result<Outcome> {
    let common = match &cli.command {
        Command::Generate(c)
        | Command::Features(c)
        | Command::Simulate(c)
        | Command::Train(c)
        | Command::Report(c)
        | Command::All(c) => c,
    };
    let cfg = common.config()?;
    setup_workers(cfg.workers);
    std::fs::create_dir_all(&cfg.out_dir)?;
    match cli.command {
        Command::Generate(_) => {
            let (records, _, skipped) = pipeline::generate_networks(&cfg)?;
            println!("{} networks generated, {} seeds skipped", records.len(), skipped.len());
            Ok(Outcome::Ok)
        }
        Command::Features(_) => {
            let records = pipeline::write_feature_tables(&cfg)?;
            println!("feature tables written for {} networks", records.len());
            Ok(Outcome::Ok)
        }
        Command::Simulate(_) => simulate(&cfg),
        Command::Train(_) => train(&cfg),
        Command::Report(_) => report(&cfg),
        Command::All(_) => {
            let a = simulate(&cfg)?;
            let b = train(&cfg)?;
            report(&cfg)?;
            Ok(match (a, b) {
                (Outcome::Ok, Outcome::Ok) => Outcome::Ok,
                _ => Outcome::Partial,
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
