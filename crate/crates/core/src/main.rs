use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use fdash_sim::batch::run_batch;
use fdash_sim::config::{load_config, Entry, Scenario};
use fdash_sim::export::{export, Format};

/// Simulate adaptive video streaming sessions and export QoE metrics.
#[derive(Debug, Parser)]
#[command(name = "fdash-sim", version)]
struct Cli {
    /// Scenario file (`key = value` lines under `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated algorithms: fdash, aaash, raahs, sftm, svaa, osmf.
    #[arg(long)]
    algorithm: Option<String>,
    /// Comma-separated vehicle speeds in m/s.
    #[arg(long)]
    speed: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Base seed; run r uses base + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Bandwidth trace file (`time_s rate_bps` per line); replaces the vehicular model.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// csv, json or both.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Extra `section.key=value` overrides, e.g. `fdash.target_s=30`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn flag(key: &str, value: String, origin: &str) -> Entry {
    Entry { key: key.to_string(), value, origin: origin.to_string(), base_dir: None }
}

fn scenario(cli: &Cli) -> fdash_sim::Result<Scenario> {
    let mut entries = match &cli.config {
        Some(path) => load_config(path)?,
        None => Vec::new(),
    };
    if let Some(a) = &cli.algorithm {
        entries.push(flag("scenario.algorithms", a.clone(), "--algorithm"));
    }
    if let Some(s) = &cli.speed {
        entries.push(flag("channel.speeds_mps", s.clone(), "--speed"));
    }
    if let Some(n) = cli.iterations {
        entries.push(flag("scenario.iterations", n.to_string(), "--iterations"));
    }
    if let Some(s) = cli.seed {
        entries.push(flag("scenario.base_seed", s.to_string(), "--seed"));
    }
    if let Some(t) = &cli.trace {
        entries.push(flag("channel.trace", t.display().to_string(), "--trace"));
    }
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| fdash_sim::Error::Config(format!("--set `{o}`: expected key=value")))?;
        entries.push(flag(k.trim(), v.trim().to_string(), "--set"));
    }
    Scenario::from_entries(&entries)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let scenario = match scenario(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let results = run_batch(&scenario);
    for f in &results.failures {
        eprintln!(
            "run failed: algorithm={} speed={} run={} seed={}: {}",
            f.algorithm,
            f.speed.map_or("NA".into(), |s| s.to_string()),
            f.run,
            f.seed,
            f.error
        );
    }
    match export(&results, cli.format, &cli.out_dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: cannot write results to {}: {e}", cli.out_dir.display());
            return ExitCode::from(2);
        }
    }
    if results.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
