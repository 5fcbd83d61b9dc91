//! CSV and JSON output of batch results.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::batch::BatchResults;
use crate::metrics::Metric;

pub const RUNS_HEADER: [&str; 9] = [
    "algorithm",
    "speed_mps",
    "run",
    "avg_bitrate_bps",
    "interruptions",
    "interruption_time_s",
    "resolution_changes",
    "avg_buffering_s",
    "startup_delay_s",
];
pub const AGGREGATE_HEADER: [&str; 6] = ["algorithm", "speed_mps", "metric", "mean", "ci95_halfwidth", "n"];
pub const FAILURES_HEADER: [&str; 5] = ["algorithm", "speed_mps", "run", "seed", "error"];

pub const RUNS_CSV: &str = "runs.csv";
pub const AGGREGATE_CSV: &str = "aggregate.csv";
pub const FAILURES_CSV: &str = "failures.csv";
pub const RESULTS_JSON: &str = "results.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            _ => Err(format!("unknown format `{s}` (csv | json | both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub algorithm: String,
    pub speed_mps: Option<f64>,
    pub run: usize,
    pub avg_bitrate_bps: Option<f64>,
    pub interruptions: u32,
    pub interruption_time_s: f64,
    pub resolution_changes: Option<u32>,
    pub avg_buffering_s: Option<f64>,
    pub startup_delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: String,
    pub speed_mps: Option<f64>,
    pub metric: String,
    pub mean: Option<f64>,
    pub ci95_halfwidth: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub algorithm: String,
    pub speed_mps: Option<f64>,
    pub run: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub runs: Vec<RunRow>,
    pub aggregate: Vec<AggregateRow>,
    pub failures: Vec<FailureRow>,
}

impl From<&BatchResults> for ResultsDocument {
    fn from(r: &BatchResults) -> Self {
        let runs = r
            .runs
            .iter()
            .map(|x| RunRow {
                algorithm: x.algorithm.name().into(),
                speed_mps: x.speed,
                run: x.run,
                avg_bitrate_bps: x.metrics.avg_bitrate,
                interruptions: x.metrics.interruptions,
                interruption_time_s: x.metrics.interruption_time,
                resolution_changes: x.metrics.resolution_changes,
                avg_buffering_s: x.metrics.avg_buffering,
                startup_delay_s: x.metrics.startup_delay,
            })
            .collect();
        let aggregate = r
            .aggregates
            .iter()
            .flat_map(|cell| {
                Metric::ALL.into_iter().map(move |m| {
                    let s = cell.aggregate.get(m);
                    AggregateRow {
                        algorithm: cell.algorithm.name().into(),
                        speed_mps: cell.speed,
                        metric: m.name().into(),
                        mean: s.map(|s| s.mean),
                        ci95_halfwidth: s.map(|s| s.ci_halfwidth),
                        n: s.map_or(0, |s| s.n),
                    }
                })
            })
            .collect();
        let failures = r
            .failures
            .iter()
            .map(|f| FailureRow {
                algorithm: f.algorithm.name().into(),
                speed_mps: f.speed,
                run: f.run,
                seed: f.seed,
                error: f.error.clone(),
            })
            .collect();
        ResultsDocument { runs, aggregate, failures }
    }
}

/// Shortest round-trip float text, `NA` when undefined.
fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:?}"))
}

fn int(v: Option<u32>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_csv_files(doc: &ResultsDocument, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let runs = dir.join(RUNS_CSV);
    write_csv(
        &runs,
        &RUNS_HEADER,
        doc.runs.iter().map(|r| {
            vec![
                r.algorithm.clone(),
                num(r.speed_mps),
                r.run.to_string(),
                num(r.avg_bitrate_bps),
                r.interruptions.to_string(),
                num(Some(r.interruption_time_s)),
                int(r.resolution_changes),
                num(r.avg_buffering_s),
                num(Some(r.startup_delay_s)),
            ]
        }),
    )?;
    let agg = dir.join(AGGREGATE_CSV);
    write_csv(
        &agg,
        &AGGREGATE_HEADER,
        doc.aggregate.iter().map(|a| {
            vec![
                a.algorithm.clone(),
                num(a.speed_mps),
                a.metric.clone(),
                num(a.mean),
                num(a.ci95_halfwidth),
                a.n.to_string(),
            ]
        }),
    )?;
    let mut written = vec![runs, agg];
    if !doc.failures.is_empty() {
        let fail = dir.join(FAILURES_CSV);
        write_csv(
            &fail,
            &FAILURES_HEADER,
            doc.failures.iter().map(|f| {
                vec![f.algorithm.clone(), num(f.speed_mps), f.run.to_string(), f.seed.to_string(), f.error.clone()]
            }),
        )?;
        written.push(fail);
    }
    Ok(written)
}

pub fn write_json(doc: &ResultsDocument, dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(RESULTS_JSON);
    let mut text = serde_json::to_string_pretty(doc).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

pub fn export(results: &BatchResults, format: Format, dir: &Path) -> io::Result<Vec<PathBuf>> {
    if results.runs.is_empty() && results.failures.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no results to export"));
    }
    let doc = ResultsDocument::from(results);
    let mut written = Vec::new();
    if matches!(format, Format::Csv | Format::Both) {
        written.extend(write_csv_files(&doc, dir)?);
    }
    if matches!(format, Format::Json | Format::Both) {
        written.push(write_json(&doc, dir)?);
    }
    Ok(written)
}

fn parse_opt<T: std::str::FromStr>(s: &str) -> Option<T> {
    if s == "NA" {
        None
    } else {
        s.parse().ok()
    }
}

/// Reads back a per-run CSV written by [`write_csv_files`].
pub fn read_runs_csv(path: &Path) -> io::Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let bad = |what: &str| io::Error::new(io::ErrorKind::InvalidData, format!("bad {what} field"));
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        out.push(RunRow {
            algorithm: f(0).to_string(),
            speed_mps: parse_opt(f(1)),
            run: f(2).parse().map_err(|_| bad("run"))?,
            avg_bitrate_bps: parse_opt(f(3)),
            interruptions: f(4).parse().map_err(|_| bad("interruptions"))?,
            interruption_time_s: f(5).parse().map_err(|_| bad("interruption_time_s"))?,
            resolution_changes: parse_opt(f(6)),
            avg_buffering_s: parse_opt(f(7)),
            startup_delay_s: f(8).parse().map_err(|_| bad("startup_delay_s"))?,
        });
    }
    Ok(out)
}

pub fn read_aggregate_csv(path: &Path) -> io::Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        out.push(AggregateRow {
            algorithm: f(0).to_string(),
            speed_mps: parse_opt(f(1)),
            metric: f(2).to_string(),
            mean: parse_opt(f(3)),
            ci95_halfwidth: parse_opt(f(4)),
            n: f(5).parse().map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "bad n field"))?,
        });
    }
    Ok(out)
}
