//! Per-session QoE metrics and their aggregation across seeded runs.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::engine::{SessionEvents, SessionTrace, StallKind};
use crate::error::{Error, Result};
use crate::manifest::VideoManifest;

/// Metrics of one session. Fields that are undefined when nothing was played
/// are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoEMetrics {
    pub avg_bitrate: Option<f64>,
    pub interruptions: u32,
    pub interruption_time: f64,
    pub resolution_changes: Option<u32>,
    pub avg_buffering: Option<f64>,
    pub startup_delay: f64,
    pub played_segments: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    AvgBitrate,
    Interruptions,
    InterruptionTime,
    ResolutionChanges,
    AvgBuffering,
    StartupDelay,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::AvgBitrate,
        Metric::Interruptions,
        Metric::InterruptionTime,
        Metric::ResolutionChanges,
        Metric::AvgBuffering,
        Metric::StartupDelay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AvgBitrate => "avg_bitrate_bps",
            Metric::Interruptions => "interruptions",
            Metric::InterruptionTime => "interruption_time_s",
            Metric::ResolutionChanges => "resolution_changes",
            Metric::AvgBuffering => "avg_buffering_s",
            Metric::StartupDelay => "startup_delay_s",
        }
    }
}

impl QoEMetrics {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::AvgBitrate => self.avg_bitrate,
            Metric::Interruptions => Some(self.interruptions as f64),
            Metric::InterruptionTime => Some(self.interruption_time),
            Metric::ResolutionChanges => self.resolution_changes.map(f64::from),
            Metric::AvgBuffering => self.avg_buffering,
            Metric::StartupDelay => Some(self.startup_delay),
        }
    }
}

pub fn compute_metrics(trace: &SessionTrace) -> Result<QoEMetrics> {
    compute_metrics_from_events(&trace.events, &trace.manifest)
}

/// Metrics over the played prefix of a session, from its event record.
pub fn compute_metrics_from_events(events: &SessionEvents, manifest: &VideoManifest) -> Result<QoEMetrics> {
    let mut reps = Vec::with_capacity(events.playback.len());
    for p in &events.playback {
        let d = events
            .downloads
            .iter()
            .find(|d| d.segment_index == p.segment_index)
            .ok_or(Error::EventLog { line: 0, msg: format!("segment {} played but never downloaded", p.segment_index) })?;
        reps.push(d.rep);
    }
    let played = reps.len();
    let mid: Vec<f64> = events
        .stalls
        .iter()
        .filter(|s| s.kind == StallKind::MidStream)
        .map(|s| s.duration())
        .collect();
    let startup_delay = events
        .stalls
        .iter()
        .filter(|s| s.kind == StallKind::Startup)
        .map(|s| s.duration())
        .sum();

    let (avg_bitrate, resolution_changes, avg_buffering) = if played == 0 {
        (None, None, None)
    } else {
        let mut total = 0.0;
        for &r in &reps {
            total += manifest.bitrate(r)?;
        }
        let changes = reps.windows(2).filter(|w| w[0] != w[1]).count() as u32;
        let buffering = events.playback.iter().map(|p| p.buffering_time).sum::<f64>() / played as f64;
        (Some(total / played as f64), Some(changes), Some(buffering))
    };

    Ok(QoEMetrics {
        avg_bitrate,
        interruptions: mid.len() as u32,
        interruption_time: mid.iter().sum(),
        resolution_changes,
        avg_buffering,
        startup_delay,
        played_segments: played,
    })
}

/// Sample mean with a two-sided 95% Student-t confidence halfwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Zero when `n == 1`, where the interval is undefined.
    pub ci_halfwidth: f64,
    pub n: usize,
}

impl Summary {
    pub fn is_degenerate(&self) -> bool {
        self.n < 2
    }
}

/// Quantile `p` of Student's t with `dof` degrees of freedom; the 95% CI
/// halfwidth uses `t_quantile(0.975, n - 1)`.
pub fn t_quantile(p: f64, dof: f64) -> f64 {
    StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom").inverse_cdf(p)
}

/// Input order does not affect the result: values are summed in sorted order.
pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok(Summary { mean, ci_halfwidth: 0.0, n });
    }
    let mut sq: Vec<f64> = sorted.iter().map(|v| (v - mean).powi(2)).collect();
    sq.sort_by(f64::total_cmp);
    let sd = (sq.iter().sum::<f64>() / (n - 1) as f64).sqrt();
    let ci_halfwidth = if sd == 0.0 { 0.0 } else { t_quantile(0.975, (n - 1) as f64) * sd / (n as f64).sqrt() };
    Ok(Summary { mean, ci_halfwidth, n })
}

/// Per-metric summaries for one scenario cell, in [`Metric::ALL`] order.
/// A metric undefined in every run has no summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub metrics: Vec<(Metric, Option<Summary>)>,
}

impl Aggregate {
    pub fn get(&self, metric: Metric) -> Option<Summary> {
        self.metrics.iter().find(|(m, _)| *m == metric).and_then(|(_, s)| *s)
    }
}

pub fn aggregate(runs: &[QoEMetrics]) -> Result<Aggregate> {
    if runs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let metrics = Metric::ALL
        .into_iter()
        .map(|m| {
            let values: Vec<f64> = runs.iter().filter_map(|r| r.get(m)).collect();
            (m, summarize(&values).ok())
        })
        .collect();
    Ok(Aggregate { runs: runs.len(), metrics })
}
