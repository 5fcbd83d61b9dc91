//! Seeded batch execution over algorithm x speed x run cells.
//!
//! Run `r` of every cell uses seed `base_seed + r` for its channel, so all
//! algorithms at a given speed face the same realized channel.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::abr::Algorithm;
use crate::config::{Scenario, ScenarioChannel};
use crate::engine::{run_session, SessionTrace};
use crate::error::Result;
use crate::channel::PiecewiseTrace;
use crate::metrics::{aggregate, compute_metrics, Aggregate, QoEMetrics};

/// How batch jobs are scheduled. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: Algorithm,
    /// `None` for trace-driven channels.
    pub speed: Option<f64>,
    pub run: usize,
    pub seed: u64,
    pub metrics: QoEMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellAggregate {
    pub algorithm: Algorithm,
    pub speed: Option<f64>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub algorithm: Algorithm,
    pub speed: Option<f64>,
    pub run: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchResults {
    pub runs: Vec<RunResult>,
    pub aggregates: Vec<CellAggregate>,
    pub failures: Vec<RunFailure>,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    algorithm: Algorithm,
    speed: Option<f64>,
    run: usize,
    seed: u64,
}

impl Scenario {
    pub fn seed_for(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    fn speeds(&self) -> Vec<Option<f64>> {
        match &self.channel {
            ScenarioChannel::Trace(_) => vec![None],
            ScenarioChannel::Markov { speeds, .. } => speeds.iter().copied().map(Some).collect(),
        }
    }

    /// The channel faced by run `run` at `speed`.
    pub fn realize_channel(&self, speed: Option<f64>, run: usize) -> Result<PiecewiseTrace> {
        match (&self.channel, speed) {
            (ScenarioChannel::Markov { model, .. }, Some(v)) => {
                model.with_speed(v)?.with_seed(self.seed_for(run)).realize(self.session.duration_limit)
            }
            (ScenarioChannel::Markov { model, .. }, None) => {
                model.with_seed(self.seed_for(run)).realize(self.session.duration_limit)
            }
            (ScenarioChannel::Trace(t), _) => Ok(t.clone()),
        }
    }

    /// Simulates one session and returns its full trace.
    pub fn run_one(&self, algorithm: Algorithm, speed: Option<f64>, run: usize) -> Result<SessionTrace> {
        let channel = self.realize_channel(speed, run)?;
        let mut adapter = self.configs.build(algorithm);
        let mut trace = run_session(&self.manifest, &channel, adapter.as_mut(), &self.session)?;
        if speed.is_some() {
            trace.seed = Some(self.seed_for(run));
        }
        Ok(trace)
    }
}

pub fn run_batch(scenario: &Scenario) -> BatchResults {
    run_batch_with(scenario, Execution::default())
}

pub fn run_batch_with(scenario: &Scenario, execution: Execution) -> BatchResults {
    let mut jobs = Vec::new();
    for &algorithm in &scenario.algorithms {
        for speed in scenario.speeds() {
            for run in 0..scenario.iterations {
                jobs.push(Job { algorithm, speed, run, seed: scenario.seed_for(run) });
            }
        }
    }

    let simulate = |job: &Job| -> Result<QoEMetrics> {
        compute_metrics(&scenario.run_one(job.algorithm, job.speed, job.run)?)
    };
    let outcomes: Vec<Result<QoEMetrics>> = match execution {
        Execution::Sequential => jobs.iter().map(simulate).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => jobs.par_iter().map(simulate).collect(),
    };

    let mut results = BatchResults::default();
    for (job, outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(metrics) => results.runs.push(RunResult {
                algorithm: job.algorithm,
                speed: job.speed,
                run: job.run,
                seed: job.seed,
                metrics,
            }),
            Err(e) => results.failures.push(RunFailure {
                algorithm: job.algorithm,
                speed: job.speed,
                run: job.run,
                seed: job.seed,
                error: e.to_string(),
            }),
        }
    }

    for &algorithm in &scenario.algorithms {
        for speed in scenario.speeds() {
            let cell: Vec<QoEMetrics> = results
                .runs
                .iter()
                .filter(|r| r.algorithm == algorithm && r.speed == speed)
                .map(|r| r.metrics)
                .collect();
            if let Ok(aggregate) = aggregate(&cell) {
                results.aggregates.push(CellAggregate { algorithm, speed, aggregate });
            }
        }
    }
    results
}
