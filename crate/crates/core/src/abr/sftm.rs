use crate::error::Result;

use super::fuzzy::DEFAULT_TARGET_S;
use super::raahs::ratio_switch;
use super::{positive, Adapter, AdapterDecision, AdapterInputs};

#[derive(Debug, Clone, PartialEq)]
pub struct SftmConfig {
    /// Seconds of expected fetch time granted per second of buffer above target.
    pub beta: f64,
    pub target: f64,
}

impl Default for SftmConfig {
    fn default() -> Self {
        Self { beta: 0.5, target: DEFAULT_TARGET_S }
    }
}

impl SftmConfig {
    pub fn validate(&self) -> Result<()> {
        positive("sftm.beta", self.beta)?;
        positive("sftm.target_s", self.target)
    }
}

/// Segment-fetch-time ratio with a buffer-aware expected fetch time.
#[derive(Debug, Clone, Default)]
pub struct Sftm {
    cfg: SftmConfig,
}

impl Sftm {
    pub fn new(cfg: SftmConfig) -> Self {
        Self { cfg }
    }

    fn expected_fetch_time(&self, tau: f64, buffering: f64) -> f64 {
        (tau + self.cfg.beta * (buffering - self.cfg.target)).clamp(tau / 2.0, 2.0 * tau)
    }
}

impl Adapter for Sftm {
    fn name(&self) -> &'static str {
        "sftm"
    }

    fn decide(&mut self, inputs: &AdapterInputs<'_>) -> AdapterDecision {
        let Some(last) = inputs.last() else { return inputs.decision(0) };
        let expected = self.expected_fetch_time(inputs.manifest.segment_duration(), last.buffering_time);
        let ratio = expected / last.record.duration();
        inputs.decision(ratio_switch(inputs, ratio, 1.0))
    }
}
