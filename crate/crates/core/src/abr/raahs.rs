use crate::error::Result;

use super::{positive, Adapter, AdapterDecision, AdapterInputs};

#[derive(Debug, Clone, PartialEq)]
pub struct RaahsConfig {
    /// Fetch-time ratio below which the client drops straight to the level
    /// the ratio supports.
    pub down_threshold: f64,
    pub b_max: f64,
}

impl Default for RaahsConfig {
    fn default() -> Self {
        Self { down_threshold: 0.67, b_max: 50.0 }
    }
}

impl RaahsConfig {
    pub fn validate(&self) -> Result<()> {
        positive("raahs.down_threshold", self.down_threshold)?;
        positive("raahs.b_max_s", self.b_max)
    }
}

/// Compares segment duration to the last fetch time: step up one level when
/// fetching is clearly faster than playback, jump down in one go when slower.
#[derive(Debug, Clone, Default)]
pub struct Raahs {
    cfg: RaahsConfig,
}

impl Raahs {
    pub fn new(cfg: RaahsConfig) -> Self {
        Self { cfg }
    }
}

impl Adapter for Raahs {
    fn name(&self) -> &'static str {
        "raahs"
    }

    fn decide(&mut self, inputs: &AdapterInputs<'_>) -> AdapterDecision {
        let Some(last) = inputs.last() else { return inputs.decision(0) };
        let ratio = inputs.manifest.segment_duration() / last.record.duration();
        let rep = ratio_switch(inputs, ratio, self.cfg.down_threshold);
        AdapterDecision { rep, earliest_request: inputs.defer_until_buffer(self.cfg.b_max) }
    }
}

/// Shared step-up / one-shot-down rule for fetch-time ratio algorithms.
pub(super) fn ratio_switch(inputs: &AdapterInputs<'_>, ratio: f64, down_below: f64) -> usize {
    let eps = inputs.manifest.max_step_ratio();
    if ratio > 1.0 + eps {
        inputs.step_up()
    } else if ratio < down_below {
        inputs.manifest.quantize_to_ladder(ratio * inputs.current_bitrate())
    } else {
        inputs.current_rep
    }
}
