use crate::manifest::VideoManifest;

use super::fuzzy::{fuzzy_factor, FuzzyConfig};
use super::{windowed_throughput, Adapter, AdapterDecision, AdapterInputs};

/// Fuzzy-controller adaptation driven by buffering time and its change.
#[derive(Debug, Clone, Default)]
pub struct Fdash {
    cfg: FuzzyConfig,
}

impl Fdash {
    pub fn new(cfg: FuzzyConfig) -> Self {
        Self { cfg }
    }
}

impl Adapter for Fdash {
    fn name(&self) -> &'static str {
        "fdash"
    }

    fn decide(&mut self, inputs: &AdapterInputs<'_>) -> AdapterDecision {
        fdash_decide(inputs, &self.cfg)
    }
}

pub fn fdash_decide(inputs: &AdapterInputs<'_>, cfg: &FuzzyConfig) -> AdapterDecision {
    let manifest = inputs.manifest;
    let (Some(last), Ok(throughput)) =
        (inputs.last(), windowed_throughput(inputs.history, inputs.now, cfg.window, manifest))
    else {
        return inputs.decision(0);
    };
    let buffering = last.buffering_time;
    let change = match inputs.history {
        [.., prev, _] => buffering - prev.buffering_time,
        _ => 0.0,
    };
    let candidate = fuzzy_factor(buffering, change, cfg) * throughput;
    let proposed = manifest.quantize_to_ladder(candidate);
    inputs.decision(hysteresis(inputs.current_rep, proposed, throughput, buffering, manifest, cfg))
}

/// Lowest buffering time over the horizon when fetching at `bitrate`, under a
/// linear projection from the current throughput estimate.
fn projected_min(buffering: f64, throughput: f64, bitrate: f64, horizon: f64) -> f64 {
    let slope = throughput / bitrate - 1.0;
    buffering.min(buffering + horizon * slope)
}

/// Suppresses a switch when the projected buffer contradicts it: an
/// up-switch that would take the buffer below target, or a down-switch when
/// the current rate already keeps it at or above target.
pub fn hysteresis(
    current: usize,
    proposed: usize,
    throughput: f64,
    buffering: f64,
    manifest: &VideoManifest,
    cfg: &FuzzyConfig,
) -> usize {
    let rate = |i: usize| manifest.ladder()[i].bitrate;
    let keep = if proposed > current {
        projected_min(buffering, throughput, rate(proposed), cfg.horizon) < cfg.target
    } else if proposed < current {
        projected_min(buffering, throughput, rate(current), cfg.horizon) >= cfg.target
    } else {
        true
    };
    if keep {
        current
    } else {
        proposed
    }
}
