use crate::error::{Error, Result};

use super::fuzzy::{DEFAULT_TARGET_S, DEFAULT_WINDOW_S};
use super::{positive, windowed_throughput, Adapter, AdapterDecision, AdapterInputs};

/// Buffer thresholds (seconds) and throughput safety margin.
#[derive(Debug, Clone, PartialEq)]
pub struct AaashConfig {
    pub b_min: f64,
    pub b_low: f64,
    pub b_high: f64,
    pub b_max: f64,
    pub safety: f64,
    pub window: f64,
}

impl AaashConfig {
    pub fn from_target(target: f64) -> Self {
        Self {
            b_min: 0.3 * target,
            b_low: 0.6 * target,
            b_high: target,
            b_max: 1.5 * target,
            safety: 0.9,
            window: DEFAULT_WINDOW_S,
        }
    }

    pub fn retarget(&mut self, target: f64) {
        *self = Self { safety: self.safety, window: self.window, ..Self::from_target(target) };
    }

    pub fn validate(&self) -> Result<()> {
        positive("aaash.b_min_s", self.b_min)?;
        positive("aaash.safety", self.safety)?;
        positive("aaash.window_s", self.window)?;
        if !(self.b_min <= self.b_low && self.b_low <= self.b_high && self.b_high <= self.b_max) {
            return Err(Error::Config("aaash thresholds must satisfy b_min <= b_low <= b_high <= b_max".into()));
        }
        Ok(())
    }
}

impl Default for AaashConfig {
    fn default() -> Self {
        Self::from_target(DEFAULT_TARGET_S)
    }
}

/// Buffer-threshold policy: panic to the bottom on a near-empty buffer, move
/// one level at a time outside the hold band.
#[derive(Debug, Clone, Default)]
pub struct Aaash {
    cfg: AaashConfig,
}

impl Aaash {
    pub fn new(cfg: AaashConfig) -> Self {
        Self { cfg }
    }
}

impl Adapter for Aaash {
    fn name(&self) -> &'static str {
        "aaash"
    }

    fn decide(&mut self, inputs: &AdapterInputs<'_>) -> AdapterDecision {
        let cfg = &self.cfg;
        let Ok(throughput) = windowed_throughput(inputs.history, inputs.now, cfg.window, inputs.manifest) else {
            return inputs.decision(0);
        };
        let buffer = inputs.current_buffer;
        let current = inputs.current_rep;
        let rep = if buffer < cfg.b_min {
            0
        } else if buffer < cfg.b_low {
            if inputs.current_bitrate() > throughput {
                inputs.step_down()
            } else {
                current
            }
        } else if buffer <= cfg.b_high {
            current
        } else {
            let up = inputs.step_up();
            if inputs.manifest.ladder()[up].bitrate <= cfg.safety * throughput {
                up
            } else {
                current
            }
        };
        AdapterDecision { rep, earliest_request: inputs.defer_until_buffer(cfg.b_max) }
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::manifest::VideoManifest;

    #[test]
    fn panic_threshold() {
        let m = VideoManifest::default();
        let h = [seg_at_rate(0, 3, 10.0, 4e6, 2.0, &m)];
        assert_eq!(Aaash::default().decide(&inputs(&h, 2.0, &m)).rep, 0);
    }

    #[test]
    fn steps_up_above_high_threshold() {
        // next level 2.8M <= 0.9 * 4M
        let m = VideoManifest::default();
        let h = [seg_at_rate(0, 2, 10.0, 4e6, 38.0, &m)];
        let d = Aaash::default().decide(&inputs(&h, 40.0, &m));
        assert_eq!(d.rep, 3);
        assert_eq!(d.earliest_request, 10.0);
    }

    #[test]
    fn holds_in_band_and_defers_above_max() {
        let m = VideoManifest::default();
        let h = [seg_at_rate(0, 2, 10.0, 4e6, 25.0, &m)];
        assert_eq!(Aaash::default().decide(&inputs(&h, 25.0, &m)).rep, 2);
        let d = Aaash::default().decide(&inputs(&h, 60.0, &m));
        assert_eq!(d.earliest_request, 10.0 + (60.0 - 52.5));
    }

    #[test]
    fn low_band_steps_down_only_when_rate_exceeds_throughput() {
        let m = VideoManifest::default();
        let h = [seg_at_rate(0, 2, 10.0, 1e6, 15.0, &m)];
        assert_eq!(Aaash::default().decide(&inputs(&h, 15.0, &m)).rep, 1);
        let h = [seg_at_rate(0, 2, 10.0, 3e6, 15.0, &m)];
        assert_eq!(Aaash::default().decide(&inputs(&h, 15.0, &m)).rep, 2);
    }
}
