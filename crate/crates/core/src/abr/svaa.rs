use crate::error::Result;

use super::fuzzy::{DEFAULT_TARGET_S, DEFAULT_WINDOW_S};
use super::{positive, windowed_throughput, Adapter, AdapterDecision, AdapterInputs};

#[derive(Debug, Clone, PartialEq)]
pub struct SvaaConfig {
    pub target: f64,
    pub margin: f64,
    pub persistence: u32,
    pub cap: f64,
    pub window: f64,
}

impl SvaaConfig {
    pub fn from_target(target: f64) -> Self {
        Self { target, margin: 0.1, persistence: 2, cap: 2.0 * target, window: DEFAULT_WINDOW_S }
    }

    pub fn retarget(&mut self, target: f64) {
        self.target = target;
        self.cap = 2.0 * target;
    }

    pub fn validate(&self) -> Result<()> {
        positive("svaa.target_s", self.target)?;
        positive("svaa.cap_s", self.cap)?;
        positive("svaa.window_s", self.window)?;
        if !(0.0..1.0).contains(&self.margin) {
            return Err(crate::error::Error::Config(format!("svaa.margin must be in [0, 1), got {}", self.margin)));
        }
        Ok(())
    }
}

impl Default for SvaaConfig {
    fn default() -> Self {
        Self::from_target(DEFAULT_TARGET_S)
    }
}

/// Buffered-video feedback: scales throughput by a buffer-dependent factor,
/// drops immediately, and climbs one level only after repeated evidence.
#[derive(Debug, Clone, Default)]
pub struct Svaa {
    cfg: SvaaConfig,
    up_streak: u32,
}

impl Svaa {
    pub fn new(cfg: SvaaConfig) -> Self {
        Self { cfg, up_streak: 0 }
    }

    fn buffer_gain(&self, buffered: f64) -> f64 {
        2.0 * buffered / (buffered + self.cfg.target)
    }
}

impl Adapter for Svaa {
    fn name(&self) -> &'static str {
        "svaa"
    }

    fn decide(&mut self, inputs: &AdapterInputs<'_>) -> AdapterDecision {
        let Ok(throughput) = windowed_throughput(inputs.history, inputs.now, self.cfg.window, inputs.manifest) else {
            self.up_streak = 0;
            return inputs.decision(0);
        };
        let goal = (1.0 - self.cfg.margin) * self.buffer_gain(inputs.current_buffer) * throughput;
        let current = inputs.current_rep;
        let supported = inputs.manifest.quantize_to_ladder(goal);
        let rep = if supported < current {
            self.up_streak = 0;
            supported
        } else {
            let up = inputs.step_up();
            if up > current && inputs.manifest.ladder()[up].bitrate <= goal {
                self.up_streak += 1;
                if self.up_streak >= self.cfg.persistence {
                    self.up_streak = 0;
                    up
                } else {
                    current
                }
            } else {
                self.up_streak = 0;
                current
            }
        };
        AdapterDecision { rep, earliest_request: inputs.defer_until_buffer(self.cfg.cap) }
    }

    fn state(&self) -> Option<String> {
        Some(format!("up_streak={}", self.up_streak))
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::manifest::VideoManifest;

    #[test]
    fn at_target_with_matching_throughput_steps_down() {
        // goal = 0.9 * 1 * 1.4M = 1.26M, no ladder point in (1.26M, 1.4M]
        let m = VideoManifest::default();
        let h = [seg_at_rate(0, 2, 10.0, 1.4e6, 35.0, &m)];
        assert_eq!(Svaa::default().decide(&inputs(&h, 35.0, &m)).rep, 1);
    }

    #[test]
    fn empty_buffer_collapses() {
        let m = VideoManifest::default();
        let h = [seg_at_rate(0, 4, 10.0, 10e6, 0.0, &m)];
        assert_eq!(Svaa::default().decide(&inputs(&h, 0.0, &m)).rep, 0);
    }

    #[test]
    fn up_switch_needs_persistence() {
        let m = VideoManifest::default();
        let fast = [seg_at_rate(0, 1, 10.0, 4e6, 35.0, &m)];
        let slow = [seg_at_rate(0, 1, 10.0, 0.8e6, 35.0, &m)];
        let mut s = Svaa::default();
        assert_eq!(s.decide(&inputs(&fast, 35.0, &m)).rep, 1);
        assert_eq!(s.state().unwrap(), "up_streak=1");
        assert_eq!(s.decide(&inputs(&slow, 35.0, &m)).rep, 1);
        assert_eq!(s.decide(&inputs(&fast, 35.0, &m)).rep, 1);
        assert_eq!(s.decide(&inputs(&fast, 35.0, &m)).rep, 2);
        assert_eq!(s.state().unwrap(), "up_streak=0");
    }

    #[test]
    fn defers_above_cap() {
        let m = VideoManifest::default();
        let h = [seg_at_rate(0, 1, 10.0, 4e6, 35.0, &m)];
        let d = Svaa::default().decide(&inputs(&h, 80.0, &m));
        assert_eq!(d.earliest_request, 20.0);
    }
}
