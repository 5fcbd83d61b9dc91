//! The FDASH fuzzy controller.
//!
//! Two inputs, both scaled by the target buffering time `T`:
//!
//! | buffering time `t` | shape |
//! |---|---|
//! | short | 1 on `[0, 2T/3]`, falling to 0 at `T` |
//! | close | triangle `2T/3 .. T .. 4T` |
//! | long  | 0 at `T`, rising to 1 at `4T` |
//!
//! | change `dt` | shape |
//! |---|---|
//! | falling | 1 below `-2T/3`, down to 0 at 0 |
//! | steady  | triangle `-2T/3 .. 0 .. 4T` |
//! | rising  | 0 at 0, 1 from `4T` |
//!
//! Rule strength is the min of the two memberships and the output is the
//! strength-weighted average of the rule weights.

use crate::error::{Error, Result};

use super::positive;

/// Output weights, in order: reduce, small reduce, no change, small increase, increase.
pub const DEFAULT_WEIGHTS: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 2.0];
pub const DEFAULT_TARGET_S: f64 = 35.0;
pub const DEFAULT_WINDOW_S: f64 = 10.0;
pub const DEFAULT_HORIZON_S: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyConfig {
    pub target: f64,
    pub window: f64,
    pub horizon: f64,
    pub weights: [f64; 5],
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        Self { target: DEFAULT_TARGET_S, window: DEFAULT_WINDOW_S, horizon: DEFAULT_HORIZON_S, weights: DEFAULT_WEIGHTS }
    }
}

impl FuzzyConfig {
    pub fn validate(&self) -> Result<()> {
        positive("fdash.target_s", self.target)?;
        positive("fdash.window_s", self.window)?;
        positive("fdash.horizon_s", self.horizon)?;
        if self.weights.windows(2).any(|w| !(w[0] < w[1])) || !(self.weights[0] > 0.0) {
            return Err(Error::Config(format!("fdash.weights must be positive and strictly increasing: {:?}", self.weights)));
        }
        Ok(())
    }
}

// Rule table rows: buffering short/close/long; columns: falling/steady/rising.
// Entries index into the weight list.
const RULES: [[usize; 3]; 3] = [[0, 1, 2], [1, 2, 3], [2, 3, 4]];

/// 0 at or below `a`, 1 at or above `b`.
fn ramp_up(x: f64, a: f64, b: f64) -> f64 {
    ((x - a) / (b - a)).clamp(0.0, 1.0)
}

fn triangle(x: f64, a: f64, peak: f64, c: f64) -> f64 {
    if x <= a || x >= c {
        0.0
    } else if x <= peak {
        (x - a) / (peak - a)
    } else {
        (c - x) / (c - peak)
    }
}

fn buffering_sets(t: f64, target: f64) -> [f64; 3] {
    let lo = 2.0 * target / 3.0;
    let hi = 4.0 * target;
    [1.0 - ramp_up(t, lo, target), triangle(t, lo, target, hi), ramp_up(t, target, hi)]
}

fn change_sets(dt: f64, target: f64) -> [f64; 3] {
    let lo = -2.0 * target / 3.0;
    let hi = 4.0 * target;
    [1.0 - ramp_up(dt, lo, 0.0), triangle(dt, lo, 0.0, hi), ramp_up(dt, 0.0, hi)]
}

/// Increase/decrease factor applied to the throughput estimate.
pub fn fuzzy_factor(buffering: f64, change: f64, cfg: &FuzzyConfig) -> f64 {
    let t = buffering_sets(buffering, cfg.target);
    let d = change_sets(change, cfg.target);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &mt) in t.iter().enumerate() {
        for (j, &md) in d.iter().enumerate() {
            let strength = mt.min(md);
            num += strength * cfg.weights[RULES[i][j]];
            den += strength;
        }
    }
    // both partitions sum to 1 everywhere, so some rule always fires
    num / den
}
