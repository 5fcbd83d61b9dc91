//! Video asset description: the representation ladder and segment timing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ladder used when a scenario does not declare one, in bits per second.
pub const DEFAULT_LADDER_BPS: [f64; 5] = [350_000.0, 700_000.0, 1_400_000.0, 2_800_000.0, 4_200_000.0];
pub const DEFAULT_SEGMENT_DURATION_S: f64 = 2.0;
/// 600 s of media, longer than the default 550 s session.
pub const DEFAULT_SEGMENT_COUNT: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub index: usize,
    pub bitrate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoManifest {
    segment_duration: f64,
    segment_count: usize,
    ladder: Vec<Representation>,
}

impl VideoManifest {
    pub fn new(segment_duration: f64, segment_count: usize, bitrates: &[f64]) -> Result<Self> {
        if !(segment_duration.is_finite() && segment_duration > 0.0) {
            return Err(Error::InvalidManifest(format!(
                "segment duration must be positive, got {segment_duration}"
            )));
        }
        if segment_count == 0 {
            return Err(Error::InvalidManifest("segment count must be at least 1".into()));
        }
        if bitrates.is_empty() {
            return Err(Error::InvalidManifest("ladder is empty".into()));
        }
        for (i, &b) in bitrates.iter().enumerate() {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidManifest(format!("bitrate at index {i} must be positive, got {b}")));
            }
            if i > 0 && b <= bitrates[i - 1] {
                return Err(Error::InvalidManifest(format!(
                    "ladder must be strictly ascending: {} then {b}",
                    bitrates[i - 1]
                )));
            }
        }
        let ladder = bitrates
            .iter()
            .enumerate()
            .map(|(index, &bitrate)| Representation { index, bitrate })
            .collect();
        Ok(Self { segment_duration, segment_count, ladder })
    }

    pub fn segment_duration(&self) -> f64 {
        self.segment_duration
    }

    pub fn segment_count(&self) -> usize {
        self.segment_count
    }

    pub fn ladder(&self) -> &[Representation] {
        &self.ladder
    }

    pub fn len(&self) -> usize {
        self.ladder.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ladder.is_empty()
    }

    pub fn top(&self) -> usize {
        self.ladder.len() - 1
    }

    pub fn bitrate(&self, rep: usize) -> Result<f64> {
        self.ladder
            .get(rep)
            .map(|r| r.bitrate)
            .ok_or(Error::IndexOutOfRange { index: rep, len: self.ladder.len() })
    }

    /// Size of one segment at `rep`, in bits.
    pub fn segment_size(&self, rep: usize) -> Result<f64> {
        Ok(self.bitrate(rep)? * self.segment_duration)
    }

    /// Highest representation whose bitrate does not exceed `candidate_rate`,
    /// or index 0 when none qualifies.
    pub fn quantize_to_ladder(&self, candidate_rate: f64) -> usize {
        // partition_point counts levels with bitrate <= candidate
        let admissible = self.ladder.partition_point(|r| r.bitrate <= candidate_rate);
        admissible.saturating_sub(1)
    }

    /// Largest relative gap between adjacent ladder levels, `(b[j+1] - b[j]) / b[j]`.
    /// Zero for a single-level ladder.
    pub fn max_step_ratio(&self) -> f64 {
        self.ladder
            .windows(2)
            .map(|w| (w[1].bitrate - w[0].bitrate) / w[0].bitrate)
            .fold(0.0, f64::max)
    }
}

impl Default for VideoManifest {
    fn default() -> Self {
        Self::new(DEFAULT_SEGMENT_DURATION_S, DEFAULT_SEGMENT_COUNT, &DEFAULT_LADDER_BPS)
            .expect("default manifest is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mbps(ladder: &[f64]) -> VideoManifest {
        let bps: Vec<f64> = ladder.iter().map(|m| m * 1e6).collect();
        VideoManifest::new(2.0, 10, &bps).unwrap()
    }

    #[test]
    fn segment_size_is_bitrate_times_duration() {
        let m = VideoManifest::new(2.0, 1, &[1_000_000.0]).unwrap();
        assert_eq!(m.segment_size(0).unwrap(), 2_000_000.0);
        let m = VideoManifest::new(0.5, 1, &[4_000_000.0]).unwrap();
        assert_eq!(m.segment_size(0).unwrap(), 2_000_000.0);
    }

    #[test]
    fn zero_bitrate_rejected() {
        assert!(matches!(VideoManifest::new(2.0, 1, &[0.0]), Err(Error::InvalidManifest(_))));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(VideoManifest::new(0.0, 1, &[1.0]).is_err());
        assert!(VideoManifest::new(2.0, 0, &[1.0]).is_err());
        assert!(VideoManifest::new(2.0, 1, &[]).is_err());
        assert!(VideoManifest::new(2.0, 1, &[2.0, 2.0]).is_err());
        assert!(VideoManifest::new(2.0, 1, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn out_of_range_index() {
        let m = mbps(&[1.0, 2.0]);
        assert_eq!(m.segment_size(2), Err(Error::IndexOutOfRange { index: 2, len: 2 }));
    }

    #[test]
    fn quantize_examples() {
        let m = mbps(&[1.0, 2.0, 4.0]);
        assert_eq!(m.quantize_to_ladder(3e6), 1);
        assert_eq!(m.quantize_to_ladder(0.5e6), 0);
        assert_eq!(m.quantize_to_ladder(4e6), 2);
        assert_eq!(m.quantize_to_ladder(0.0), 0);
        assert_eq!(m.quantize_to_ladder(1e12), 2);
    }

    #[test]
    fn step_ratio() {
        assert_eq!(mbps(&[1.0, 2.0, 4.0]).max_step_ratio(), 1.0);
        assert_eq!(mbps(&[1.0, 1.5, 2.0]).max_step_ratio(), 0.5);
        assert_eq!(mbps(&[1.0]).max_step_ratio(), 0.0);
    }

    proptest! {
        #[test]
        fn quantize_monotone_and_admissible(a in 0.0f64..6e6, b in 0.0f64..6e6) {
            let m = VideoManifest::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(m.quantize_to_ladder(lo) <= m.quantize_to_ladder(hi));
            if hi >= m.ladder()[0].bitrate {
                prop_assert!(m.bitrate(m.quantize_to_ladder(hi)).unwrap() <= hi);
            }
        }

        #[test]
        fn segment_size_linear(tau in 0.1f64..10.0, b in 1.0f64..1e7, k in 1.0f64..8.0) {
            let m1 = VideoManifest::new(tau, 1, &[b]).unwrap();
            let m2 = VideoManifest::new(tau * k, 1, &[b]).unwrap();
            let m3 = VideoManifest::new(tau, 1, &[b * k]).unwrap();
            let s = m1.segment_size(0).unwrap();
            prop_assert!((m2.segment_size(0).unwrap() - k * s).abs() <= 1e-9 * k * s);
            prop_assert!((m3.segment_size(0).unwrap() - k * s).abs() <= 1e-9 * k * s);
        }
    }
}
