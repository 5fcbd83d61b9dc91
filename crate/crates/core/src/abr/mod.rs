//! Bitrate adaptation algorithms.
//!
//! Every algorithm sees the same [`AdapterInputs`] snapshot, taken when the
//! previous segment finishes downloading, and answers with the representation
//! of the next segment plus the earliest time it may be requested. Segment 0
//! is always fetched at the lowest level by the engine, before any adapter is
//! consulted.

mod aaash;
mod fdash;
pub mod fuzzy;
mod osmf;
mod raahs;
mod sftm;
mod svaa;

use std::fmt;
use std::str::FromStr;

use crate::engine::DownloadRecord;
use crate::error::{Error, Result};
use crate::manifest::VideoManifest;

pub use aaash::{Aaash, AaashConfig};
pub use fdash::{fdash_decide, hysteresis, Fdash};
pub use fuzzy::{fuzzy_factor, FuzzyConfig};
pub use osmf::{osmf_decide, Osmf};
pub use raahs::{Raahs, RaahsConfig};
pub use sftm::{Sftm, SftmConfig};
pub use svaa::{Svaa, SvaaConfig};

/// A finished download together with the time it waited before playing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletedSegment {
    pub record: DownloadRecord,
    pub buffering_time: f64,
}

pub struct AdapterInputs<'a> {
    pub now: f64,
    pub history: &'a [CompletedSegment],
    pub current_buffer: f64,
    pub current_rep: usize,
    pub manifest: &'a VideoManifest,
}

impl AdapterInputs<'_> {
    pub fn current_bitrate(&self) -> f64 {
        self.manifest.ladder()[self.current_rep].bitrate
    }

    pub fn last(&self) -> Option<&CompletedSegment> {
        self.history.last()
    }

    /// Request time at which the buffer will have drained down to `level`.
    pub fn defer_until_buffer(&self, level: f64) -> f64 {
        self.now + (self.current_buffer - level).max(0.0)
    }

    pub(crate) fn step_up(&self) -> usize {
        (self.current_rep + 1).min(self.manifest.top())
    }

    pub(crate) fn step_down(&self) -> usize {
        self.current_rep.saturating_sub(1)
    }

    pub(crate) fn decision(&self, rep: usize) -> AdapterDecision {
        AdapterDecision { rep, earliest_request: self.now }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdapterDecision {
    pub rep: usize,
    pub earliest_request: f64,
}

pub trait Adapter: Send {
    fn name(&self) -> &'static str;

    fn decide(&mut self, inputs: &AdapterInputs<'_>) -> AdapterDecision;

    /// Serialized internal state, for adapters that carry any between decisions.
    fn state(&self) -> Option<String> {
        None
    }
}

/// Throughput of one segment download: its media bits over its download time.
pub fn estimate_segment_throughput(record: &DownloadRecord, manifest: &VideoManifest) -> Result<f64> {
    let duration = record.end_time - record.begin_time;
    if !(duration > 0.0) {
        return Err(Error::DegenerateRecord(record.segment_index));
    }
    Ok(manifest.bitrate(record.rep)? * manifest.segment_duration() / duration)
}

/// Arithmetic mean of segment throughputs whose downloads ended in
/// `(now - window, now]`, falling back to the most recent segment when the
/// window is empty.
pub fn windowed_throughput(
    history: &[CompletedSegment],
    now: f64,
    window: f64,
    manifest: &VideoManifest,
) -> Result<f64> {
    let last = history.last().ok_or(Error::NoData)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for seg in history.iter().rev() {
        let end = seg.record.end_time;
        if end <= now - window {
            break;
        }
        if end <= now {
            sum += estimate_segment_throughput(&seg.record, manifest)?;
            count += 1;
        }
    }
    if count == 0 {
        return estimate_segment_throughput(&last.record, manifest);
    }
    Ok(sum / count as f64)
}

/// Always requests the same representation.
#[derive(Debug, Clone, Copy)]
pub struct FixedRep(pub usize);

impl Adapter for FixedRep {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn decide(&mut self, inputs: &AdapterInputs<'_>) -> AdapterDecision {
        inputs.decision(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Fdash,
    Aaash,
    Raahs,
    Sftm,
    Svaa,
    Osmf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] =
        [Algorithm::Fdash, Algorithm::Aaash, Algorithm::Raahs, Algorithm::Sftm, Algorithm::Svaa, Algorithm::Osmf];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fdash => "fdash",
            Algorithm::Aaash => "aaash",
            Algorithm::Raahs => "raahs",
            Algorithm::Sftm => "sftm",
            Algorithm::Svaa => "svaa",
            Algorithm::Osmf => "osmf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}` (expected one of fdash, aaash, raahs, sftm, svaa, osmf)")))
    }
}

/// Tunables for every algorithm, overridable by `<algorithm>.<key>` names.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlgorithmConfigs {
    pub fdash: FuzzyConfig,
    pub aaash: AaashConfig,
    pub raahs: RaahsConfig,
    pub sftm: SftmConfig,
    pub svaa: SvaaConfig,
}

impl AlgorithmConfigs {
    /// Applies one override such as `fdash.target_s = 30`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (alg, field) = key
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("`{key}` is not of the form <algorithm>.<key>")))?;
        let algorithm: Algorithm = alg.parse()?;
        let trimmed = value.trim();
        let num = || -> Result<f64> {
            trimmed.parse().map_err(|_| Error::Config(format!("`{key}`: `{value}` is not a number")))
        };
        let unknown = || Err(Error::Config(format!("unknown config key `{key}`")));
        match algorithm {
            Algorithm::Fdash => match field {
                "target_s" => self.fdash.target = num()?,
                "window_s" => self.fdash.window = num()?,
                "horizon_s" => self.fdash.horizon = num()?,
                "weights" => {
                    let w: Vec<f64> = parse_list(trimmed).map_err(|_| Error::Config(format!("`{key}`: bad list")))?;
                    self.fdash.weights = w
                        .try_into()
                        .map_err(|_| Error::Config(format!("`{key}` needs exactly 5 weights")))?;
                }
                _ => return unknown(),
            },
            Algorithm::Aaash => match field {
                "target_s" => self.aaash.retarget(num()?),
                "b_min_s" => self.aaash.b_min = num()?,
                "b_low_s" => self.aaash.b_low = num()?,
                "b_high_s" => self.aaash.b_high = num()?,
                "b_max_s" => self.aaash.b_max = num()?,
                "safety" => self.aaash.safety = num()?,
                "window_s" => self.aaash.window = num()?,
                _ => return unknown(),
            },
            Algorithm::Raahs => match field {
                "down_threshold" => self.raahs.down_threshold = num()?,
                "b_max_s" => self.raahs.b_max = num()?,
                _ => return unknown(),
            },
            Algorithm::Sftm => match field {
                "beta" => self.sftm.beta = num()?,
                "target_s" => self.sftm.target = num()?,
                _ => return unknown(),
            },
            Algorithm::Svaa => match field {
                "target_s" => self.svaa.retarget(num()?),
                "margin" => self.svaa.margin = num()?,
                "persistence" => {
                    self.svaa.persistence = trimmed
                        .parse()
                        .map_err(|_| Error::Config(format!("`{key}`: `{value}` is not a count")))?
                }
                "cap_s" => self.svaa.cap = num()?,
                "window_s" => self.svaa.window = num()?,
                _ => return unknown(),
            },
            Algorithm::Osmf => return unknown(),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.fdash.validate()?;
        self.aaash.validate()?;
        self.raahs.validate()?;
        self.sftm.validate()?;
        self.svaa.validate()
    }

    pub fn build(&self, algorithm: Algorithm) -> Box<dyn Adapter> {
        match algorithm {
            Algorithm::Fdash => Box::new(Fdash::new(self.fdash.clone())),
            Algorithm::Aaash => Box::new(Aaash::new(self.aaash.clone())),
            Algorithm::Raahs => Box::new(Raahs::new(self.raahs.clone())),
            Algorithm::Sftm => Box::new(Sftm::new(self.sftm.clone())),
            Algorithm::Svaa => Box::new(Svaa::new(self.svaa.clone())),
            Algorithm::Osmf => Box::new(Osmf),
        }
    }
}

pub(crate) fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    s.split(',').map(|x| x.trim().parse()).collect()
}

pub(crate) fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn segment_throughput_examples() {
        let m = VideoManifest::new(2.0, 10, &[1e6, 2e6]).unwrap();
        let r = seg(0, 1, 1.0, 1.0, 0.0, &m).record;
        assert_eq!(estimate_segment_throughput(&r, &m).unwrap(), 4e6);
        let r = seg(0, 0, 2.0, 2.0, 0.0, &m).record;
        assert_eq!(estimate_segment_throughput(&r, &m).unwrap(), 1e6);
        let r = seg(3, 0, 2.0, 0.0, 0.0, &m).record;
        assert_eq!(estimate_segment_throughput(&r, &m), Err(Error::DegenerateRecord(3)));
    }

    #[test]
    fn windowed_examples() {
        let m = small_ladder();
        let one = [seg_at_rate(0, 0, 5.0, 4e6, 0.0, &m)];
        assert_eq!(windowed_throughput(&one, 5.0, 10.0, &m).unwrap(), 4e6);
        let two = [seg_at_rate(0, 0, 5.0, 2e6, 0.0, &m), seg_at_rate(1, 0, 6.0, 4e6, 0.0, &m)];
        assert_eq!(windowed_throughput(&two, 6.0, 10.0, &m).unwrap(), 3e6);
        assert_eq!(windowed_throughput(&two, 100.0, 10.0, &m).unwrap(), 4e6);
        assert_eq!(windowed_throughput(&[], 0.0, 10.0, &m), Err(Error::NoData));
    }

    #[test]
    fn window_is_left_open() {
        let m = small_ladder();
        let h = [seg_at_rate(0, 0, 5.0, 1e6, 0.0, &m), seg_at_rate(1, 0, 15.0, 3e6, 0.0, &m)];
        // end_time 5 is exactly now - d and is excluded
        assert!((windowed_throughput(&h, 15.0, 10.0, &m).unwrap() - 3e6).abs() < 1e-6);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("pftm".parse::<Algorithm>().is_err());
    }

    #[test]
    fn config_overrides() {
        let mut c = AlgorithmConfigs::default();
        c.set("fdash.target_s", "30").unwrap();
        assert_eq!(c.fdash.target, 30.0);
        c.set("aaash.target_s", "20").unwrap();
        assert!((c.aaash.b_min - 6.0).abs() < 1e-12);
        c.set("svaa.persistence", "3").unwrap();
        assert_eq!(c.svaa.persistence, 3);
        c.set("fdash.weights", "0.2,0.6,1,1.4,1.8").unwrap();
        assert_eq!(c.fdash.weights[4], 1.8);
        assert!(c.set("fdash.bogus", "1").is_err());
        assert!(c.set("fdash.target_s", "abc").is_err());
        assert!(c.set("nope.target_s", "1").is_err());
        assert!(c.set("target_s", "1").is_err());
        c.set("fdash.weights", "2,1,1,1,1").unwrap();
        assert!(c.validate().is_err());
    }

    proptest! {
        #[test]
        fn throughput_times_duration_is_bits(rep in 0usize..5, duration in 1e-3f64..100.0, end in 100.0f64..1000.0) {
            let m = VideoManifest::default();
            let r = seg(0, rep, end, duration, 0.0, &m).record;
            let rate = estimate_segment_throughput(&r, &m).unwrap();
            let bits = m.segment_size(rep).unwrap();
            prop_assert!((rate * r.duration() - bits).abs() <= 1e-12 * bits);
        }

        #[test]
        fn every_adapter_returns_valid_decision(
            rates in proptest::collection::vec(1e5f64..1e7, 1..6),
            reps in proptest::collection::vec(0usize..5, 6),
            waits in proptest::collection::vec(0.0f64..80.0, 6),
            buffer in 0.0f64..80.0,
        ) {
            let m = VideoManifest::default();
            let mut end = 0.0;
            let history: Vec<CompletedSegment> = rates.iter().enumerate().map(|(i, &r)| {
                end += 2.0;
                seg_at_rate(i, reps[i], end + i as f64, r, waits[i], &m)
            }).collect();
            let inp = inputs(&history, buffer, &m);
            let cfgs = AlgorithmConfigs::default();
            for a in Algorithm::ALL {
                let mut adapter = cfgs.build(a);
                let d = adapter.decide(&inp);
                prop_assert!(d.rep < m.len(), "{}: {}", a, d.rep);
                prop_assert!(d.earliest_request >= inp.now);
            }
        }
    }
}
