//! Bandwidth-over-time processes.
//!
//! Every channel is ultimately a [`PiecewiseTrace`]: a right-continuous step
//! function of time. The stochastic [`MarkovVehicularModel`] is realized into a
//! trace once per run, so the engine only ever integrates step functions.
//!
//! Path realization uses `Xoshiro256PlusPlus` seeded through SplitMix64
//! (`seed_from_u64`). Uniforms take the top 53 bits of `next_u64`, dwell times
//! are inverse-CDF exponentials `-mean * ln(1 - u)`, and each sojourn draws its
//! dwell time before its successor state.

use std::path::Path;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Step function of bandwidth. Each rate holds from its breakpoint until the
/// next one; the last rate holds forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseTrace {
    breakpoints: Vec<(f64, f64)>,
}

impl PiecewiseTrace {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(t0, _)) = breakpoints.first() else {
            return Err(Error::InvalidChannel("trace has no breakpoints".into()));
        };
        if t0 != 0.0 {
            return Err(Error::InvalidChannel(format!("first breakpoint must be at t=0, got {t0}")));
        }
        for (i, &(t, r)) in breakpoints.iter().enumerate() {
            if !t.is_finite() || !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidChannel(format!("breakpoint {i} ({t}, {r}) is invalid")));
            }
            if i > 0 && t <= breakpoints[i - 1].0 {
                return Err(Error::InvalidChannel(format!("breakpoint times must strictly increase at {i}")));
            }
        }
        if breakpoints.last().map(|&(_, r)| r) == Some(0.0) {
            return Err(Error::InvalidChannel("trace ends in an all-zero tail".into()));
        }
        Ok(Self { breakpoints })
    }

    pub fn constant(rate: f64) -> Result<Self> {
        Self::new(vec![(0.0, rate)])
    }

    /// Parses the `time_s rate_bps` text format. Blank lines and `#` comments
    /// are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::InvalidChannel(format!("trace line {}: {msg}: `{raw}`", lineno + 1));
            let mut fields = line.split_whitespace();
            let (Some(t), Some(r), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(bad("expected `time_s rate_bps`"));
            };
            let t: f64 = t.parse().map_err(|_| bad("bad time"))?;
            let r: f64 = r.parse().map_err(|_| bad("bad rate"))?;
            if let Some(&(prev, _)) = points.last() {
                if t <= prev {
                    return Err(bad("times must be strictly ascending"));
                }
            }
            points.push((t, r));
        }
        Self::new(points)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidChannel(format!("cannot read trace {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(t, r) in &self.breakpoints {
            out.push_str(&format!("{t:?} {r:?}\n"));
        }
        out
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    fn piece_index(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&(bt, _)| bt <= t) - 1
    }

    fn piece_end(&self, idx: usize) -> f64 {
        self.breakpoints.get(idx + 1).map_or(f64::INFINITY, |&(t, _)| t)
    }

    pub fn bandwidth_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(t));
        }
        Ok(self.breakpoints[self.piece_index(t)].1)
    }

    /// Bits deliverable over `[from, to]`.
    pub fn integral(&self, from: f64, to: f64) -> Result<f64> {
        if !(from >= 0.0) {
            return Err(Error::Domain(from));
        }
        if to <= from {
            return Ok(0.0);
        }
        let mut total = 0.0;
        let mut idx = self.piece_index(from);
        let mut t = from;
        while t < to {
            let end = self.piece_end(idx).min(to);
            total += self.breakpoints[idx].1 * (end - t);
            t = end;
            idx += 1;
        }
        Ok(total)
    }

    /// Duration needed to move `bits` starting at `start`.
    pub fn transfer_time(&self, bits: f64, start: f64) -> Result<f64> {
        if !(start >= 0.0) || !start.is_finite() {
            return Err(Error::Domain(start));
        }
        if !(bits > 0.0) || !bits.is_finite() {
            return Err(Error::InvalidChannel(format!("transfer size must be positive, got {bits}")));
        }
        let mut remaining = bits;
        let mut idx = self.piece_index(start);
        let mut t = start;
        loop {
            let rate = self.breakpoints[idx].1;
            let end = self.piece_end(idx);
            if end.is_infinite() {
                if rate <= 0.0 {
                    return Err(Error::NonTermination { bits, start });
                }
                return Ok(t + remaining / rate - start);
            }
            let capacity = rate * (end - t);
            if rate > 0.0 && capacity >= remaining {
                return Ok(t + remaining / rate - start);
            }
            remaining -= capacity;
            t = end;
            idx += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub label: String,
    pub rate: f64,
    /// Distance over which the state persists on average, in meters.
    pub coherence_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Handover {
    /// Distance between cell boundaries, in meters.
    pub interval_m: f64,
    pub outage_s: f64,
}

/// One stay in a chain state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sojourn {
    pub state: usize,
    pub start: f64,
    pub duration: f64,
}

/// Continuous-time Markov chain over bandwidth states, with dwell times that
/// shrink as the vehicle speeds up and periodic handover outages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovVehicularModel {
    states: Vec<ChannelState>,
    transitions: Vec<Vec<f64>>,
    speed: f64,
    handover: Option<Handover>,
    initial_state: usize,
    seed: u64,
}

/// Cell-edge crossings every 250 m (half the macro inter-site distance) with a
/// 2 s interruption covering handover and transport recovery.
pub const DEFAULT_HANDOVER: Handover = Handover { interval_m: 250.0, outage_s: 2.0 };
pub const DEFAULT_INITIAL_STATE: usize = 2;

pub fn default_vehicular_states() -> Vec<ChannelState> {
    [("outage", 0.0, 20.0), ("bad", 500_000.0, 50.0), ("mid", 2_000_000.0, 100.0), ("good", 6_000_000.0, 150.0)]
        .into_iter()
        .map(|(label, rate, coherence_length)| ChannelState { label: label.into(), rate, coherence_length })
        .collect()
}

/// Move to an adjacent state with equal probability, reflecting at both ends.
pub fn nearest_neighbor_transitions(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            match (i.checked_sub(1), (i + 1 < n).then_some(i + 1)) {
                (Some(lo), Some(hi)) => {
                    row[lo] = 0.5;
                    row[hi] = 0.5;
                }
                (Some(lo), None) => row[lo] = 1.0,
                (None, Some(hi)) => row[hi] = 1.0,
                (None, None) => row[i] = 1.0,
            }
            row
        })
        .collect()
}

impl MarkovVehicularModel {
    pub fn new(
        states: Vec<ChannelState>,
        transitions: Vec<Vec<f64>>,
        speed: f64,
        handover: Option<Handover>,
        initial_state: usize,
        seed: u64,
    ) -> Result<Self> {
        let n = states.len();
        let invalid = |m: String| Err(Error::InvalidChannel(m));
        if n == 0 {
            return invalid("markov model has no states".into());
        }
        if !(speed.is_finite() && speed > 0.0) {
            return invalid(format!("speed must be positive, got {speed}"));
        }
        if initial_state >= n {
            return invalid(format!("initial state {initial_state} out of range"));
        }
        for s in &states {
            if !(s.rate.is_finite() && s.rate >= 0.0) {
                return invalid(format!("state `{}` has invalid rate {}", s.label, s.rate));
            }
            if !(s.coherence_length.is_finite() && s.coherence_length > 0.0) {
                return invalid(format!("state `{}` needs a positive coherence length", s.label));
            }
        }
        if transitions.len() != n || transitions.iter().any(|row| row.len() != n) {
            return invalid(format!("transition matrix must be {n}x{n}"));
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return invalid(format!("transition row {i} has a negative or non-finite entry"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return invalid(format!("transition row {i} sums to {sum}, not 1"));
            }
        }
        if let Some(h) = handover {
            if !(h.interval_m.is_finite() && h.interval_m > 0.0 && h.outage_s.is_finite() && h.outage_s >= 0.0) {
                return invalid("handover interval must be positive and outage non-negative".into());
            }
        }
        // Every state must be able to reach a positive-rate state, else a path
        // could get stuck at zero forever.
        let mut live: Vec<bool> = states.iter().map(|s| s.rate > 0.0).collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                if !live[i] && transitions[i].iter().zip(&live).any(|(&p, &l)| p > 0.0 && l) {
                    live[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if let Some(dead) = live.iter().position(|l| !l) {
            return invalid(format!("state `{}` can never reach a positive rate", states[dead].label));
        }
        Ok(Self { states, transitions, speed, handover, initial_state, seed })
    }

    /// Default four-state vehicular chain at `speed` m/s.
    pub fn vehicular(speed: f64, seed: u64) -> Result<Self> {
        let states = default_vehicular_states();
        let transitions = nearest_neighbor_transitions(states.len());
        Self::new(states, transitions, speed, Some(DEFAULT_HANDOVER), DEFAULT_INITIAL_STATE, seed)
    }

    pub fn states(&self) -> &[ChannelState] {
        &self.states
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn handover(&self) -> Option<Handover> {
        self.handover
    }

    pub fn with_speed(&self, speed: f64) -> Result<Self> {
        let mut m = self.clone();
        m.speed = speed;
        Self::new(m.states, m.transitions, m.speed, m.handover, m.initial_state, m.seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Mean time spent in `state` per visit.
    pub fn mean_dwell(&self, state: usize) -> f64 {
        self.states[state].coherence_length / self.speed
    }

    /// Samples the state path, continuing past `horizon` until a sojourn in a
    /// positive-rate state has begun at or beyond it.
    pub fn sojourns(&self, horizon: f64) -> Vec<Sojourn> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(self.seed);
        let mut out = Vec::new();
        let mut state = self.initial_state;
        let mut t = 0.0;
        loop {
            if t >= horizon && self.states[state].rate > 0.0 {
                out.push(Sojourn { state, start: t, duration: f64::INFINITY });
                return out;
            }
            let duration = -self.mean_dwell(state) * (1.0 - unit(&mut rng)).ln();
            out.push(Sojourn { state, start: t, duration });
            t += duration;
            state = pick(&self.transitions[state], unit(&mut rng));
        }
    }

    /// Handover outage windows starting before `horizon`.
    pub fn handover_windows(&self, horizon: f64) -> Vec<(f64, f64)> {
        let Some(h) = self.handover else { return Vec::new() };
        if h.outage_s <= 0.0 {
            return Vec::new();
        }
        let spacing = h.interval_m / self.speed;
        (1..)
            .map(|k| k as f64 * spacing)
            .take_while(|&start| start < horizon)
            .map(|start| (start, start + h.outage_s))
            .collect()
    }

    pub fn realize(&self, horizon: f64) -> Result<PiecewiseTrace> {
        if !(horizon > 0.0) {
            return Err(Error::InvalidChannel(format!("horizon must be positive, got {horizon}")));
        }
        let sojourns = self.sojourns(horizon);
        let windows = self.handover_windows(horizon);

        let mut times: Vec<f64> = sojourns.iter().map(|s| s.start).collect();
        for &(a, b) in &windows {
            times.push(a);
            times.push(b);
        }
        times.sort_by(f64::total_cmp);
        times.dedup();

        let mut points: Vec<(f64, f64)> = Vec::with_capacity(times.len());
        let mut si = 0;
        let mut wi = 0;
        for t in times {
            while si + 1 < sojourns.len() && sojourns[si + 1].start <= t {
                si += 1;
            }
            while wi < windows.len() && windows[wi].1 <= t {
                wi += 1;
            }
            // windows are disjoint or overlapping but ordered by start
            let in_outage = windows[wi..].iter().take_while(|w| w.0 <= t).any(|w| t < w.1);
            let rate = if in_outage { 0.0 } else { self.states[sojourns[si].state].rate };
            if points.last().map(|&(_, r)| r) != Some(rate) {
                points.push((t, rate));
            }
        }
        PiecewiseTrace::new(points)
    }
}

fn unit(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn pick(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

/// A channel as declared by a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Trace(PiecewiseTrace),
    Markov(MarkovVehicularModel),
}

impl ChannelSpec {
    pub fn realize(&self, horizon: f64) -> Result<PiecewiseTrace> {
        match self {
            ChannelSpec::Trace(t) => Ok(t.clone()),
            ChannelSpec::Markov(m) => m.realize(horizon),
        }
    }
}
