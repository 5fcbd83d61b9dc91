//! Session simulator.
//!
//! Segments are fetched one at a time. Playback starts as soon as segment 0 is
//! received and consumes media in real time; once started, everything already
//! received plays back-to-back, so the buffer drains at unit rate between
//! download completions. This lets every event be computed in closed form
//! rather than by stepping a clock.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::abr::{Adapter, AdapterInputs, CompletedSegment};
use crate::channel::PiecewiseTrace;
use crate::error::{Error, Result};
use crate::manifest::VideoManifest;

pub const DEFAULT_DURATION_LIMIT_S: f64 = 550.0;
pub const DEFAULT_BUFFER_CAP_S: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub duration_limit: f64,
    pub buffer_cap: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self { duration_limit: DEFAULT_DURATION_LIMIT_S, buffer_cap: DEFAULT_BUFFER_CAP_S }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_limit.is_finite() && self.duration_limit > 0.0) {
            return Err(Error::InvalidSession(format!("duration limit must be positive, got {}", self.duration_limit)));
        }
        if !(self.buffer_cap > 0.0) {
            return Err(Error::InvalidSession(format!("buffer cap must be positive, got {}", self.buffer_cap)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownloadRecord {
    pub segment_index: usize,
    pub rep: usize,
    pub request_time: f64,
    pub begin_time: f64,
    pub end_time: f64,
    pub bits: f64,
}

impl DownloadRecord {
    pub fn duration(&self) -> f64 {
        self.end_time - self.begin_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaybackEvent {
    pub segment_index: usize,
    pub play_start: f64,
    /// Time the segment waited in the buffer after it was received.
    pub buffering_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StallKind {
    Startup,
    MidStream,
}

impl StallKind {
    fn as_str(self) -> &'static str {
        match self {
            StallKind::Startup => "startup",
            StallKind::MidStream => "midstream",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StallEpisode {
    pub start: f64,
    pub end: f64,
    pub kind: StallKind,
}

impl StallEpisode {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Everything that happened during one session, in the order it happened.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionEvents {
    pub downloads: Vec<DownloadRecord>,
    pub playback: Vec<PlaybackEvent>,
    pub stalls: Vec<StallEpisode>,
    /// Adapter state after deciding each segment, for adapters that keep any.
    pub adapter_states: Vec<(usize, String)>,
    pub end_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionTrace {
    pub manifest: VideoManifest,
    pub config: SessionConfig,
    pub adapter: String,
    pub seed: Option<u64>,
    pub events: SessionEvents,
}

impl SessionEvents {
    /// Media in the buffer at `t`, counting segments received at or before `t`.
    pub fn buffer_level(&self, t: f64, segment_duration: f64) -> f64 {
        self.level(t, segment_duration, |end| end <= t)
    }

    /// Buffer level just before `t`, excluding a segment received exactly at `t`.
    pub fn buffer_level_before(&self, t: f64, segment_duration: f64) -> f64 {
        self.level(t, segment_duration, |end| end < t)
    }

    fn level(&self, t: f64, tau: f64, received: impl Fn(f64) -> bool) -> f64 {
        let downloaded = self.downloads.iter().filter(|d| received(d.end_time)).count() as f64 * tau;
        let played: f64 = self.playback.iter().map(|p| (t - p.play_start).clamp(0.0, tau)).sum();
        (downloaded - played).max(0.0)
    }

    pub fn to_event_log(&self) -> String {
        let mut out = String::new();
        for d in &self.downloads {
            let _ = writeln!(
                out,
                "DL {} {} {:?} {:?} {:?} {:?}",
                d.segment_index, d.rep, d.request_time, d.begin_time, d.end_time, d.bits
            );
        }
        for p in &self.playback {
            let _ = writeln!(out, "PLAY {} {:?} {:?}", p.segment_index, p.play_start, p.buffering_time);
        }
        for s in &self.stalls {
            let _ = writeln!(out, "STALL {:?} {:?} {}", s.start, s.end, s.kind.as_str());
        }
        for (seg, state) in &self.adapter_states {
            let _ = writeln!(out, "STATE {seg} {state}");
        }
        let _ = writeln!(out, "END {:?}", self.end_time);
        out
    }

    pub fn parse_event_log(text: &str) -> Result<Self> {
        let mut ev = SessionEvents::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::EventLog { line: i + 1, msg: msg.to_string() };
            let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
            if tag == "STATE" {
                let (seg, state) = rest.split_once(' ').unwrap_or((rest, ""));
                ev.adapter_states.push((seg.parse().map_err(|_| err("bad segment"))?, state.to_string()));
                continue;
            }
            let f: Vec<&str> = rest.split_whitespace().collect();
            let num = |k: usize| -> Result<f64> {
                f.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| err("bad numeric field"))
            };
            let idx = |k: usize| -> Result<usize> {
                f.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| err("bad index field"))
            };
            match (tag, f.len()) {
                ("DL", 6) => ev.downloads.push(DownloadRecord {
                    segment_index: idx(0)?,
                    rep: idx(1)?,
                    request_time: num(2)?,
                    begin_time: num(3)?,
                    end_time: num(4)?,
                    bits: num(5)?,
                }),
                ("PLAY", 3) => ev.playback.push(PlaybackEvent {
                    segment_index: idx(0)?,
                    play_start: num(1)?,
                    buffering_time: num(2)?,
                }),
                ("STALL", 3) => ev.stalls.push(StallEpisode {
                    start: num(0)?,
                    end: num(1)?,
                    kind: match f[2] {
                        "startup" => StallKind::Startup,
                        "midstream" => StallKind::MidStream,
                        _ => return Err(err("unknown stall kind")),
                    },
                }),
                ("END", 1) => ev.end_time = num(0)?,
                _ => return Err(err("unrecognized record")),
            }
        }
        Ok(ev)
    }
}

impl SessionTrace {
    pub fn buffer_level(&self, t: f64) -> f64 {
        self.events.buffer_level(t, self.manifest.segment_duration())
    }

    pub fn to_event_log(&self) -> String {
        let mut out = format!(
            "# adapter={} seed={} tau={:?} duration_limit={:?} buffer_cap={:?}\n",
            self.adapter,
            self.seed.map_or("none".to_string(), |s| s.to_string()),
            self.manifest.segment_duration(),
            self.config.duration_limit,
            self.config.buffer_cap,
        );
        out.push_str(&self.events.to_event_log());
        out
    }
}

/// Runs one session to completion or until `config.duration_limit`.
pub fn run_session(
    manifest: &VideoManifest,
    channel: &PiecewiseTrace,
    adapter: &mut dyn Adapter,
    config: &SessionConfig,
) -> Result<SessionTrace> {
    config.validate()?;
    let tau = manifest.segment_duration();
    let limit = config.duration_limit;
    let mut ev = SessionEvents::default();
    let mut history: Vec<CompletedSegment> = Vec::new();
    // wall-clock time at which everything received so far has been played
    let mut play_end: Option<f64> = None;
    let mut now = 0.0;
    let mut finished = true;

    for k in 0..manifest.segment_count() {
        if now >= limit {
            finished = false;
            break;
        }
        let buffer = play_end.map_or(0.0, |e| (e - now).max(0.0));
        let (rep, earliest) = match history.last() {
            None => (0, now),
            Some(last) => {
                let inputs = AdapterInputs {
                    now,
                    history: &history,
                    current_buffer: buffer,
                    current_rep: last.record.rep,
                    manifest,
                };
                let d = adapter.decide(&inputs);
                if d.rep >= manifest.len() {
                    return Err(Error::InvalidDecision { adapter: adapter.name().to_string(), rep: d.rep });
                }
                (d.rep, d.earliest_request.max(now))
            }
        };
        if let Some(state) = adapter.state() {
            ev.adapter_states.push((k, state));
        }
        let cap_time = play_end.map_or(now, |e| (e - config.buffer_cap).max(now));
        let request = earliest.max(cap_time);
        if request >= limit {
            finished = false;
            break;
        }
        let bits = manifest.segment_size(rep)?;
        let end = request + channel.transfer_time(bits, request)?;
        if end > limit {
            finished = false;
            break;
        }
        let play_start = match play_end {
            None => {
                ev.stalls.push(StallEpisode { start: 0.0, end, kind: StallKind::Startup });
                end
            }
            Some(e) if end > e => {
                ev.stalls.push(StallEpisode { start: e, end, kind: StallKind::MidStream });
                end
            }
            Some(e) => e,
        };
        let record = DownloadRecord { segment_index: k, rep, request_time: request, begin_time: request, end_time: end, bits };
        let buffering_time = play_start - end;
        ev.downloads.push(record);
        if play_start < limit {
            ev.playback.push(PlaybackEvent { segment_index: k, play_start, buffering_time });
        }
        history.push(CompletedSegment { record, buffering_time });
        play_end = Some(play_start + tau);
        now = end;
    }

    ev.end_time = match play_end {
        Some(e) if finished => e.min(limit),
        Some(e) => {
            if e < limit {
                ev.stalls.push(StallEpisode { start: e, end: limit, kind: StallKind::MidStream });
            }
            limit
        }
        None => {
            ev.stalls.push(StallEpisode { start: 0.0, end: limit, kind: StallKind::Startup });
            limit
        }
    };

    Ok(SessionTrace { manifest: manifest.clone(), config: *config, adapter: adapter.name().to_string(), seed: None, events: ev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abr::FixedRep;

    fn one_level(bitrate: f64, n: usize) -> VideoManifest {
        VideoManifest::new(2.0, n, &[bitrate]).unwrap()
    }

    fn run(manifest: &VideoManifest, rate: f64, config: SessionConfig) -> SessionTrace {
        let channel = PiecewiseTrace::constant(rate).unwrap();
        run_session(manifest, &channel, &mut FixedRep(0), &config).unwrap()
    }

    // Hand-computed timelines. At 2 Mbps each 2 Mb segment takes 1 s, so
    // downloads end at 1, 2, 3; playback runs [1,3], [3,5], [5,7] and the
    // segments wait 0, 1, 2 s. At 0.5 Mbps each takes 4 s: ends 4, 8, 12,
    // playback [4,6] stall [6,8] play [8,10] stall [10,12] play [12,14].
    #[test]
    fn fast_channel_timeline() {
        let t = run(&one_level(1e6, 3), 2e6, SessionConfig::default());
        let ends: Vec<f64> = t.events.downloads.iter().map(|d| d.end_time).collect();
        assert_eq!(ends, vec![1.0, 2.0, 3.0]);
        let waits: Vec<f64> = t.events.playback.iter().map(|p| p.buffering_time).collect();
        assert_eq!(waits, vec![0.0, 1.0, 2.0]);
        assert_eq!(t.events.playback[0].play_start, 1.0);
        assert_eq!(t.events.stalls, vec![StallEpisode { start: 0.0, end: 1.0, kind: StallKind::Startup }]);
        assert_eq!(t.events.end_time, 7.0);
    }

    #[test]
    fn slow_channel_timeline() {
        let t = run(&one_level(1e6, 3), 0.5e6, SessionConfig::default());
        let ends: Vec<f64> = t.events.downloads.iter().map(|d| d.end_time).collect();
        assert_eq!(ends, vec![4.0, 8.0, 12.0]);
        let mid: Vec<(f64, f64)> = t
            .events
            .stalls
            .iter()
            .filter(|s| s.kind == StallKind::MidStream)
            .map(|s| (s.start, s.end))
            .collect();
        assert_eq!(mid, vec![(6.0, 8.0), (10.0, 12.0)]);
        assert_eq!(t.events.end_time, 14.0);
    }

    #[test]
    fn early_cutoff_has_no_playback() {
        let t = run(&one_level(1e6, 3), 2e6, SessionConfig { duration_limit: 0.5, ..Default::default() });
        assert!(t.events.downloads.len() <= 1);
        assert!(t.events.playback.is_empty());
        assert_eq!(t.events.stalls, vec![StallEpisode { start: 0.0, end: 0.5, kind: StallKind::Startup }]);
    }

    #[test]
    fn buffer_level_examples() {
        let t = run(&one_level(1e6, 3), 2e6, SessionConfig::default());
        assert_eq!(t.buffer_level(1.0), 2.0);
        assert_eq!(t.buffer_level(2.5), 2.5);
        let s = run(&one_level(1e6, 3), 0.5e6, SessionConfig::default());
        assert_eq!(s.buffer_level(7.0), 0.0);
    }

    #[test]
    fn buffer_cap_defers_requests() {
        let m = one_level(1e6, 100);
        let cfg = SessionConfig { duration_limit: 300.0, buffer_cap: 10.0 };
        let t = run(&m, 10e6, cfg);
        for (prev, d) in t.events.downloads.iter().zip(t.events.downloads.iter().skip(1)) {
            assert!(d.request_time >= prev.end_time);
            assert!(t.buffer_level(d.end_time) <= cfg.buffer_cap + m.segment_duration() + 1e-9);
        }
        assert!(t.events.stalls.iter().all(|s| s.kind == StallKind::Startup));
    }

    #[test]
    fn invalid_adapter_decision_is_fatal() {
        let m = one_level(1e6, 3);
        let channel = PiecewiseTrace::constant(2e6).unwrap();
        let err = run_session(&m, &channel, &mut FixedRep(4), &SessionConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidDecision { rep: 4, .. }));
    }

    #[test]
    fn event_log_round_trip() {
        let t = run(&one_level(1e6, 3), 0.5e6, SessionConfig::default());
        let log = t.to_event_log();
        assert!(log.contains("STALL 6.0 8.0 midstream"));
        assert_eq!(SessionEvents::parse_event_log(&log).unwrap(), t.events);
        assert!(SessionEvents::parse_event_log("DL 1 2\n").is_err());
    }
}
