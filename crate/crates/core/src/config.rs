//! Scenario files.
//!
//! The format is flat `key = value` lines grouped under `[section]` headers,
//! with `#` comments:
//!
//! ```text
//! [scenario]
//! algorithms = fdash, osmf
//! iterations = 30
//! base_seed = 1
//!
//! [channel]
//! kind = markov
//! speeds_mps = 5, 40
//!
//! [fdash]
//! target_s = 35
//! ```
//!
//! Keys are addressed as `section.key`; sections named after an algorithm
//! carry that algorithm's tunables.

use std::path::{Path, PathBuf};

use crate::abr::{parse_list, Algorithm, AlgorithmConfigs};
use crate::channel::{
    default_vehicular_states, nearest_neighbor_transitions, ChannelState, Handover, MarkovVehicularModel,
    PiecewiseTrace, DEFAULT_HANDOVER, DEFAULT_INITIAL_STATE,
};
use crate::engine::SessionConfig;
use crate::error::{Error, Result};
use crate::manifest::{VideoManifest, DEFAULT_LADDER_BPS, DEFAULT_SEGMENT_COUNT, DEFAULT_SEGMENT_DURATION_S};

pub const DEFAULT_SPEEDS_MPS: [f64; 8] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
pub const DEFAULT_ITERATIONS: usize = 10;

/// One `section.key = value` assignment and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: String,
    /// Directory relative paths in the value resolve against.
    pub base_dir: Option<PathBuf>,
}

pub fn parse_config(text: &str, source: &str, base_dir: Option<&Path>) -> Result<Vec<Entry>> {
    let mut section: Option<String> = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let origin = format!("{source}:{}", i + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("{origin}: unterminated section header")))?
                .trim();
            if name.is_empty() {
                return Err(Error::Config(format!("{origin}: empty section name")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{origin}: expected `key = value`, got `{line}`")))?;
        let sec = section
            .as_deref()
            .ok_or_else(|| Error::Config(format!("{origin}: key `{}` outside any section", k.trim())))?;
        out.push(Entry {
            key: format!("{sec}.{}", k.trim()),
            value: v.trim().to_string(),
            origin,
            base_dir: base_dir.map(Path::to_path_buf),
        });
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string(), path.parent())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioChannel {
    Trace(PiecewiseTrace),
    /// Vehicular model swept over speeds; its own speed and seed are replaced per run.
    Markov { model: MarkovVehicularModel, speeds: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub manifest: VideoManifest,
    pub channel: ScenarioChannel,
    pub algorithms: Vec<Algorithm>,
    pub iterations: usize,
    pub base_seed: u64,
    pub session: SessionConfig,
    pub configs: AlgorithmConfigs,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::from_entries(&[]).expect("defaults are valid")
    }
}

struct Raw {
    segment_duration: f64,
    segment_count: usize,
    ladder: Vec<f64>,
    kind: String,
    trace: Option<PathBuf>,
    speeds: Vec<f64>,
    states: Vec<ChannelState>,
    transitions: Option<Vec<Vec<f64>>>,
    handover: Handover,
    initial_state: usize,
    algorithms: Vec<Algorithm>,
    iterations: usize,
    base_seed: u64,
    session: SessionConfig,
}

fn states_from(value: &str) -> std::result::Result<Vec<ChannelState>, String> {
    value
        .split(';')
        .map(|s| {
            let parts: Vec<&str> = s.split(':').map(str::trim).collect();
            match parts.as_slice() {
                [label, rate, len] => Ok(ChannelState {
                    label: label.to_string(),
                    rate: rate.parse().map_err(|_| format!("bad rate `{rate}`"))?,
                    coherence_length: len.parse().map_err(|_| format!("bad coherence length `{len}`"))?,
                }),
                _ => Err(format!("state `{s}` is not label:rate_bps:coherence_m")),
            }
        })
        .collect()
}

impl Scenario {
    /// Builds a scenario from assignments applied in order; later ones win.
    pub fn from_entries(entries: &[Entry]) -> Result<Self> {
        let mut raw = Raw {
            segment_duration: DEFAULT_SEGMENT_DURATION_S,
            segment_count: DEFAULT_SEGMENT_COUNT,
            ladder: DEFAULT_LADDER_BPS.to_vec(),
            kind: "markov".into(),
            trace: None,
            speeds: DEFAULT_SPEEDS_MPS.to_vec(),
            states: default_vehicular_states(),
            transitions: None,
            handover: DEFAULT_HANDOVER,
            initial_state: DEFAULT_INITIAL_STATE,
            algorithms: Algorithm::ALL.to_vec(),
            iterations: DEFAULT_ITERATIONS,
            base_seed: 1,
            session: SessionConfig::default(),
        };
        let mut configs = AlgorithmConfigs::default();

        // threshold keys derived from a target must not clobber explicit ones
        let mut ordered: Vec<&Entry> = entries.iter().collect();
        ordered.sort_by_key(|e| !e.key.ends_with(".target_s"));

        for e in ordered {
            let fail = |msg: String| Error::Config(format!("{}: `{}`: {msg}", e.origin, e.key));
            let v = e.value.as_str();
            let num = || v.parse::<f64>().map_err(|_| fail(format!("`{v}` is not a number")));
            let count = || v.parse::<usize>().map_err(|_| fail(format!("`{v}` is not a non-negative integer")));
            let list = || parse_list::<f64>(v).map_err(|_| fail(format!("`{v}` is not a comma-separated number list")));
            match e.key.as_str() {
                "scenario.algorithms" => {
                    raw.algorithms = v
                        .split(',')
                        .map(|a| a.trim().parse::<Algorithm>())
                        .collect::<Result<_>>()
                        .map_err(|err| fail(err.to_string()))?
                }
                "scenario.iterations" => raw.iterations = count()?,
                "scenario.base_seed" => raw.base_seed = v.parse().map_err(|_| fail(format!("`{v}` is not a seed")))?,
                "scenario.duration_limit_s" => raw.session.duration_limit = num()?,
                "scenario.buffer_cap_s" => raw.session.buffer_cap = num()?,
                "manifest.segment_duration_s" => raw.segment_duration = num()?,
                "manifest.segment_count" => raw.segment_count = count()?,
                "manifest.ladder_bps" => raw.ladder = list()?,
                "channel.kind" => match v {
                    "markov" | "trace" => raw.kind = v.to_string(),
                    _ => return Err(fail(format!("unknown channel kind `{v}` (markov | trace)"))),
                },
                "channel.trace" => {
                    let p = PathBuf::from(v);
                    raw.trace = Some(match &e.base_dir {
                        Some(dir) if p.is_relative() => dir.join(p),
                        _ => p,
                    });
                    raw.kind = "trace".into();
                }
                "channel.speeds_mps" => raw.speeds = list()?,
                "channel.states" => raw.states = states_from(v).map_err(fail)?,
                "channel.transitions" => {
                    raw.transitions = Some(
                        v.split(';')
                            .map(parse_list::<f64>)
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| fail("rows must be comma-separated numbers separated by `;`".into()))?,
                    )
                }
                "channel.handover_interval_m" => raw.handover.interval_m = num()?,
                "channel.handover_outage_s" => raw.handover.outage_s = num()?,
                "channel.initial_state" => raw.initial_state = count()?,
                key => {
                    let section = key.split('.').next().unwrap_or("");
                    if section.parse::<Algorithm>().is_ok() {
                        configs.set(key, v).map_err(|err| fail(err.to_string()))?;
                    } else {
                        return Err(fail("unknown config key".into()));
                    }
                }
            }
        }

        let manifest = VideoManifest::new(raw.segment_duration, raw.segment_count, &raw.ladder)
            .map_err(|e| Error::Config(e.to_string()))?;
        if raw.iterations == 0 {
            return Err(Error::Config("scenario.iterations must be at least 1".into()));
        }
        if raw.algorithms.is_empty() {
            return Err(Error::Config("scenario.algorithms is empty".into()));
        }
        raw.session.validate().map_err(|e| Error::Config(e.to_string()))?;
        configs.validate()?;

        let channel = if raw.kind == "trace" {
            let path = raw.trace.ok_or_else(|| Error::Config("channel.kind = trace needs channel.trace".into()))?;
            ScenarioChannel::Trace(PiecewiseTrace::load(&path).map_err(|e| Error::Config(e.to_string()))?)
        } else {
            let mut speeds = raw.speeds;
            if speeds.is_empty() || speeds.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(Error::Config(format!("channel.speeds_mps must be positive, got {speeds:?}")));
            }
            speeds.sort_by(f64::total_cmp);
            speeds.dedup();
            let n = raw.states.len();
            let transitions = raw.transitions.unwrap_or_else(|| nearest_neighbor_transitions(n));
            let handover = (raw.handover.outage_s > 0.0).then_some(raw.handover);
            let model = MarkovVehicularModel::new(raw.states, transitions, speeds[0], handover, raw.initial_state, 0)
                .map_err(|e| Error::Config(e.to_string()))?;
            ScenarioChannel::Markov { model, speeds }
        };

        Ok(Scenario {
            manifest,
            channel,
            algorithms: raw.algorithms,
            iterations: raw.iterations,
            base_seed: raw.base_seed,
            session: raw.session,
            configs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(text: &str) -> Vec<Entry> {
        parse_config(text, "test.cfg", None).unwrap()
    }

    #[test]
    fn defaults() {
        let s = Scenario::default();
        assert_eq!(s.algorithms, Algorithm::ALL.to_vec());
        assert_eq!(s.session.duration_limit, 550.0);
        assert_eq!(s.session.buffer_cap, 60.0);
        assert_eq!(s.configs.fdash.target, 35.0);
        assert_eq!(s.configs.fdash.window, 10.0);
        let ScenarioChannel::Markov { speeds, model } = &s.channel else { panic!() };
        assert_eq!(speeds.first(), Some(&5.0));
        assert_eq!(speeds.last(), Some(&40.0));
        assert_eq!(model.states().len(), 4);
    }

    #[test]
    fn parses_sections_and_overrides() {
        let s = Scenario::from_entries(&entries(
            "# comment\n[scenario]\nalgorithms = osmf, fdash\niterations = 3\n\n[channel]\nspeeds_mps = 40, 5\n\
             [fdash]\nhorizon_s = 30\n[aaash]\nb_min_s = 4\ntarget_s = 20\n",
        ))
        .unwrap();
        assert_eq!(s.algorithms, vec![Algorithm::Osmf, Algorithm::Fdash]);
        assert_eq!(s.iterations, 3);
        assert_eq!(s.configs.fdash.horizon, 30.0);
        // target applied first, explicit threshold wins
        assert_eq!(s.configs.aaash.b_min, 4.0);
        assert_eq!(s.configs.aaash.b_high, 20.0);
        let ScenarioChannel::Markov { speeds, .. } = s.channel else { panic!() };
        assert_eq!(speeds, vec![5.0, 40.0]);
    }

    #[test]
    fn errors_name_the_offending_line_and_key() {
        let err = Scenario::from_entries(&entries("[scenario]\niterations = 2\nalgorithms = fdash, bogus\n")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("test.cfg:3") && msg.contains("bogus"), "{msg}");

        let err = Scenario::from_entries(&entries("[fdash]\nnope = 1\n")).unwrap_err();
        assert!(err.to_string().contains("fdash.nope"), "{err}");

        let err = Scenario::from_entries(&entries("[weird]\nx = 1\n")).unwrap_err();
        assert!(err.to_string().contains("weird.x"));

        assert!(parse_config("x = 1\n", "t", None).is_err());
        assert!(parse_config("[a\n", "t", None).is_err());
        assert!(parse_config("[a]\njunk\n", "t", None).is_err());
        assert!(Scenario::from_entries(&entries("[scenario]\niterations = 0\n")).is_err());
        assert!(Scenario::from_entries(&entries("[channel]\nspeeds_mps = 0\n")).is_err());
        let err = Scenario::from_entries(&entries("[channel]\ntrace = /nonexistent/trace.txt\n")).unwrap_err();
        assert!(err.to_string().contains("nonexistent"));
    }

    #[test]
    fn custom_markov_states() {
        let s = Scenario::from_entries(&entries(
            "[channel]\nstates = lo:1e6:50; hi:4e6:50\ntransitions = 0,1; 1,0\nhandover_outage_s = 0\ninitial_state = 0\n",
        ))
        .unwrap();
        let ScenarioChannel::Markov { model, .. } = s.channel else { panic!() };
        assert_eq!(model.states().len(), 2);
        assert_eq!(model.handover(), None);
    }
}
