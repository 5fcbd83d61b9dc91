use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("representation index {index} out of range (ladder has {len} levels)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("time {0} is outside the channel domain")]
    Domain(f64),
    #[error("transfer of {bits} bits starting at {start} s never completes")]
    NonTermination { bits: f64, start: f64 },
    #[error("degenerate download record for segment {0}: non-positive duration")]
    DegenerateRecord(usize),
    #[error("no completed downloads")]
    NoData,
    #[error("invalid session config: {0}")]
    InvalidSession(String),
    #[error("adapter `{adapter}` returned invalid representation {rep}")]
    InvalidDecision { adapter: String, rep: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("event log line {line}: {msg}")]
    EventLog { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
