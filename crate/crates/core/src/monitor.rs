//! Offline monitoring of recorded traces and standards built from recordings.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::contract::{Contract, Thresholds, ValueDomain};
use crate::engine::{dt_run, replay_strategy, RunConfig, RunRecord};
use crate::error::{Error, Result};
use crate::model::{Symbol, Trace};
use crate::sut::ReplaySut;
use crate::value::Value;

/// Speed samples in a standard driving-cycle recording.
pub const DEFAULT_SPEED_INPUTS: usize = 1180;

/// On-disk layout of a recorded trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    /// One record per line: `i <v>`, `o <v>` or `q`.
    Canonical,
    /// `inputs` lines of speed values followed by one line holding the
    /// accumulated output.
    SpeedNox { inputs: usize },
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "canonical" => Ok(TraceFormat::Canonical),
            "speed-nox" => Ok(TraceFormat::SpeedNox {
                inputs: DEFAULT_SPEED_INPUTS,
            }),
            other => Err(Error::Parse(format!("unknown trace format `{other}`"))),
        }
    }
}

impl fmt::Display for TraceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceFormat::Canonical => f.write_str("canonical"),
            TraceFormat::SpeedNox { .. } => f.write_str("speed-nox"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedTrace {
    pub path: PathBuf,
    pub symbols: Trace,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a trace; errors carry 1-based line numbers of `path`.
pub fn parse_trace(text: &str, format: TraceFormat, path: &Path) -> Result<Trace> {
    let at = |line: usize, msg: String| Error::ParseAt {
        path: path.to_path_buf(),
        line,
        msg,
    };
    match format {
        TraceFormat::Canonical => content_lines(text)
            .map(|(n, l)| Symbol::parse_record(l).map_err(|e| at(n, e.to_string())))
            .collect(),
        TraceFormat::SpeedNox { inputs } => {
            let rows: Vec<(usize, &str)> = content_lines(text).collect();
            if rows.len() != inputs + 1 {
                let line = rows.last().map_or(1, |(n, _)| *n);
                return Err(at(
                    line,
                    format!("expected {inputs} speed lines and one output line, found {} lines", rows.len()),
                ));
            }
            rows.iter()
                .enumerate()
                .map(|(k, (n, l))| {
                    let v: Value = l.parse().map_err(|e: Error| at(*n, e.to_string()))?;
                    Ok(if k < inputs { Symbol::Input(v) } else { Symbol::Output(v) })
                })
                .collect()
        }
    }
}

pub fn load_trace(path: &Path, format: TraceFormat) -> Result<RecordedTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(RecordedTrace {
        path: path.to_path_buf(),
        symbols: parse_trace(&text, format, path)?,
    })
}

/// Renders a trace in the canonical format.
pub fn render_trace(trace: &Trace) -> String {
    trace.iter().map(|s| s.record() + "\n").collect()
}

/// A contract whose standard is compiled from recorded trace files.
pub fn monitored_standard(
    input_domain: ValueDomain,
    output_domain: ValueDomain,
    thresholds: Thresholds,
    files: &[PathBuf],
    format: TraceFormat,
) -> Result<Contract> {
    let traces = files
        .iter()
        .map(|p| load_trace(p, format).map(|r| r.symbols))
        .collect::<Result<Vec<_>>>()?;
    Contract::from_recorded(input_domain, output_domain, thresholds, &traces)
}

/// Judges a recorded trace by replaying it through the test loop with bound
/// `|trace| + 1`.
pub fn monitor_verdict(trace: &Trace, contract: &Contract) -> Result<RunRecord> {
    let trace = contract.snap_trace(trace)?;
    dt_run(
        contract,
        &mut ReplaySut::new(trace.clone()),
        &mut replay_strategy(trace.clone()),
        RunConfig::new(trace.len() + 1),
    )
}
