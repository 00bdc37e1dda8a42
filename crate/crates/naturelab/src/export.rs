//! Trace and report serialization.
//!
//! Traces go to CSV with one row per stage; reports and demo summaries go
//! to pretty-printed JSON. Identical runs produce byte-identical files —
//! wall-clock time is the one report field excluded from that guarantee.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::engine::Trace;
use crate::error::{Error, Result};
use crate::problem::DecisionProblem;
use crate::rational::format_rational;

/// Render a trace as CSV with columns `t,action,state,payoff,coin,success,N_t`.
/// Actions and states are written by name; the coin column is empty for
/// strategies without one.
pub fn trace_to_csv(trace: &Trace, problem: &DecisionProblem) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "action", "state", "payoff", "coin", "success", "N_t"])
        .map_err(csv_err)?;
    for r in &trace.records {
        w.write_record([
            r.t.to_string(),
            problem.action_names()[r.action].clone(),
            problem.state_names()[r.state].clone(),
            format_rational(&r.payoff),
            match r.coin {
                Some(true) => "1".to_string(),
                Some(false) => "0".to_string(),
                None => String::new(),
            },
            if r.success { "1" } else { "0" }.to_string(),
            r.cumulative_successes.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

pub fn write_trace_csv(trace: &Trace, problem: &DecisionProblem, path: &Path) -> Result<()> {
    let bytes = trace_to_csv(trace, problem)?;
    write_atomically(path, &bytes)
}

pub fn write_json(value: &Value, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomically(path, &bytes)
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", parent.display()))))?;
        }
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))?;
    f.write_all(bytes)
        .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))?;
    Ok(())
}
