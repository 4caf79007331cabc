//! JSON documents: detection results, race-freeness certificates and
//! sync-preserving witnesses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracerace_core::lockset::{Certificate, VarVerdict};
use tracerace_core::{LockId, RaceReport, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStats {
    #[serde(rename = "N")]
    pub events: usize,
    #[serde(rename = "T")]
    pub threads: usize,
    #[serde(rename = "L")]
    pub locks: usize,
    #[serde(rename = "V")]
    pub vars: usize,
}

impl TraceStats {
    pub fn of(trace: &Trace) -> Self {
        TraceStats {
            events: trace.len(),
            threads: trace.num_threads(),
            locks: trace.num_locks(),
            vars: trace.num_vars(),
        }
    }
}

/// Output of `detect`. The witness fields are present iff `race` is true.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub race: bool,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    /// Sync-preserving races only: the reordering that exposes the pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reordering: Option<Vec<usize>>,
    /// With `--report-all`: every racy event (HB) or variable (lock-set).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub racy_events: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub racy_vars: Option<Vec<String>>,
    pub algo: String,
    pub elapsed_ms: f64,
    pub stats: TraceStats,
}

impl RunResult {
    pub fn new(
        trace: &Trace,
        kind: &str,
        algo: &str,
        report: Option<&RaceReport>,
        elapsed_ms: f64,
    ) -> Self {
        RunResult {
            race: report.is_some(),
            kind: kind.to_string(),
            e1: report.map(|r| r.first),
            e2: report.map(|r| r.second),
            var: report.map(|r| trace.var_name(r.var).to_string()),
            reordering: None,
            racy_events: None,
            racy_vars: None,
            algo: algo.to_string(),
            elapsed_ms,
            stats: TraceStats::of(trace),
        }
    }
}

/// One certificate entry: `{"lock": name}`, `"no-conflict"` or `"racy"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VerdictJson {
    Protected { lock: String },
    Tag(VerdictTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictTag {
    NoConflict,
    Racy,
}

pub type CertificateJson = BTreeMap<String, VerdictJson>;

pub fn certificate_to_json(trace: &Trace, cert: &Certificate) -> CertificateJson {
    cert.verdicts
        .iter()
        .enumerate()
        .map(|(x, v)| {
            let j = match *v {
                VarVerdict::ProtectedBy(l) => VerdictJson::Protected {
                    lock: trace.lock_name(l).to_string(),
                },
                VarVerdict::NoConflictingPair => VerdictJson::Tag(VerdictTag::NoConflict),
                VarVerdict::Racy => VerdictJson::Tag(VerdictTag::Racy),
            };
            (trace.var_names()[x].clone(), j)
        })
        .collect()
}

/// A certificate that does not match the trace's names.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateMismatch {
    #[error("no verdict for variable {0}")]
    MissingVar(String),
    #[error("verdict for unknown variable {0}")]
    UnknownVar(String),
    #[error("variable {var} claims unknown lock {lock}")]
    UnknownLock { var: String, lock: String },
}

pub fn certificate_from_json(
    trace: &Trace,
    json: &CertificateJson,
) -> Result<Certificate, CertificateMismatch> {
    if let Some(name) = json.keys().find(|k| trace.var_by_name(k).is_none()) {
        return Err(CertificateMismatch::UnknownVar(name.clone()));
    }
    let verdicts = trace
        .var_names()
        .iter()
        .map(|name| match json.get(name) {
            None => Err(CertificateMismatch::MissingVar(name.clone())),
            Some(VerdictJson::Protected { lock }) => trace
                .lock_by_name(lock)
                .map(VarVerdict::ProtectedBy)
                .ok_or_else(|| CertificateMismatch::UnknownLock {
                    var: name.clone(),
                    lock: lock.clone(),
                }),
            Some(VerdictJson::Tag(VerdictTag::NoConflict)) => Ok(VarVerdict::NoConflictingPair),
            Some(VerdictJson::Tag(VerdictTag::Racy)) => Ok(VarVerdict::Racy),
        })
        .collect::<Result<_, _>>()?;
    Ok(Certificate { verdicts })
}

/// Lock name for a lock id, for diagnostics.
pub fn lock_label(trace: &Trace, l: LockId) -> String {
    if l.index() < trace.num_locks() {
        trace.lock_name(l).to_string()
    } else {
        format!("#{}", l.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub events: Vec<usize>,
    pub e1: usize,
    pub e2: usize,
}
