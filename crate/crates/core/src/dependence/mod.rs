//! Loop-carried dependence analysis for the innermost loop of a [`Kernel`].
//!
//! [`analyze_dependences`] runs ZIV and strong-SIV subscript tests and labels
//! every result `Proven` or `Assumed`. [`brute_force_dependences`] simulates the
//! loop and is the reference the analysis is tested against.
//! [`generate_precise_remarks`] turns dependences into prompt text.

mod analysis;
mod oracle;
mod remarks;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{AccessMode, ArrayAccess};

pub use analysis::{analyze_dependences, analyze_dependences_with, AnalysisOptions};
pub use oracle::brute_force_dependences;
pub use remarks::{generate_precise_remarks, precise_remark_set, PreciseRemark};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DepKind {
    Raw,
    War,
    Waw,
}

impl DepKind {
    /// Kind of a dependence from `source` to `sink`; `None` for read-read pairs.
    pub fn of(source: AccessMode, sink: AccessMode) -> Option<DepKind> {
        match (source, sink) {
            (AccessMode::Write, AccessMode::Read) => Some(DepKind::Raw),
            (AccessMode::Read, AccessMode::Write) => Some(DepKind::War),
            (AccessMode::Write, AccessMode::Write) => Some(DepKind::Waw),
            (AccessMode::Read, AccessMode::Read) => None,
        }
    }

    pub fn long_name(&self) -> &'static str {
        match self {
            DepKind::Raw => "read-after-write",
            DepKind::War => "write-after-read",
            DepKind::Waw => "write-after-write",
        }
    }
}

impl fmt::Display for DepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DepKind::Raw => "RAW",
            DepKind::War => "WAR",
            DepKind::Waw => "WAW",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Proven,
    Assumed,
}

impl Confidence {
    pub fn as_str(&self) -> &'static str {
        match self {
            Confidence::Proven => "proven",
            Confidence::Assumed => "assumed",
        }
    }
}

/// Iteration gap of the innermost loop between source and sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Distance {
    Known(u64),
    Unknown,
}

impl Distance {
    pub fn known(&self) -> Option<u64> {
        match self {
            Distance::Known(d) => Some(*d),
            Distance::Unknown => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Known(d) => write!(f, "{d}"),
            Distance::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dependence {
    pub kind: DepKind,
    /// Endpoint that executes first.
    pub source: ArrayAccess,
    pub sink: ArrayAccess,
    pub distance: Distance,
    pub var: String,
    pub confidence: Confidence,
}

impl Dependence {
    /// Identity used to compare analysis output with the oracle.
    pub fn signature(&self) -> (DepKind, usize, usize, Distance) {
        (self.kind, self.source.id, self.sink.id, self.distance)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DependenceError {
    #[error("oracle cannot simulate this kernel: {0}")]
    OracleUnsupported(String),
}

#[derive(Serialize)]
struct EndpointJson<'a> {
    text: &'a str,
    file: &'a str,
    line: u32,
    col: u32,
}

#[derive(Serialize)]
struct DependenceJson<'a> {
    kind: DepKind,
    confidence: Confidence,
    distance: Option<u64>,
    var: &'a str,
    source: EndpointJson<'a>,
    sink: EndpointJson<'a>,
}

fn endpoint(a: &ArrayAccess) -> EndpointJson<'_> {
    EndpointJson { text: &a.source_text, file: &a.loc.file, line: a.loc.line, col: a.loc.col }
}

/// JSON array of dependences; unknown distances are `null`.
pub fn export_json(deps: &[Dependence]) -> String {
    let rows: Vec<DependenceJson> = deps
        .iter()
        .map(|d| DependenceJson {
            kind: d.kind,
            confidence: d.confidence,
            distance: d.distance.known(),
            var: &d.var,
            source: endpoint(&d.source),
            sink: endpoint(&d.sink),
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("dependences serialize")
}
