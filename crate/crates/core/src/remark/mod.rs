//! Unified optimization remarks.
//!
//! Clang optimization records, Intel opt-reports and the precise dependence
//! remarks produced by [`crate::dependence`] all land in the same [`Remark`]
//! shape so that prompts and metrics can treat them uniformly.

mod clang;
mod intel;
mod mapping;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::kernel::{Kernel, LineSpan, SourceLoc};

pub use clang::{parse_clang_opt_record, ClangRecordParse};
pub use intel::{parse_intel_opt_report, parse_intel_opt_report_with};
pub use mapping::{CategoryMap, MappingRule};

/// Who produced a remark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemarkSource {
    Clang,
    Intel,
    Precise,
}

impl RemarkSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            RemarkSource::Clang => "clang",
            RemarkSource::Intel => "intel",
            RemarkSource::Precise => "precise",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RemarkSource::Clang => "Clang",
            RemarkSource::Intel => "Intel",
            RemarkSource::Precise => "Precise",
        }
    }
}

impl fmt::Display for RemarkSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Record flavour as emitted by the compiler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemarkKind {
    Passed,
    Missed,
    Analysis,
}

/// The remark taxonomy. Every named variant is one row of the per-remark
/// delta table; anything else is kept verbatim in `Other`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RemarkCategory {
    // Intel
    OutputDependence,
    AntiDependence,
    MultipleExits,
    FlowDependence,
    FunctionCall,
    LoopControlVar,
    // Clang
    ArrayBounds,
    EarlyExit,
    NotBeneficial,
    UnsafeDependency,
    /// Clang's `CantVectorizeLibcall` and `CantVectorizeInstruction` merged.
    LibcallOrInstr,
    NonReductionValue,
    // Precise
    ReadAfterWrite,
    WriteAfterRead,
    WriteAfterWrite,
    Other(String),
}

impl RemarkCategory {
    /// Named categories in table order.
    pub const NAMED: [RemarkCategory; 15] = [
        RemarkCategory::OutputDependence,
        RemarkCategory::AntiDependence,
        RemarkCategory::MultipleExits,
        RemarkCategory::FlowDependence,
        RemarkCategory::FunctionCall,
        RemarkCategory::LoopControlVar,
        RemarkCategory::ArrayBounds,
        RemarkCategory::EarlyExit,
        RemarkCategory::NotBeneficial,
        RemarkCategory::UnsafeDependency,
        RemarkCategory::LibcallOrInstr,
        RemarkCategory::NonReductionValue,
        RemarkCategory::ReadAfterWrite,
        RemarkCategory::WriteAfterRead,
        RemarkCategory::WriteAfterWrite,
    ];

    /// Stable identifier used in JSON, CSV and prompts.
    pub fn name(&self) -> &str {
        use RemarkCategory::*;
        match self {
            OutputDependence => "OutputDependence",
            AntiDependence => "AntiDependence",
            MultipleExits => "MultipleExits",
            FlowDependence => "FlowDependence",
            FunctionCall => "FunctionCall",
            LoopControlVar => "LoopControlVar",
            ArrayBounds => "ArrayBounds",
            EarlyExit => "EarlyExit",
            NotBeneficial => "NotBeneficial",
            UnsafeDependency => "UnsafeDependency",
            LibcallOrInstr => "LibcallOrInstr",
            NonReductionValue => "NonReductionValue",
            ReadAfterWrite => "ReadAfterWrite",
            WriteAfterRead => "WriteAfterRead",
            WriteAfterWrite => "WriteAfterWrite",
            Other(name) => name,
        }
    }

    /// Row label in rendered tables.
    pub fn label(&self) -> &str {
        use RemarkCategory::*;
        match self {
            OutputDependence => "Output Dependence",
            AntiDependence => "Anti Dependence",
            MultipleExits => "Multiple Exits",
            FlowDependence => "Flow Dependence",
            FunctionCall => "Function Call",
            LoopControlVar => "Loop Control Var",
            LibcallOrInstr => "Libcall/Instr",
            other => other.name(),
        }
    }

    pub fn family(&self) -> Option<RemarkSource> {
        use RemarkCategory::*;
        match self {
            OutputDependence | AntiDependence | MultipleExits | FlowDependence | FunctionCall
            | LoopControlVar => Some(RemarkSource::Intel),
            ArrayBounds | EarlyExit | NotBeneficial | UnsafeDependency | LibcallOrInstr
            | NonReductionValue => Some(RemarkSource::Clang),
            ReadAfterWrite | WriteAfterRead | WriteAfterWrite => Some(RemarkSource::Precise),
            Other(_) => None,
        }
    }

    pub fn is_other(&self) -> bool {
        matches!(self, RemarkCategory::Other(_))
    }

    /// Position in [`RemarkCategory::NAMED`]; `Other` sorts last.
    pub fn table_rank(&self) -> usize {
        Self::NAMED.iter().position(|c| c == self).unwrap_or(Self::NAMED.len())
    }
}

impl fmt::Display for RemarkCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RemarkCategory {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Self::NAMED
            .iter()
            .find(|c| c.name() == s)
            .cloned()
            .unwrap_or_else(|| RemarkCategory::Other(s.to_string())))
    }
}

impl Serialize for RemarkCategory {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for RemarkCategory {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().unwrap_or_else(|e: std::convert::Infallible| match e {}))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Remark {
    pub compiler: RemarkSource,
    pub kind: RemarkKind,
    pub category: RemarkCategory,
    /// Pass that emitted the remark, e.g. `loop-vectorize`.
    pub pass: String,
    /// Compiler-native identifier (`UnsafeMemDep`, `#15344`, ...).
    pub raw_name: String,
    pub message: String,
    pub function: String,
    pub loc: Option<SourceLoc>,
    pub args: Vec<(String, String)>,
}

impl Remark {
    /// A vectorizer success record (`Passed/Vectorized` or `LOOP WAS VECTORIZED`).
    pub fn is_vectorization_success(&self) -> bool {
        if self.kind != RemarkKind::Passed {
            return false;
        }
        match self.compiler {
            RemarkSource::Clang => self.pass.contains("loop-vectorize") && self.raw_name == "Vectorized",
            RemarkSource::Intel => self.category == RemarkCategory::Other("Vectorized".into()),
            RemarkSource::Precise => false,
        }
    }

    fn dedup_key(&self) -> (RemarkSource, &RemarkCategory, &str, Option<&SourceLoc>, &str) {
        (self.compiler, &self.category, &self.raw_name, self.loc.as_ref(), &self.message)
    }

    /// One line per remark; precise remarks keep their two-line form.
    pub fn render(&self) -> String {
        if self.compiler == RemarkSource::Precise {
            return self.message.clone();
        }
        match &self.loc {
            Some(loc) => format!("{loc}: {} [{}] {}", self.compiler, self.category, self.message),
            None => format!("{} [{}] {}", self.compiler, self.category, self.message),
        }
    }
}

/// Deduplicated remarks from one compile (or one analysis run).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RemarkSet {
    pub remarks: Vec<Remark>,
    pub origin: String,
}

impl RemarkSet {
    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = origin.into();
        self
    }

    pub fn is_empty(&self) -> bool {
        self.remarks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.remarks.len()
    }

    /// Distinct categories in first-seen order.
    pub fn categories(&self) -> Vec<RemarkCategory> {
        let mut out: Vec<RemarkCategory> = Vec::new();
        for r in &self.remarks {
            if !out.contains(&r.category) {
                out.push(r.category.clone());
            }
        }
        out
    }
}

/// Keep the first remark of every (compiler, category, name, location, message) key.
pub fn dedup(remarks: impl IntoIterator<Item = Remark>) -> RemarkSet {
    let remarks: Vec<Remark> = remarks.into_iter().collect();
    let mut seen = HashSet::new();
    let keep: Vec<bool> = remarks.iter().map(|r| seen.insert(r.dedup_key())).collect();
    drop(seen);
    let remarks = remarks.into_iter().zip(keep).filter_map(|(r, k)| k.then_some(r)).collect();
    RemarkSet { remarks, origin: String::new() }
}

pub const NO_REMARKS: &str = "(no optimization remarks)";

pub fn render_for_prompt(set: &RemarkSet) -> String {
    if set.is_empty() {
        return NO_REMARKS.to_string();
    }
    set.remarks.iter().map(Remark::render).collect::<Vec<_>>().join("\n")
}

/// Which loop a vectorization check is about.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoopTarget {
    pub function: Option<String>,
    /// Header line through closing line; when absent any success in `function` counts.
    pub span: Option<LineSpan>,
}

impl LoopTarget {
    pub fn of(kernel: &Kernel) -> Self {
        LoopTarget { function: Some(kernel.name.clone()), span: Some(kernel.nest.span) }
    }

    pub fn function(name: impl Into<String>) -> Self {
        LoopTarget { function: Some(name.into()), span: None }
    }
}

pub fn detect_vectorized(remarks: &[Remark], target: &LoopTarget) -> bool {
    remarks.iter().filter(|r| r.is_vectorization_success()).any(|r| {
        let function_ok = match &target.function {
            Some(f) => r.function.is_empty() || r.function == *f,
            None => true,
        };
        let span_ok = match (&target.span, &r.loc) {
            (Some(span), Some(loc)) => span.contains(loc.line),
            (Some(_), None) => false,
            (None, _) => true,
        };
        function_ok && span_ok
    })
}

/// Canonical JSON shape of an exported remark.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemarkRecord {
    pub compiler: RemarkSource,
    pub category: RemarkCategory,
    pub raw_name: String,
    pub pass: String,
    pub message: String,
    pub file: Option<String>,
    pub line: Option<u32>,
    pub col: Option<u32>,
}

impl From<&Remark> for RemarkRecord {
    fn from(r: &Remark) -> Self {
        RemarkRecord {
            compiler: r.compiler,
            category: r.category.clone(),
            raw_name: r.raw_name.clone(),
            pass: r.pass.clone(),
            message: r.message.clone(),
            file: r.loc.as_ref().map(|l| l.file.clone()),
            line: r.loc.as_ref().map(|l| l.line),
            col: r.loc.as_ref().map(|l| l.col),
        }
    }
}

pub fn export_json(remarks: &[Remark]) -> String {
    let records: Vec<RemarkRecord> = remarks.iter().map(RemarkRecord::from).collect();
    serde_json::to_string_pretty(&records).expect("remark records serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn remark(category: RemarkCategory, line: u32, message: &str) -> Remark {
        Remark {
            compiler: RemarkSource::Clang,
            kind: RemarkKind::Analysis,
            category,
            pass: "loop-vectorize".into(),
            raw_name: "UnsafeDep".into(),
            message: message.into(),
            function: "s241".into(),
            loc: Some(SourceLoc::new("tsvc.c", line, 13)),
            args: vec![],
        }
    }

    fn success(function: &str, line: u32) -> Remark {
        Remark {
            kind: RemarkKind::Passed,
            raw_name: "Vectorized".into(),
            category: RemarkCategory::Other("Vectorized".into()),
            function: function.into(),
            ..remark(RemarkCategory::Other("Vectorized".into()), line, "vectorized loop")
        }
    }

    #[test]
    fn dedup_drops_exact_repeats_only() {
        let a = remark(RemarkCategory::UnsafeDependency, 117, "unsafe");
        let set = dedup(vec![a.clone(), a.clone()]);
        assert_eq!(set.remarks, vec![a.clone()]);

        let b = remark(RemarkCategory::UnsafeDependency, 118, "unsafe");
        assert_eq!(dedup(vec![a.clone(), b.clone()]).remarks, vec![a, b]);
        assert!(dedup(Vec::new()).is_empty());
    }

    #[test]
    fn render_line_format() {
        let set = dedup(vec![remark(
            RemarkCategory::UnsafeDependency,
            117,
            "unsafe dependent memory operations in loop",
        )]);
        assert_eq!(
            render_for_prompt(&set),
            "tsvc.c:117:13: clang [UnsafeDependency] unsafe dependent memory operations in loop"
        );
        assert_eq!(render_for_prompt(&RemarkSet::default()), "(no optimization remarks)");
    }

    #[test]
    fn render_without_location() {
        let mut r = remark(RemarkCategory::FunctionCall, 1, "call");
        r.compiler = RemarkSource::Intel;
        r.loc = None;
        assert_eq!(r.render(), "intel [FunctionCall] call");
    }

    #[test]
    fn detect_vectorized_checks_span_and_function() {
        let span = LineSpan { start: 9, end: 12 };
        let target = LoopTarget { function: Some("s241".into()), span: Some(span) };
        assert!(detect_vectorized(&[success("s241", 9)], &target));
        assert!(!detect_vectorized(&[remark(RemarkCategory::UnsafeDependency, 9, "x")], &target));
        assert!(!detect_vectorized(&[success("other", 9)], &target));
        assert!(!detect_vectorized(&[success("s241", 30)], &target));
        assert!(detect_vectorized(&[success("s241", 30)], &LoopTarget::function("s241")));
    }

    #[test]
    fn category_names_round_trip() {
        for c in RemarkCategory::NAMED.iter() {
            assert_eq!(c.name().parse::<RemarkCategory>().unwrap(), *c);
            assert!(c.family().is_some());
        }
        assert_eq!("MissedDetails".parse::<RemarkCategory>().unwrap(), RemarkCategory::Other("MissedDetails".into()));
        let json = serde_json::to_string(&RemarkCategory::LibcallOrInstr).unwrap();
        assert_eq!(json, "\"LibcallOrInstr\"");
    }

    #[test]
    fn export_has_canonical_fields() {
        let json = export_json(&[remark(RemarkCategory::UnsafeDependency, 117, "m")]);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let obj = v[0].as_object().unwrap();
        let mut keys: Vec<_> = obj.keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(keys, vec!["category", "col", "compiler", "file", "line", "message", "pass", "raw_name"]);
        assert_eq!(obj["category"], "UnsafeDependency");
        assert_eq!(obj["compiler"], "clang");
    }
}
