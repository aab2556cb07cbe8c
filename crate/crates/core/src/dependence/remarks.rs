use std::path::Path;

use super::{analyze_dependences, DepKind, Dependence};
use crate::kernel::{ArrayAccess, Kernel};
use crate::remark::{dedup, Remark, RemarkCategory, RemarkKind, RemarkSet, RemarkSource};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreciseRemark {
    pub dep: Dependence,
    pub message: String,
    pub suggestion: String,
}

impl PreciseRemark {
    /// Message line followed by the suggestion line.
    pub fn text(&self) -> String {
        format!("{}\nsuggestion: {}", self.message, self.suggestion)
    }

    pub fn category(&self) -> RemarkCategory {
        match self.dep.kind {
            DepKind::Raw => RemarkCategory::ReadAfterWrite,
            DepKind::War => RemarkCategory::WriteAfterRead,
            DepKind::Waw => RemarkCategory::WriteAfterWrite,
        }
    }

    pub fn to_remark(&self, function: &str) -> Remark {
        let d = &self.dep;
        Remark {
            compiler: RemarkSource::Precise,
            kind: RemarkKind::Analysis,
            category: self.category(),
            pass: "dependence".into(),
            raw_name: self.category().name().to_string(),
            message: self.text(),
            function: function.to_string(),
            loc: Some(d.source.loc.clone()),
            args: vec![
                ("source".into(), d.source.source_text.clone()),
                ("sink".into(), d.sink.source_text.clone()),
                ("distance".into(), d.distance.to_string()),
                ("confidence".into(), d.confidence.as_str().into()),
            ],
        }
    }
}

fn endpoint(a: &ArrayAccess) -> String {
    let file = Path::new(&a.loc.file).file_name().and_then(|f| f.to_str()).unwrap_or(&a.loc.file);
    format!("{} [{}:{}:{}]", a.source_text, file, a.loc.line, a.loc.col)
}

fn suggestion(d: &Dependence) -> String {
    match d.kind {
        DepKind::War => format!("consider using a temporary to store {}", d.source.source_text),
        DepKind::Raw => format!(
            "consider restructuring so {} does not consume a value produced in an earlier iteration \
             (e.g., loop fission or recognizing a recurrence)",
            d.sink.source_text
        ),
        DepKind::Waw => format!(
            "consider privatizing {} or splitting the loop so each location is written once",
            d.source.array
        ),
    }
}

pub fn generate_precise_remarks(deps: &[Dependence], _k: &Kernel) -> Vec<PreciseRemark> {
    deps.iter()
        .map(|d| PreciseRemark {
            dep: d.clone(),
            message: format!(
                "{} {} dependence between {} and {}",
                d.confidence.as_str(),
                d.kind.long_name(),
                endpoint(&d.source),
                endpoint(&d.sink)
            ),
            suggestion: suggestion(d),
        })
        .collect()
}

/// Analyze `k` and return its precise remarks ready for a prompt.
pub fn precise_remark_set(k: &Kernel) -> RemarkSet {
    let deps = analyze_dependences(k);
    let remarks = generate_precise_remarks(&deps, k).iter().map(|p| p.to_remark(&k.name)).collect::<Vec<_>>();
    dedup(remarks).with_origin(format!("precise:{}", k.file_name()))
}
