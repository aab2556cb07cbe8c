use serde_yaml::Value;

use super::{CategoryMap, Remark, RemarkKind, RemarkSource};
use crate::kernel::SourceLoc;

/// Result of reading one opt-record stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClangRecordParse {
    pub remarks: Vec<Remark>,
    /// Documents skipped because they lacked `Pass` or `Name` or were not YAML.
    pub malformed: usize,
}

impl ClangRecordParse {
    pub fn parse(text: &str, map: &CategoryMap) -> ClangRecordParse {
        let mut out = ClangRecordParse::default();
        for (tag, body) in split_documents(text) {
            match parse_document(tag, &body, map) {
                Ok(Some(r)) => out.remarks.push(r),
                Ok(None) => {}
                Err(()) => out.malformed += 1,
            }
        }
        if out.malformed > 0 {
            log::warn!("skipped {} malformed optimization record(s)", out.malformed);
        }
        out
    }
}

/// Vectorizer remarks from a Clang `-fsave-optimization-record` YAML stream.
pub fn parse_clang_opt_record(text: &str) -> Vec<Remark> {
    ClangRecordParse::parse(text, &CategoryMap::default()).remarks
}

fn split_documents(text: &str) -> Vec<(&str, String)> {
    let mut docs = Vec::new();
    let mut current: Option<(&str, String)> = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("---") {
            if let Some(doc) = current.take() {
                docs.push(doc);
            }
            let tag = rest.trim().trim_start_matches('!');
            current = Some((tag, String::new()));
        } else if line.trim_end() == "..." {
            if let Some(doc) = current.take() {
                docs.push(doc);
            }
        } else if let Some((_, body)) = current.as_mut() {
            body.push_str(line);
            body.push('\n');
        }
    }
    docs.extend(current);
    docs
}

fn kind_of(tag: &str) -> Option<RemarkKind> {
    match tag {
        "Passed" => Some(RemarkKind::Passed),
        "Missed" => Some(RemarkKind::Missed),
        t if t.starts_with("Analysis") => Some(RemarkKind::Analysis),
        _ => None,
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn debug_loc(v: &Value) -> Option<SourceLoc> {
    let file = scalar(v.get("File")?)?;
    let line = v.get("Line")?.as_u64()? as u32;
    let col = v.get("Column").and_then(Value::as_u64).unwrap_or(0) as u32;
    Some(SourceLoc::new(file, line, col))
}

fn parse_document(tag: &str, body: &str, map: &CategoryMap) -> Result<Option<Remark>, ()> {
    let doc: Value = serde_yaml::from_str(body).map_err(|_| ())?;
    let pass = doc.get("Pass").and_then(scalar).ok_or(())?;
    let name = doc.get("Name").and_then(scalar).ok_or(())?;
    if !pass.contains("loop-vectorize") {
        return Ok(None);
    }
    let kind = kind_of(tag).ok_or(())?;

    let mut args = Vec::new();
    if let Some(Value::Sequence(items)) = doc.get("Args") {
        for item in items {
            let Value::Mapping(m) = item else { continue };
            for (k, v) in m {
                let (Some(k), Some(v)) = (scalar(k), scalar(v)) else { continue };
                if k != "DebugLoc" {
                    args.push((k, v));
                }
            }
        }
    }
    let message: String = args.iter().map(|(_, v)| v.as_str()).collect();

    Ok(Some(Remark {
        compiler: RemarkSource::Clang,
        kind,
        category: map.clang_category(&name),
        pass,
        raw_name: name,
        message,
        function: doc.get("Function").and_then(scalar).unwrap_or_default(),
        loc: doc.get("DebugLoc").and_then(debug_loc),
        args,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::remark::RemarkCategory;

    const SAMPLE: &str = "\
--- !Missed
Pass:            loop-vectorize
Name:            UnsafeDep
DebugLoc:        { File: tsvc.c, Line: 117, Column: 13 }
Function:        s241
Args:
  - String:          unsafe dependent memory operations in loop
...
--- !Missed
Pass:            inline
Name:            NoDefinition
Function:        s241
Args:
  - Callee:          foo
...
--- !Passed
Pass:            loop-vectorize
Name:            Vectorized
DebugLoc:        { File: 'dir/k.c', Line: 9, Column: 5 }
Function:        k
Args:
  - String:          'vectorized loop (vectorization width: '
  - VectorizationFactor: '4'
  - String:          ')'
  - DebugLoc:        { File: k.c, Line: 3, Column: 1 }
...
--- !Missed
Pass:            loop-vectorize
Function:        k
...
";

    #[test]
    fn parses_vectorizer_documents() {
        let parsed = ClangRecordParse::parse(SAMPLE, &CategoryMap::default());
        assert_eq!(parsed.malformed, 1);
        assert_eq!(parsed.remarks.len(), 2);

        let r = &parsed.remarks[0];
        assert_eq!(r.kind, RemarkKind::Missed);
        assert_eq!(r.category, RemarkCategory::UnsafeDependency);
        assert_eq!(r.loc, Some(SourceLoc::new("tsvc.c", 117, 13)));
        assert_eq!(r.message, "unsafe dependent memory operations in loop");

        let v = &parsed.remarks[1];
        assert_eq!(v.category, RemarkCategory::Other("Vectorized".into()));
        assert_eq!(v.message, "vectorized loop (vectorization width: 4)");
        assert_eq!(v.loc, Some(SourceLoc::new("dir/k.c", 9, 5)));
        assert!(v.is_vectorization_success());
    }

    #[test]
    fn garbage_is_not_fatal() {
        assert!(parse_clang_opt_record("").is_empty());
        let parsed = ClangRecordParse::parse("--- !Missed\n: : [\n...\n", &CategoryMap::default());
        assert_eq!(parsed.malformed, 1);
    }
}
