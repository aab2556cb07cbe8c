use super::{CategoryMap, Remark, RemarkCategory, RemarkKind, RemarkSource};
use crate::kernel::SourceLoc;

const PASS: &str = "vec";

/// Vectorizer remarks from an Intel `-qopt-report` text report.
pub fn parse_intel_opt_report(text: &str) -> Vec<Remark> {
    parse_intel_opt_report_with(text, &CategoryMap::default())
}

struct Pending {
    raw_name: String,
    text: String,
    reason: String,
    details: Vec<String>,
    loc: Option<SourceLoc>,
}

pub fn parse_intel_opt_report_with(text: &str, map: &CategoryMap) -> Vec<Remark> {
    let mut out = Vec::new();
    let mut loops: Vec<Option<SourceLoc>> = Vec::new();
    let mut function = String::new();
    let mut pending: Option<Pending> = None;

    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("Begin optimization report for:") {
            flush(&mut pending, &function, map, &mut out);
            let rest = rest.trim();
            function = rest.split('(').next().unwrap_or(rest).trim().to_string();
        } else if let Some(rest) = line.strip_prefix("LOOP BEGIN") {
            flush(&mut pending, &function, map, &mut out);
            loops.push(header_loc(rest));
        } else if line.starts_with("LOOP END") {
            flush(&mut pending, &function, map, &mut out);
            loops.pop();
        } else if let Some((raw_name, body)) = remark_line(line) {
            let lower = body.to_lowercase();
            let loc = loops.last().cloned().flatten();
            if let Some(idx) = lower.find("not vectorized") {
                flush(&mut pending, &function, map, &mut out);
                let after = &body[idx + "not vectorized".len()..];
                let reason = after.trim_start_matches(':').trim().to_string();
                pending = Some(Pending { raw_name, text: body.to_string(), reason, details: Vec::new(), loc });
            } else if lower.contains("loop was vectorized") {
                flush(&mut pending, &function, map, &mut out);
                out.push(Remark {
                    compiler: RemarkSource::Intel,
                    kind: RemarkKind::Passed,
                    category: RemarkCategory::Other("Vectorized".into()),
                    pass: PASS.into(),
                    raw_name,
                    message: body.to_string(),
                    function: function.clone(),
                    loc,
                    args: Vec::new(),
                });
            } else if let Some(p) = pending.as_mut() {
                p.details.push(body.to_string());
            }
        }
    }
    flush(&mut pending, &function, map, &mut out);
    out
}

/// `remark #15344: text` to (`#15344`, `text`).
fn remark_line(line: &str) -> Option<(String, &str)> {
    let rest = line.strip_prefix("remark ")?;
    let (id, body) = rest.split_once(':')?;
    Some((id.trim().to_string(), body.trim()))
}

/// Parses ` at file(line,col)` and ` at file (line, col)`.
fn header_loc(rest: &str) -> Option<SourceLoc> {
    let rest = rest.trim().strip_prefix("at")?.trim();
    let open = rest.rfind('(')?;
    let file = rest[..open].trim();
    let inner = rest[open + 1..].trim_end().strip_suffix(')')?;
    let (l, c) = inner.split_once(',')?;
    Some(SourceLoc::new(file, l.trim().parse().ok()?, c.trim().parse().ok()?))
}

fn flush(pending: &mut Option<Pending>, function: &str, map: &CategoryMap, out: &mut Vec<Remark>) {
    let Some(p) = pending.take() else { return };
    let category = map
        .intel_category(&p.reason)
        .or_else(|| p.details.iter().find_map(|d| map.intel_category(d)))
        .unwrap_or_else(|| RemarkCategory::Other(p.reason.clone()));
    let mut message = p.text;
    for d in &p.details {
        message.push_str("; ");
        message.push_str(d);
    }
    let mut args = vec![("reason".to_string(), p.reason)];
    args.extend(p.details.into_iter().map(|d| ("detail".to_string(), d)));
    out.push(Remark {
        compiler: RemarkSource::Intel,
        kind: RemarkKind::Missed,
        category,
        pass: PASS.into(),
        raw_name: p.raw_name,
        message,
        function: function.to_string(),
        loc: p.loc,
        args,
    });
}
