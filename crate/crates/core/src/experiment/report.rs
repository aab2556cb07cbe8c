use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::MetricsTable;
use crate::agent::RemarkMode;
use crate::remark::RemarkSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format {other:?} (expected markdown, csv or json)")),
        }
    }
}

pub fn render_report(table: &MetricsTable, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => markdown(table),
        ReportFormat::Csv => csv(table),
        ReportFormat::Json => serde_json::to_string_pretty(table).expect("metrics serialize") + "\n",
    }
}

pub fn compiler_label(name: &str) -> String {
    match name {
        "clang" => "Clang".into(),
        "intel" => "Intel".into(),
        other => other.into(),
    }
}

pub fn mode_label(mode: RemarkMode) -> &'static str {
    match mode {
        RemarkMode::None => "No Remarks",
        RemarkMode::Stock => "Remarks",
        RemarkMode::Precise => "Precise Remarks",
    }
}

/// Two decimals; anything that rounds to zero prints unsigned.
pub fn format_delta(points: f64) -> String {
    let s = format!("{points:.2}");
    if s.trim_start_matches('-') == "0.00" {
        "0.00".into()
    } else if points > 0.0 {
        format!("+{s}")
    } else {
        s
    }
}

pub fn format_rate(percent: f64) -> String {
    format!("{percent:.2}%")
}

fn header(out: &mut String, first: &str, second: &str, temps: &[f64]) {
    out.push_str(&format!("| {first} | {second} |"));
    for t in temps {
        let _ = write!(out, " T={t} |");
    }
    out.push_str("\n|---|---|");
    for _ in temps {
        out.push_str("---:|");
    }
    out.push('\n');
}

fn sorted_temps(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let bits: BTreeSet<u64> = it.map(f64::to_bits).collect();
    let mut temps: Vec<f64> = bits.into_iter().map(f64::from_bits).collect();
    temps.sort_by(f64::total_cmp);
    temps
}

fn row(out: &mut String, first: &str, second: &str, temps: &[f64], cells: &BTreeMap<u64, String>) {
    let _ = write!(out, "| {first} | {second} |");
    for t in temps {
        let _ = write!(out, " {} |", cells.get(&t.to_bits()).map_or("-", String::as_str));
    }
    out.push('\n');
}

fn markdown(table: &MetricsTable) -> String {
    let how = table.aggregation.describe();
    let mut out = format!("## Vectorization success rate ({how})\n\n");

    let temps = sorted_temps(table.success.iter().map(|r| r.temperature));
    header(&mut out, "Compiler", "Config", &temps);
    let mut groups: Vec<(&str, RemarkMode)> = Vec::new();
    for r in &table.success {
        if !groups.contains(&(r.compiler.as_str(), r.remark_mode)) {
            groups.push((&r.compiler, r.remark_mode));
        }
    }
    for (compiler, mode) in groups {
        let cells = table
            .success
            .iter()
            .filter(|r| r.compiler == compiler && r.remark_mode == mode)
            .map(|r| (r.temperature.to_bits(), format_rate(r.success_rate)))
            .collect();
        row(&mut out, &compiler_label(compiler), mode_label(mode), &temps, &cells);
    }

    let _ = write!(out, "\n## Success rate difference with and without remarks, by remark type (percentage points, {how})\n\n");
    let temps = sorted_temps(table.deltas.iter().map(|r| r.temperature));
    header(&mut out, "Source", "Remark", &temps);
    let mut compilers_per_family: BTreeMap<RemarkSource, BTreeSet<&str>> = BTreeMap::new();
    for d in &table.deltas {
        compilers_per_family.entry(d.family).or_default().insert(&d.compiler);
    }
    let mut lines: Vec<(String, &str, BTreeMap<u64, String>)> = Vec::new();
    for d in &table.deltas {
        let mut source = d.family.label().to_string();
        if compilers_per_family[&d.family].len() > 1 {
            source = format!("{source} ({})", d.compiler);
        }
        let label = d.category.label();
        match lines.iter_mut().find(|(s, l, _)| *s == source && *l == label) {
            Some((_, _, cells)) => {
                cells.insert(d.temperature.to_bits(), format_delta(d.delta));
            }
            None => {
                lines.push((source, label, BTreeMap::from([(d.temperature.to_bits(), format_delta(d.delta))])));
            }
        }
    }
    for (source, label, cells) in &lines {
        row(&mut out, source, label, &temps, cells);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One flat table; `table` is `success` or `delta`. Floats keep full precision.
fn csv(table: &MetricsTable) -> String {
    let agg = serde_json::to_value(table.aggregation).expect("enum serializes");
    let agg = agg.as_str().unwrap_or_default();
    let mut out =
        String::from("table,aggregation,compiler,remark_mode,family,category,temperature,value,benchmarks,trials,vectorized\n");
    for r in &table.success {
        let _ = writeln!(
            out,
            "success,{agg},{},{},,,{},{},{},{},{}",
            csv_field(&r.compiler),
            r.remark_mode,
            r.temperature,
            r.success_rate,
            r.benchmarks,
            r.trials,
            r.vectorized
        );
    }
    for d in &table.deltas {
        let _ = writeln!(
            out,
            "delta,{agg},{},,{},{},{},{},{},,",
            csv_field(&d.compiler),
            d.family,
            csv_field(d.category.name()),
            d.temperature,
            d.delta,
            d.benchmarks
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::metrics::{DeltaRow, RateRow};
    use crate::remark::RemarkCategory;

    fn rate(mode: RemarkMode, t: f64, v: f64) -> RateRow {
        RateRow {
            compiler: "clang".into(),
            remark_mode: mode,
            temperature: t,
            success_rate: v,
            benchmarks: 1,
            trials: 100,
            vectorized: 0,
        }
    }

    #[test]
    fn delta_formatting() {
        assert_eq!(format_delta(45.0), "+45.00");
        assert_eq!(format_delta(0.0), "0.00");
        assert_eq!(format_delta(-0.001), "0.00");
        assert_eq!(format_delta(-2.0), "-2.00");
        assert_eq!(format_delta(-0.08), "-0.08");
        assert_eq!(format_rate(0.64), "0.64%");
    }

    #[test]
    fn empty_metrics_render_headers_only() {
        let md = render_report(&MetricsTable::default(), ReportFormat::Markdown);
        assert!(md.contains("| Compiler | Config |\n|---|---|\n"));
        assert!(md.ends_with("| Source | Remark |\n|---|---|\n"));
        let csv = render_report(&MetricsTable::default(), ReportFormat::Csv);
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn missing_cells_are_dashes() {
        let t = MetricsTable {
            success: vec![rate(RemarkMode::None, 0.2, 1.0), rate(RemarkMode::Stock, 0.8, 2.0)],
            ..Default::default()
        };
        let md = render_report(&t, ReportFormat::Markdown);
        assert!(md.contains("| Clang | No Remarks | 1.00% | - |\n| Clang | Remarks | - | 2.00% |\n"), "{md}");
    }

    #[test]
    fn json_round_trips() {
        let t = MetricsTable {
            success: vec![rate(RemarkMode::Precise, 1.2, 1.0 / 3.0)],
            deltas: vec![DeltaRow {
                family: RemarkSource::Precise,
                compiler: "clang".into(),
                category: RemarkCategory::WriteAfterRead,
                temperature: 0.2,
                delta: 45.0,
                benchmarks: 2,
            }],
            ..Default::default()
        };
        let back: MetricsTable = serde_json::from_str(&render_report(&t, ReportFormat::Json)).unwrap();
        assert_eq!(back, t);
        let csv = render_report(&t, ReportFormat::Csv);
        assert!(csv.contains("success,benchmark-mean,clang,precise,,,1.2,0.3333333333333333,1,100,0\n"), "{csv}");
        assert!(csv.contains("delta,benchmark-mean,clang,,precise,WriteAfterRead,0.2,45,2,,\n"), "{csv}");
    }
}
