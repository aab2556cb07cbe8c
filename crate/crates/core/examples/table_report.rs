//! Render both tables from hand-made records in every output format.

use remark_forge::agent::{Outcome, RemarkMode};
use remark_forge::experiment::{compute_metrics, render_report, Aggregation, MetricsOptions, ReportFormat, StoreRecord};
use remark_forge::remark::RemarkCategory;

fn trials(bench: &str, mode: RemarkMode, t: f64, hits: u32, cats: &[RemarkCategory]) -> Vec<StoreRecord> {
    (0..10)
        .map(|trial| StoreRecord {
            benchmark: bench.into(),
            compiler: "clang".into(),
            remark_mode: mode,
            temperature: t,
            trial,
            attempts: 1,
            outcome: if trial < hits { Outcome::Vectorized } else { Outcome::NotVectorized },
            remark_categories: cats.to_vec(),
            wall_ms: 0,
            draft_sha256: None,
            differential: None,
            diagnostics: String::new(),
        })
        .collect()
}

fn main() {
    let war = [RemarkCategory::UnsafeDependency, RemarkCategory::WriteAfterRead];
    let exit = [RemarkCategory::EarlyExit];
    let mut records = Vec::new();
    for t in [0.2, 0.8] {
        records.extend(trials("s241", RemarkMode::None, t, 0, &war));
        records.extend(trials("s241", RemarkMode::Stock, t, 1, &war));
        records.extend(trials("s241", RemarkMode::Precise, t, 6, &war));
        records.extend(trials("s482", RemarkMode::None, t, 1, &exit));
        records.extend(trials("s482", RemarkMode::Stock, t, 2, &exit));
    }
    for aggregation in [Aggregation::BenchmarkMean, Aggregation::Pooled] {
        let table = compute_metrics(&records, &MetricsOptions { aggregation, exclude_backend_errors: false });
        println!("{}", render_report(&table, ReportFormat::Markdown));
    }
    let table = compute_metrics(&records, &MetricsOptions::default());
    println!("{}", render_report(&table, ReportFormat::Csv));
    println!("{}", render_report(&table, ReportFormat::Json));
}
