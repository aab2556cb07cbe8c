use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::store::StoreRecord;
use crate::agent::{Outcome, RemarkMode};
use crate::remark::{RemarkCategory, RemarkSource};

/// How per-trial outcomes are folded into a group rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Unweighted mean of per-benchmark rates.
    #[default]
    BenchmarkMean,
    /// Vectorized trials over all trials in the group.
    Pooled,
}

impl Aggregation {
    pub fn describe(&self) -> &'static str {
        match self {
            Aggregation::BenchmarkMean => "per-benchmark mean",
            Aggregation::Pooled => "pooled trials",
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "benchmark-mean" => Ok(Aggregation::BenchmarkMean),
            "pooled" => Ok(Aggregation::Pooled),
            other => Err(format!("unknown aggregation {other:?} (expected benchmark-mean or pooled)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetricsOptions {
    #[serde(default)]
    pub aggregation: Aggregation,
    /// Drop `BackendError` trials from denominators.
    #[serde(default)]
    pub exclude_backend_errors: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub compiler: String,
    pub remark_mode: RemarkMode,
    pub temperature: f64,
    /// Percentage in [0, 100].
    pub success_rate: f64,
    pub benchmarks: usize,
    pub trials: usize,
    pub vectorized: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    /// Which remark family the category belongs to (table block).
    pub family: RemarkSource,
    pub compiler: String,
    pub category: RemarkCategory,
    pub temperature: f64,
    /// Percentage points, remark-bearing mode minus `None`.
    pub delta: f64,
    pub benchmarks: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsTable {
    pub aggregation: Aggregation,
    pub success: Vec<RateRow>,
    pub deltas: Vec<DeltaRow>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    vectorized: usize,
    trials: usize,
}

impl Tally {
    fn add(&mut self, r: &StoreRecord, opts: &MetricsOptions) {
        if opts.exclude_backend_errors && r.outcome == Outcome::BackendError {
            return;
        }
        self.trials += 1;
        if r.outcome == Outcome::Vectorized {
            self.vectorized += 1;
        }
    }

    fn rate(&self) -> f64 {
        self.vectorized as f64 / self.trials as f64
    }
}

type GroupKey = (String, RemarkMode, u64);

/// compiler × mode × temperature → benchmark → tally.
fn tallies(records: &[StoreRecord], opts: &MetricsOptions) -> BTreeMap<GroupKey, BTreeMap<String, Tally>> {
    let mut out: BTreeMap<GroupKey, BTreeMap<String, Tally>> = BTreeMap::new();
    for r in records {
        let group = (r.compiler.clone(), r.remark_mode, r.temperature.to_bits());
        out.entry(group).or_default().entry(r.benchmark.clone()).or_default().add(r, opts);
    }
    for per_bench in out.values_mut() {
        per_bench.retain(|_, t| t.trials > 0);
    }
    out.retain(|_, b| !b.is_empty());
    out
}

/// Fold a set of per-benchmark tallies into one percentage.
fn aggregate<'a>(tallies: impl Iterator<Item = &'a Tally>, how: Aggregation) -> Option<f64> {
    let ts: Vec<&Tally> = tallies.collect();
    if ts.is_empty() {
        return None;
    }
    Some(match how {
        Aggregation::BenchmarkMean => 100.0 * ts.iter().map(|t| t.rate()).sum::<f64>() / ts.len() as f64,
        Aggregation::Pooled => {
            let v: usize = ts.iter().map(|t| t.vectorized).sum();
            let n: usize = ts.iter().map(|t| t.trials).sum();
            100.0 * v as f64 / n as f64
        }
    })
}

fn temp_order(a: f64, b: f64) -> std::cmp::Ordering {
    a.total_cmp(&b)
}

/// Table 1 rows, sorted by compiler, mode and temperature. Empty groups are omitted.
pub fn success_rate(records: &[StoreRecord], opts: &MetricsOptions) -> Vec<RateRow> {
    let mut rows: Vec<RateRow> = tallies(records, opts)
        .into_iter()
        .filter_map(|((compiler, remark_mode, bits), per_bench)| {
            let success_rate = aggregate(per_bench.values(), opts.aggregation)?;
            Some(RateRow {
                compiler,
                remark_mode,
                temperature: f64::from_bits(bits),
                success_rate,
                benchmarks: per_bench.len(),
                trials: per_bench.values().map(|t| t.trials).sum(),
                vectorized: per_bench.values().map(|t| t.vectorized).sum(),
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        (&a.compiler, a.remark_mode)
            .cmp(&(&b.compiler, b.remark_mode))
            .then(temp_order(a.temperature, b.temperature))
    });
    rows
}

fn family_rank(f: RemarkSource) -> usize {
    match f {
        RemarkSource::Intel => 0,
        RemarkSource::Clang => 1,
        RemarkSource::Precise => 2,
    }
}

/// Table 2 rows. A benchmark counts toward category `c` when its baseline
/// compile (or precise analysis) produced `c`; precise categories compare
/// `Precise` against `None`, the rest compare `Stock` against `None`.
/// Unnamed (`Other`) categories are not reported.
pub fn remark_delta(records: &[StoreRecord], opts: &MetricsOptions) -> Vec<DeltaRow> {
    let groups = tallies(records, opts);

    // compiler → benchmark → categories
    let mut present: BTreeMap<&str, BTreeMap<&str, BTreeSet<&RemarkCategory>>> = BTreeMap::new();
    for r in records {
        let cats = present.entry(&r.compiler).or_default().entry(&r.benchmark).or_default();
        cats.extend(r.remark_categories.iter().filter(|c| !c.is_other()));
    }

    let mut temps: BTreeMap<&str, BTreeSet<u64>> = BTreeMap::new();
    for (compiler, _, bits) in groups.keys() {
        temps.entry(compiler).or_default().insert(*bits);
    }

    let mut rows = Vec::new();
    for (compiler, per_bench) in &present {
        let mut categories: BTreeSet<&RemarkCategory> = BTreeSet::new();
        per_bench.values().for_each(|cs| categories.extend(cs.iter().copied()));
        for category in categories {
            let Some(family) = category.family() else { continue };
            let with_mode = if family == RemarkSource::Precise { RemarkMode::Precise } else { RemarkMode::Stock };
            for bits in temps.get(compiler).into_iter().flatten() {
                let (Some(with), Some(without)) = (
                    groups.get(&(compiler.to_string(), with_mode, *bits)),
                    groups.get(&(compiler.to_string(), RemarkMode::None, *bits)),
                ) else {
                    continue;
                };
                let benches: Vec<&str> = per_bench
                    .iter()
                    .filter(|(b, cs)| cs.contains(category) && with.contains_key(**b) && without.contains_key(**b))
                    .map(|(b, _)| *b)
                    .collect();
                let (Some(w), Some(wo)) = (
                    aggregate(benches.iter().map(|b| &with[*b]), opts.aggregation),
                    aggregate(benches.iter().map(|b| &without[*b]), opts.aggregation),
                ) else {
                    continue;
                };
                rows.push(DeltaRow {
                    family,
                    compiler: compiler.to_string(),
                    category: category.clone(),
                    temperature: f64::from_bits(*bits),
                    delta: w - wo,
                    benchmarks: benches.len(),
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        family_rank(a.family)
            .cmp(&family_rank(b.family))
            .then(a.category.table_rank().cmp(&b.category.table_rank()))
            .then(a.compiler.cmp(&b.compiler))
            .then(temp_order(a.temperature, b.temperature))
    });
    rows
}

pub fn compute_metrics(records: &[StoreRecord], opts: &MetricsOptions) -> MetricsTable {
    MetricsTable {
        aggregation: opts.aggregation,
        success: success_rate(records, opts),
        deltas: remark_delta(records, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trials(bench: &str, mode: RemarkMode, temp: f64, hits: u32, n: u32, cats: &[RemarkCategory]) -> Vec<StoreRecord> {
        (0..n)
            .map(|trial| StoreRecord {
                benchmark: bench.into(),
                compiler: "clang".into(),
                remark_mode: mode,
                temperature: temp,
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

    #[test]
    fn mean_of_benchmark_rates() {
        let mut rs = trials("a", RemarkMode::Stock, 0.2, 3, 100, &[]);
        rs.extend(trials("b", RemarkMode::Stock, 0.2, 2, 100, &[]));
        let rows = success_rate(&rs, &MetricsOptions::default());
        assert_eq!(rows.len(), 1);
        assert!((rows[0].success_rate - 2.5).abs() < 1e-12);
        assert_eq!((rows[0].benchmarks, rows[0].trials, rows[0].vectorized), (2, 200, 5));
    }

    #[test]
    fn pooled_differs_when_trial_counts_differ() {
        let mut rs = trials("a", RemarkMode::None, 0.2, 1, 1, &[]);
        rs.extend(trials("b", RemarkMode::None, 0.2, 0, 3, &[]));
        let mean = success_rate(&rs, &MetricsOptions::default())[0].success_rate;
        let pooled =
            success_rate(&rs, &MetricsOptions { aggregation: Aggregation::Pooled, ..Default::default() })[0].success_rate;
        assert_eq!(mean, 50.0);
        assert_eq!(pooled, 25.0);
    }

    #[test]
    fn backend_errors_count_unless_excluded() {
        let mut rs = trials("a", RemarkMode::None, 0.2, 1, 2, &[]);
        rs[1].outcome = Outcome::BackendError;
        assert_eq!(success_rate(&rs, &MetricsOptions::default())[0].success_rate, 50.0);
        let strict = MetricsOptions { exclude_backend_errors: true, ..Default::default() };
        assert_eq!(success_rate(&rs, &strict)[0].success_rate, 100.0);
    }

    #[test]
    fn delta_by_hand() {
        let war = [RemarkCategory::UnsafeDependency];
        let mut rs = trials("a", RemarkMode::Stock, 0.2, 10, 100, &war);
        rs.extend(trials("b", RemarkMode::Stock, 0.2, 2, 100, &war));
        rs.extend(trials("a", RemarkMode::None, 0.2, 5, 100, &war));
        rs.extend(trials("b", RemarkMode::None, 0.2, 1, 100, &war));
        let d = remark_delta(&rs, &MetricsOptions::default());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].family, RemarkSource::Clang);
        assert!((d[0].delta - 3.0).abs() < 1e-12);
        assert_eq!(d[0].benchmarks, 2);
    }

    #[test]
    fn precise_categories_use_precise_mode_and_other_is_skipped() {
        let cats = [RemarkCategory::WriteAfterRead, RemarkCategory::Other("MissedDetails".into())];
        let mut rs = trials("a", RemarkMode::Precise, 0.2, 50, 100, &cats);
        rs.extend(trials("a", RemarkMode::Stock, 0.2, 100, 100, &cats));
        rs.extend(trials("a", RemarkMode::None, 0.2, 5, 100, &cats));
        let d = remark_delta(&rs, &MetricsOptions::default());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].category, RemarkCategory::WriteAfterRead);
        assert!((d[0].delta - 45.0).abs() < 1e-12);
    }

    #[test]
    fn equal_rates_give_exact_zero() {
        let cats = [RemarkCategory::EarlyExit];
        let mut rs = trials("a", RemarkMode::Stock, 0.8, 7, 30, &cats);
        rs.extend(trials("a", RemarkMode::None, 0.8, 7, 30, &cats));
        assert_eq!(remark_delta(&rs, &MetricsOptions::default())[0].delta, 0.0);
    }

    #[test]
    fn empty_store_has_no_rows() {
        assert_eq!(compute_metrics(&[], &MetricsOptions::default()), MetricsTable::default());
    }
}
