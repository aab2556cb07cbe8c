//! Synthetic result stores and a flat recomputation of the tables.

use rand::seq::SliceRandom;
use rand::Rng;

use remark_forge::agent::{Outcome, RemarkMode};
use remark_forge::experiment::{Aggregation, MetricsOptions, StoreRecord};
use remark_forge::remark::{RemarkCategory, RemarkSource};

pub const TEMPS: [f64; 3] = [0.2, 0.8, 1.2];

/// Successes per 10 000 trials (100 benchmarks x 100 trials) for each published cell.
pub const TABLE1: [(&str, RemarkMode, [u32; 3]); 4] = [
    ("clang", RemarkMode::None, [20, 80, 145]),
    ("clang", RemarkMode::Stock, [64, 268, 393]),
    ("intel", RemarkMode::None, [110, 238, 367]),
    ("intel", RemarkMode::Stock, [459, 695, 783]),
];

pub fn record(
    bench: &str,
    compiler: &str,
    mode: RemarkMode,
    temperature: f64,
    trial: u32,
    outcome: Outcome,
    cats: &[RemarkCategory],
) -> StoreRecord {
    StoreRecord {
        benchmark: bench.into(),
        compiler: compiler.into(),
        remark_mode: mode,
        temperature,
        trial,
        attempts: 1,
        outcome,
        remark_categories: cats.to_vec(),
        wall_ms: 0,
        draft_sha256: None,
        differential: None,
        diagnostics: String::new(),
    }
}

/// `n` trials of which the first `hits` vectorized.
pub fn block(
    bench: &str,
    compiler: &str,
    mode: RemarkMode,
    temperature: f64,
    hits: u32,
    n: u32,
    cats: &[RemarkCategory],
) -> Vec<StoreRecord> {
    (0..n)
        .map(|t| {
            let o = if t < hits { Outcome::Vectorized } else { Outcome::NotVectorized };
            record(bench, compiler, mode, temperature, t, o, cats)
        })
        .collect()
}

/// 100 benchmarks x 100 trials per cell; successes scattered at random.
pub fn table1_store(rng: &mut impl Rng) -> Vec<StoreRecord> {
    let mut out = Vec::new();
    for (compiler, mode, totals) in TABLE1 {
        for (t, total) in TEMPS.iter().zip(totals) {
            let mut hits = [0u32; 100];
            let mut placed = 0;
            while placed < total {
                let b = rng.gen_range(0..100);
                if hits[b] < 100 {
                    hits[b] += 1;
                    placed += 1;
                }
            }
            for (b, h) in hits.iter().enumerate() {
                out.extend(block(&format!("b{b:03}"), compiler, mode, *t, *h, 100, &[]));
            }
        }
    }
    out
}

/// Intel Output Dependence at T=0.8 averages +26 points; precise WriteAfterRead at T=0.2 averages +45.
pub fn table2_store() -> Vec<StoreRecord> {
    let out_dep = [RemarkCategory::OutputDependence];
    let war = [RemarkCategory::UnsafeDependency, RemarkCategory::WriteAfterRead];
    let mut v = Vec::new();
    for (bench, with, without) in [("i1", 30, 4), ("i2", 40, 14)] {
        v.extend(block(bench, "intel", RemarkMode::Stock, 0.8, with, 100, &out_dep));
        v.extend(block(bench, "intel", RemarkMode::None, 0.8, without, 100, &out_dep));
    }
    for (bench, with, without) in [("c1", 50, 0), ("c2", 40, 0)] {
        v.extend(block(bench, "clang", RemarkMode::Precise, 0.2, with, 100, &war));
        v.extend(block(bench, "clang", RemarkMode::Stock, 0.2, without, 100, &war));
        v.extend(block(bench, "clang", RemarkMode::None, 0.2, without, 100, &war));
    }
    v
}

pub fn random_store(rng: &mut impl Rng) -> Vec<StoreRecord> {
    let compilers = ["clang", "intel"];
    let modes = [RemarkMode::None, RemarkMode::Stock, RemarkMode::Precise];
    let outcomes = Outcome::ALL;
    let mut pool: Vec<RemarkCategory> = RemarkCategory::NAMED.to_vec();
    pool.push(RemarkCategory::Other("MissedDetails".into()));
    let mut out = Vec::new();
    for b in 0..rng.gen_range(1..=6) {
        let bench = format!("k{b}");
        let compiler = *compilers.choose(rng).unwrap();
        let n_cats = rng.gen_range(0..=4);
        let cats: Vec<RemarkCategory> = pool.choose_multiple(rng, n_cats).cloned().collect();
        for mode in modes {
            if rng.gen_bool(0.2) {
                continue;
            }
            for t in &TEMPS[..rng.gen_range(1..=3)] {
                for trial in 0..rng.gen_range(0..=10) {
                    let o = *outcomes.choose(rng).unwrap();
                    out.push(record(&bench, compiler, mode, *t, trial, o, &cats));
                }
            }
        }
    }
    out.shuffle(rng);
    out
}

fn counts(rs: &[&StoreRecord], opts: &MetricsOptions) -> (usize, usize) {
    let kept: Vec<&&StoreRecord> =
        rs.iter().filter(|r| !(opts.exclude_backend_errors && r.outcome == Outcome::BackendError)).collect();
    (kept.iter().filter(|r| r.outcome == Outcome::Vectorized).count(), kept.len())
}

fn benches_of(rs: &[&StoreRecord]) -> Vec<String> {
    let mut b: Vec<String> = rs.iter().map(|r| r.benchmark.clone()).collect();
    b.sort();
    b.dedup();
    b
}

/// Percentage over a group, or None when no trial counts.
fn group_rate(rs: &[&StoreRecord], benches: &[String], opts: &MetricsOptions) -> Option<f64> {
    let mut rates = Vec::new();
    let (mut v, mut n) = (0, 0);
    for b in benches {
        let mine: Vec<&StoreRecord> = rs.iter().copied().filter(|r| &r.benchmark == b).collect();
        let (bv, bn) = counts(&mine, opts);
        if bn > 0 {
            rates.push(bv as f64 / bn as f64);
            v += bv;
            n += bn;
        }
    }
    if rates.is_empty() {
        return None;
    }
    Some(match opts.aggregation {
        Aggregation::BenchmarkMean => 100.0 * rates.iter().sum::<f64>() / rates.len() as f64,
        Aggregation::Pooled => 100.0 * v as f64 / n as f64,
    })
}

fn has_trials(rs: &[&StoreRecord], bench: &str, opts: &MetricsOptions) -> bool {
    let mine: Vec<&StoreRecord> = rs.iter().copied().filter(|r| r.benchmark == bench).collect();
    counts(&mine, opts).1 > 0
}

/// (compiler, mode, temperature, rate), unordered.
pub fn flat_success(records: &[StoreRecord], opts: &MetricsOptions) -> Vec<(String, RemarkMode, f64, f64)> {
    let mut out = Vec::new();
    for c in ["clang", "intel"] {
        for m in [RemarkMode::None, RemarkMode::Stock, RemarkMode::Precise] {
            for t in TEMPS {
                let rs: Vec<&StoreRecord> =
                    records.iter().filter(|r| r.compiler == c && r.remark_mode == m && r.temperature == t).collect();
                if let Some(rate) = group_rate(&rs, &benches_of(&rs), opts) {
                    out.push((c.to_string(), m, t, rate));
                }
            }
        }
    }
    out
}

/// (compiler, category, temperature, delta), unordered.
pub fn flat_delta(records: &[StoreRecord], opts: &MetricsOptions) -> Vec<(String, RemarkCategory, f64, f64)> {
    let mut out = Vec::new();
    for c in ["clang", "intel"] {
        for cat in RemarkCategory::NAMED {
            let with_mode =
                if cat.family() == Some(RemarkSource::Precise) { RemarkMode::Precise } else { RemarkMode::Stock };
            for t in TEMPS {
                let with: Vec<&StoreRecord> = records
                    .iter()
                    .filter(|r| r.compiler == c && r.remark_mode == with_mode && r.temperature == t)
                    .collect();
                let without: Vec<&StoreRecord> = records
                    .iter()
                    .filter(|r| r.compiler == c && r.remark_mode == RemarkMode::None && r.temperature == t)
                    .collect();
                let carrying: Vec<String> = benches_of(
                    &records.iter().filter(|r| r.compiler == c && r.remark_categories.contains(&cat)).collect::<Vec<_>>(),
                );
                let benches: Vec<String> = carrying
                    .into_iter()
                    .filter(|b| has_trials(&with, b, opts) && has_trials(&without, b, opts))
                    .collect();
                if let (Some(w), Some(wo)) = (group_rate(&with, &benches, opts), group_rate(&without, &benches, opts)) {
                    out.push((c.to_string(), cat.clone(), t, w - wo));
                }
            }
        }
    }
    out
}
