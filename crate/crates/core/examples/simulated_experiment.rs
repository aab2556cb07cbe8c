//! A small matrix over the bundled kernels with a simulated model that
//! succeeds more often when it sees remarks.

use std::collections::BTreeMap;

use remark_forge::agent::{RemarkMode, SimRate, SimulatedBackend, SimulationConfig};
use remark_forge::experiment::{
    compute_metrics, render_report, run_experiment, ExperimentPlan, MetricsOptions, ReportFormat, ResultsStore,
    RunOptions,
};
use remark_forge::validator::{RunnerSpec, Toolchain};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let dir = env!("CARGO_MANIFEST_DIR");
    let tc = Toolchain::clang(RunnerSpec::small());
    if !tc.available() {
        eprintln!("clang not found");
        std::process::exit(3);
    }
    let plan = ExperimentPlan {
        compilers: vec!["clang".into()],
        remark_modes: vec![RemarkMode::None, RemarkMode::Stock, RemarkMode::Precise],
        temperatures: vec![0.2, 0.8],
        trials_per_loop: 2,
        benchmark_dir: format!("{dir}/kernels").into(),
        seed: 1,
        max_lint_attempts: 3,
    };
    let rate = |mode, p| SimRate { benchmark: None, mode: Some(mode), temperature: None, p };
    let backend = SimulatedBackend::new(SimulationConfig {
        fix_dir: format!("{dir}/kernels/fixes").into(),
        rates: vec![rate(RemarkMode::None, 0.1), rate(RemarkMode::Stock, 0.4), rate(RemarkMode::Precise, 0.8)],
        default_p: 0.0,
        seed: 5,
    });
    let store = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        store_dir: store.path().into(),
        toolchains: BTreeMap::from([("clang".to_string(), tc)]),
        workers: 4,
        scratch_root: store.path().join("scratch"),
    };
    let summary = run_experiment(&plan, &backend, &opts).unwrap();
    eprintln!("{} written, {} failed", summary.written, summary.failed.len());
    let records = ResultsStore::load(store.path()).unwrap().records;
    print!("{}", render_report(&compute_metrics(&records, &MetricsOptions::default()), ReportFormat::Markdown));
}
