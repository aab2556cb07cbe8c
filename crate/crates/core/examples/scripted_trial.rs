//! One trial with a canned model reply: the temporary-variable fix for s241.

use remark_forge::agent::{run_trial, script_key, Baseline, RemarkMode, ScriptedBackend, TrialConfig};
use remark_forge::kernel::Kernel;
use remark_forge::validator::{RunnerSpec, Toolchain};

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let tc = Toolchain::clang(RunnerSpec::small());
    if !tc.available() {
        eprintln!("clang not found");
        std::process::exit(3);
    }
    let k = Kernel::from_path(format!("{dir}/kernels/s241.c")).unwrap();
    let fix = std::fs::read_to_string(format!("{dir}/kernels/fixes/s241.c")).unwrap();
    let backend = ScriptedBackend::in_memory()
        .with(script_key("s241", RemarkMode::Precise, 0.2, 0), format!("```c\n{fix}```"));

    let scratch = tempfile::tempdir().unwrap();
    let baseline = Baseline::compute(&k, &tc, scratch.path()).unwrap();
    let cfg = TrialConfig::new("s241", "clang", RemarkMode::Precise, 0.2);
    let rec = run_trial(&k, &cfg, &baseline, &backend, &tc, scratch.path()).unwrap();
    println!("outcome {:?} after {} attempt(s) in {} ms", rec.outcome, rec.attempts, rec.wall_ms);
    for r in &rec.remarks_shown {
        println!("shown: {}", r.render());
    }
}
