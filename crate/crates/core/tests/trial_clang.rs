use std::path::PathBuf;

use remark_forge::agent::{
    run_trial, script_key, Baseline, Outcome, RecordingBackend, RemarkMode, Role, ScriptedBackend, TrialConfig,
};
use remark_forge::kernel::Kernel;
use remark_forge::remark::RemarkCategory;
use remark_forge::validator::{RunnerSpec, Toolchain};

fn kernels() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("kernels")
}

fn clang() -> Option<Toolchain> {
    let tc = Toolchain::clang(RunnerSpec::small());
    tc.available().then_some(tc).or_else(|| {
        eprintln!("clang not found; skipping");
        None
    })
}

fn fenced(code: &str) -> String {
    format!("Here is the rewrite.\n```c\n{code}```\n")
}

#[test]
fn scripted_fix_vectorizes_and_retries_carry_only_lint_output() {
    let Some(tc) = clang() else { return };
    let scratch = tempfile::tempdir().unwrap();
    let k = Kernel::from_path(kernels().join("s241.c")).unwrap();
    let baseline = Baseline::compute(&k, &tc, scratch.path()).unwrap();
    assert!(!baseline.vectorized);

    let fix = std::fs::read_to_string(kernels().join("fixes/s241.c")).unwrap();
    let key = script_key("s241", RemarkMode::Stock, 0.2, 0);
    let backend = RecordingBackend::new(
        ScriptedBackend::in_memory()
            .with(key.replace(".txt", ".1.txt"), "I would rather explain than code.")
            .with(key, fenced(&fix)),
    );
    let cfg = TrialConfig::new("s241", "clang", RemarkMode::Stock, 0.2);
    let rec = run_trial(&k, &cfg, &baseline, &backend, &tc, scratch.path()).unwrap();

    assert_eq!(rec.outcome, Outcome::Vectorized, "{}", rec.diagnostics);
    assert_eq!(rec.attempts, 2);
    assert!(rec.differential.as_ref().unwrap().is_match());
    assert!(rec.remark_categories_present.contains(&RemarkCategory::UnsafeDependency));
    assert!(rec.remark_categories_present.contains(&RemarkCategory::WriteAfterRead));

    let reqs = backend.requests();
    assert_eq!(reqs.len(), 2);
    let with_remarks = |m: &remark_forge::agent::Message| m.content.contains("Compiler optimization remarks");
    assert_eq!(reqs[1].messages.len(), 4);
    assert_eq!(reqs[1].messages[..2], reqs[0].messages[..]);
    assert_eq!(reqs[1].messages[2].role, Role::Assistant);
    assert!(!with_remarks(&reqs[1].messages[3]));
    assert_eq!(reqs[1].messages.iter().filter(|m| with_remarks(m)).count(), 1);
}

#[test]
fn dropping_a_guard_is_a_run_failure() {
    let Some(tc) = clang() else { return };
    let scratch = tempfile::tempdir().unwrap();
    let k = Kernel::from_path(kernels().join("guarded_shift.c")).unwrap();
    let baseline = Baseline::compute(&k, &tc, scratch.path()).unwrap();
    let broken = k.source.replace("if (b[i] > 1.5f)\n", "");
    let backend = ScriptedBackend::in_memory().with(script_key("guarded_shift", RemarkMode::None, 0.8, 0), fenced(&broken));
    let cfg = TrialConfig::new("guarded_shift", "clang", RemarkMode::None, 0.8);
    let rec = run_trial(&k, &cfg, &baseline, &backend, &tc, scratch.path()).unwrap();
    assert_eq!(rec.outcome, Outcome::RunFail);
    assert!(rec.remarks_shown.is_empty());
}

#[test]
fn unparseable_drafts_exhaust_three_attempts() {
    let Some(tc) = clang() else { return };
    let scratch = tempfile::tempdir().unwrap();
    let k = Kernel::from_path(kernels().join("s241.c")).unwrap();
    let baseline = Baseline::compute(&k, &tc, scratch.path()).unwrap();
    let backend = RecordingBackend::new(
        ScriptedBackend::in_memory().with(script_key("s241", RemarkMode::Precise, 1.2, 4), fenced("void s241(void) { for (;; }\n")),
    );
    let mut cfg = TrialConfig::new("s241", "clang", RemarkMode::Precise, 1.2);
    cfg.trial_index = 4;
    let rec = run_trial(&k, &cfg, &baseline, &backend, &tc, scratch.path()).unwrap();
    assert_eq!(rec.outcome, Outcome::SyntaxFail);
    assert_eq!(rec.attempts, 3);
    assert_eq!(backend.requests().len(), 3);
    assert!(rec.diagnostics.contains("error"), "{}", rec.diagnostics);
    assert!(rec.remarks_shown.iter().any(|r| r.category == RemarkCategory::WriteAfterRead));
    assert!(rec.remarks_shown.iter().all(|r| r.category != RemarkCategory::UnsafeDependency));
}

#[test]
fn missing_script_is_a_backend_error_outcome() {
    let Some(tc) = clang() else { return };
    let scratch = tempfile::tempdir().unwrap();
    let k = Kernel::from_path(kernels().join("s241.c")).unwrap();
    let baseline = Baseline::compute(&k, &tc, scratch.path()).unwrap();
    let cfg = TrialConfig::new("s241", "clang", RemarkMode::None, 0.2);
    let rec = run_trial(&k, &cfg, &baseline, &ScriptedBackend::in_memory(), &tc, scratch.path()).unwrap();
    assert_eq!(rec.outcome, Outcome::BackendError);
    assert_eq!(rec.attempts, 1);
}
