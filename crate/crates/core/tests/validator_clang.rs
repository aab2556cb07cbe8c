use std::path::PathBuf;

use remark_forge::kernel::Kernel;
use remark_forge::remark::{detect_vectorized, LoopTarget, RemarkCategory};
use remark_forge::validator::{synthesize_runner, Lint, RunnerSpec, Toolchain, ValidatorError, Verdict};

fn clang() -> Option<Toolchain> {
    let tc = Toolchain::clang(RunnerSpec::small());
    if tc.available() {
        Some(tc)
    } else {
        eprintln!("clang not found; skipping");
        None
    }
}

fn kernel_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("kernels").join(rel)
}

fn load(rel: &str) -> Kernel {
    Kernel::from_path(kernel_path(rel)).unwrap()
}

#[test]
fn lint_reports_line_numbers() {
    let Some(tc) = clang() else { return };
    let dir = tempfile::tempdir().unwrap();
    let k = load("s241.c");
    assert_eq!(tc.lint(&k.source, "s241.c", dir.path()).unwrap(), Lint::Clean);

    let broken = k.source.replace("d[i];\n        b[i]", "d[i]\n        b[i]");
    match tc.lint(&broken, "s241.c", dir.path()).unwrap() {
        Lint::Diagnostics(d) => assert!(d.contains("s241.c:10:"), "{d}"),
        Lint::Clean => panic!("missing semicolon accepted"),
    }
    assert!(matches!(tc.lint("", "empty.c", dir.path()).unwrap(), Lint::Diagnostics(_)));
}

#[test]
fn records_show_dependence_then_success() {
    let Some(tc) = clang() else { return };
    let dir = tempfile::tempdir().unwrap();
    let k = load("s241.c");
    let before = tc.compile_with_records(&k.source, "s241.c", dir.path()).unwrap();
    assert!(before.remarks.categories().contains(&RemarkCategory::UnsafeDependency));
    assert!(!detect_vectorized(&before.remarks.remarks, &LoopTarget::of(&k)));

    let fixed = load("fixes/s241.c");
    let after = tc.compile_with_records(&fixed.source, "s241.c", dir.path()).unwrap();
    assert!(detect_vectorized(&after.remarks.remarks, &LoopTarget::of(&fixed)));

    let ill_typed = "void s241(void) { int x = undefined_name; }\n";
    assert!(matches!(
        tc.compile_with_records(ill_typed, "s241.c", dir.path()),
        Err(ValidatorError::CompileFailed { .. })
    ));
}

#[test]
fn every_bundled_kernel_matches_itself() {
    let Some(tc) = clang() else { return };
    let dir = tempfile::tempdir().unwrap();
    let mut names: Vec<_> = std::fs::read_dir(kernel_path(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .collect();
    names.sort();
    for path in names {
        let k = Kernel::from_path(&path).unwrap();
        let v = tc.differential_test(&k, &k.source, dir.path()).unwrap();
        assert_eq!(v, Verdict::Match, "{}", path.display());
    }
}

#[test]
fn fixes_match_and_guard_removal_does_not() {
    let Some(tc) = clang() else { return };
    let dir = tempfile::tempdir().unwrap();
    for name in ["s241.c", "output_dep.c"] {
        let k = load(name);
        let fix = std::fs::read_to_string(kernel_path(&format!("fixes/{name}"))).unwrap();
        assert_eq!(tc.differential_test(&k, &fix, dir.path()).unwrap(), Verdict::Match, "{name}");
    }

    let k = load("guarded_shift.c");
    let unguarded = k.source.replace("if (b[i] > 1.5f)\n", "");
    assert_ne!(unguarded, k.source);
    let Verdict::Mismatch(m) = tc.differential_test(&k, &unguarded, dir.path()).unwrap() else {
        panic!("dropping the guard went unnoticed");
    };
    assert_eq!(m.array.as_deref(), Some("a"));
}

#[test]
fn runner_output_is_reproducible() {
    let Some(tc) = clang() else { return };
    let k = load("s241.c");
    let spec = RunnerSpec::small();
    assert_eq!(synthesize_runner(&k, &k.source, &spec).unwrap(), synthesize_runner(&k, &k.source, &spec).unwrap());
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = tc.checksums(&k, &k.source, true, d1.path()).unwrap().unwrap();
    let b = tc.checksums(&k, &k.source, true, d2.path()).unwrap().unwrap();
    assert_eq!(a, b);
    assert_eq!(a.keys().collect::<Vec<_>>(), vec!["a", "b"]);
}
