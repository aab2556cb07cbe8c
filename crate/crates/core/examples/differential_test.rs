//! Compare a kernel with a correct and a broken rewrite. Needs clang.

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
    let broken = k.source.replace("a[i] * a[i+1]", "a[i] * a[i]");
    let scratch = tempfile::tempdir().unwrap();
    for (name, draft) in [("fix", &fix), ("broken", &broken)] {
        let v = tc.differential_test(&k, draft, scratch.path()).expect("reference builds");
        println!("{name}: {}", serde_json::to_string(&v).unwrap());
    }
}
