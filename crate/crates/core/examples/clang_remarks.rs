//! Compile a kernel with optimization records and print the vectorizer remarks.
//! Falls back to the bundled record when clang is not installed.

use remark_forge::remark::{detect_vectorized, parse_clang_opt_record, render_for_prompt, dedup, LoopTarget};
use remark_forge::kernel::Kernel;
use remark_forge::validator::{RunnerSpec, Toolchain};

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let path = std::env::args().nth(1).unwrap_or_else(|| format!("{dir}/kernels/s241.c"));
    let k = Kernel::from_path(&path).expect("kernel parses");
    let tc = Toolchain::clang(RunnerSpec::default());
    let remarks = if tc.available() {
        let scratch = tempfile::tempdir().unwrap();
        tc.compile_with_records(&k.source, k.file_name(), scratch.path()).expect("kernel compiles").remarks
    } else {
        eprintln!("clang not found; using the bundled s241 record");
        let text = std::fs::read_to_string(format!("{dir}/tests/fixtures/clang/s241.opt.yaml")).unwrap();
        dedup(parse_clang_opt_record(&text))
    };
    println!("{}", render_for_prompt(&remarks));
    println!("vectorized: {}", detect_vectorized(&remarks.remarks, &LoopTarget::of(&k)));
    println!("categories: {:?}", remarks.categories());
}
