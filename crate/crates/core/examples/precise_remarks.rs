//! Print the dependence remarks an agent would see in precise mode.
//!
//! cargo run --example precise_remarks -- kernels/s211.c

use remark_forge::dependence::{analyze_dependences, generate_precise_remarks};
use remark_forge::kernel::Kernel;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/kernels/s241.c").into());
    let k = Kernel::from_path(&path).expect("kernel parses");
    let deps = analyze_dependences(&k);
    if deps.is_empty() {
        println!("(no loop-carried dependences)");
    }
    for r in generate_precise_remarks(&deps, &k) {
        println!("{}\n", r.text());
    }
}
