//! Parse an Intel optimization report into canonical remarks.

use remark_forge::remark::{export_json, parse_intel_opt_report};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/intel/s241.optrpt").into());
    let text = std::fs::read_to_string(&path).expect("report readable");
    let remarks = parse_intel_opt_report(&text);
    for r in &remarks {
        println!("{}", r.render());
    }
    println!("{}", export_json(&remarks));
}
