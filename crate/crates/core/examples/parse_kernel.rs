//! Parse a kernel and print what the analysis sees.
//!
//! cargo run --example parse_kernel -- kernels/s241.c

use remark_forge::kernel::Kernel;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/kernels/s241.c").into());
    let k = match Kernel::from_path(&path) {
        Ok(k) => k,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    println!("function {} in {}", k.name, k.file_name());
    for g in &k.globals {
        println!("  global {} {:?}", g.name, g.dims);
    }
    let n = &k.nest;
    for ((var, step), b) in n.vars.iter().zip(&n.steps).zip(&n.bounds) {
        println!("  loop {var} step {step} from {:?} while {var} {} {:?}", b.lower, b.cmp, b.upper);
    }
    println!("  innermost header {}:{}", n.header.line, n.header.col);
    println!("  trip count {:?}", k.nest.trip_count());
    for s in &k.nest.body {
        for a in s.accesses() {
            println!("  stmt {} {:?} {} at {}:{}", s.ordinal, a.mode, a.source_text, a.loc.line, a.loc.col);
        }
    }
    for o in &k.opaque_constructs {
        println!("  opaque {} at {}:{}", o.what, o.loc.line, o.loc.col);
    }
}
