//! Check the subscript tests against loop simulation on one kernel.

use remark_forge::dependence::{analyze_dependences, brute_force_dependences, Dependence};
use remark_forge::kernel::parse_kernel;

const SRC: &str = "\
float a[64], b[64];
void k(void)
{
    for (int i = 0; i < 16; i++) {
        a[i+2] = b[i] + a[i];
        b[i] = a[i+1];
    }
}
";

fn main() {
    let k = parse_kernel(SRC, "k.c").unwrap();
    let fast = analyze_dependences(&k);
    let slow = brute_force_dependences(&k, 16).unwrap();
    for d in &fast {
        println!("{} {} -> {} distance {} ({})", d.kind, d.source.source_text, d.sink.source_text, d.distance, d.confidence.as_str());
    }
    let same = fast.iter().map(Dependence::signature).eq(slow.iter().map(Dependence::signature));
    println!("oracle agrees: {same}");
}
