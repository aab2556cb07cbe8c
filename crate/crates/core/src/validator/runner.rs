use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ValidatorError;
use crate::kernel::{ElemType, Kernel};

/// Shape of the synthesized test driver.
///
/// Initialization is a pure function of (array, flat row-major index `n`):
/// real arrays get `1 + (n % 7) * 0.25`, integer arrays get `(n * 13) % array_len`.
/// After one call of the kernel each array written by the original kernel is
/// summed in `double` and printed as `CHK <array> <sum>` with `%.6e`, in
/// declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunnerSpec {
    /// Value of `LEN`.
    pub array_len: usize,
    /// Value of `LEN2`, used by two-dimensional kernels.
    pub array_len_2d: usize,
}

impl Default for RunnerSpec {
    fn default() -> Self {
        RunnerSpec { array_len: 32000, array_len_2d: 256 }
    }
}

impl RunnerSpec {
    /// The small configuration used by tests.
    pub fn small() -> Self {
        RunnerSpec { array_len: 256, array_len_2d: 16 }
    }
}

/// Arrays whose checksums are compared, in declaration order.
pub fn checked_arrays(k: &Kernel) -> Vec<String> {
    let written = k.written_arrays();
    k.globals.iter().filter(|g| written.contains(&g.name.as_str())).map(|g| g.name.clone()).collect()
}

/// A complete C program: `source` followed by a `main` that initializes the
/// globals declared by `original`, calls the kernel once and prints checksums.
pub fn synthesize_runner(original: &Kernel, source: &str, spec: &RunnerSpec) -> Result<String, ValidatorError> {
    let mut unknown: Vec<String> = Vec::new();
    for a in original.nest.accesses() {
        let declared = original.global(&a.array).is_some_and(|g| !g.dims.is_empty());
        if !declared && !unknown.contains(&a.array) {
            unknown.push(a.array.clone());
        }
    }
    if !unknown.is_empty() {
        return Err(ValidatorError::UnknownArrays(unknown));
    }

    let mut p = String::new();
    p.push_str("#include <stdio.h>\n#include <stddef.h>\n");
    let _ = writeln!(p, "#define LEN {}\n#define LEN2 {}", spec.array_len, spec.array_len_2d);
    p.push_str(source);
    if !source.ends_with('\n') {
        p.push('\n');
    }

    p.push_str("\nstatic void rf_init(void)\n{\n");
    for g in original.globals.iter().filter(|g| !g.dims.is_empty()) {
        let elem = format!("{}{}", g.name, "[0]".repeat(g.dims.len()));
        let value = match g.elem {
            ElemType::Real => "1.0 + (double)(n % 7) * 0.25".to_string(),
            ElemType::Integer => format!("(n * 13) % {}", spec.array_len),
        };
        let _ = writeln!(
            p,
            "    {{\n        __typeof__({elem}) *p = (__typeof__({elem}) *){name};\n        \
             for (size_t n = 0; n < sizeof({name}) / sizeof({elem}); n++)\n            \
             p[n] = (__typeof__({elem}))({value});\n    }}",
            name = g.name
        );
    }
    p.push_str("}\n\nint main(void)\n{\n    rf_init();\n");
    let _ = writeln!(p, "    {}();", original.name);
    for name in checked_arrays(original) {
        let g = original.global(&name).expect("checked arrays are declared");
        let elem = format!("{}{}", g.name, "[0]".repeat(g.dims.len()));
        let _ = writeln!(
            p,
            "    {{\n        double s = 0.0;\n        __typeof__({elem}) *p = (__typeof__({elem}) *){name};\n        \
             for (size_t n = 0; n < sizeof({name}) / sizeof({elem}); n++)\n            s += (double)p[n];\n        \
             printf(\"CHK {name} %.6e\\n\", s);\n    }}"
        );
    }
    p.push_str("    return 0;\n}\n");
    Ok(p)
}

/// `CHK <array> <value>` lines from a runner's stdout.
pub fn parse_checksums(stdout: &str) -> BTreeMap<String, f64> {
    stdout
        .lines()
        .filter_map(|l| {
            let mut parts = l.split_whitespace();
            (parts.next()? == "CHK").then_some(())?;
            let name = parts.next()?.to_string();
            let value = parts.next()?.parse().ok()?;
            Some((name, value))
        })
        .collect()
}
