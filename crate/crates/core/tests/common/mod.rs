#![allow(dead_code)]

pub mod stores;

use proptest::prelude::*;
use rand::Rng;

pub const ARRAYS: [&str; 3] = ["a", "b", "c"];
pub const TRIP: u64 = 16;

/// `array[coef*i + constant]`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub array: usize,
    pub coef: i64,
    pub constant: i64,
}

impl Access {
    pub fn text(&self) -> String {
        let term = match self.coef {
            0 => String::new(),
            1 => "i".to_string(),
            -1 => "-i".to_string(),
            c => format!("{c}*i"),
        };
        let sub = match (term.is_empty(), self.constant) {
            (true, c) => c.to_string(),
            (false, 0) => term,
            (false, c) if c > 0 => format!("{term}+{c}"),
            (false, c) => format!("{term}{c}"),
        };
        format!("{}[{sub}]", ARRAYS[self.array])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub write: Access,
    pub reads: Vec<Access>,
}

impl Stmt {
    pub fn text(&self) -> String {
        let rhs = if self.reads.is_empty() {
            "1.0f".to_string()
        } else {
            self.reads.iter().map(Access::text).collect::<Vec<_>>().join(" + ")
        };
        format!("{} = {rhs};", self.write.text())
    }
}

pub fn render(stmts: &[Stmt]) -> String {
    let mut s = String::from("float a[64], b[64], c[64];\nvoid k(void)\n{\n");
    s.push_str(&format!("    for (int i = 0; i < {TRIP}; i++) {{\n"));
    for st in stmts {
        s.push_str("        ");
        s.push_str(&st.text());
        s.push('\n');
    }
    s.push_str("    }\n}\n");
    s
}

fn access_with(array: usize, coef: i64, constant: i64) -> Access {
    Access { array, coef, constant }
}

/// Kernels whose same-array accesses share one coefficient (strong SIV or ZIV).
pub fn siv_kernel() -> impl Strategy<Value = Vec<Stmt>> {
    let coefs = proptest::collection::vec(-3i64..=3, 3);
    coefs.prop_flat_map(|coefs| {
        let access = (0usize..3, -4i64..=4).prop_map(move |(a, c)| access_with(a, coefs[a], c));
        let stmt = (access.clone(), proptest::collection::vec(access, 0..=3))
            .prop_map(|(write, reads)| Stmt { write, reads });
        proptest::collection::vec(stmt, 1..=4)
    })
}

/// Kernels with independent coefficients per access (weak SIV and friends).
pub fn any_affine_kernel() -> impl Strategy<Value = Vec<Stmt>> {
    let access = (0usize..3, -3i64..=3, -4i64..=4).prop_map(|(a, k, c)| access_with(a, k, c));
    let stmt = (access.clone(), proptest::collection::vec(access, 0..=3))
        .prop_map(|(write, reads)| Stmt { write, reads });
    proptest::collection::vec(stmt, 1..=4)
}

/// Same distribution as [`siv_kernel`], driven by a plain RNG.
pub fn random_siv_kernel(rng: &mut impl Rng) -> Vec<Stmt> {
    let coefs: Vec<i64> = (0..3).map(|_| rng.gen_range(-3..=3)).collect();
    fn access(rng: &mut impl Rng, coefs: &[i64]) -> Access {
        let a = rng.gen_range(0..3);
        access_with(a, coefs[a], rng.gen_range(-4..=4))
    }
    let n = rng.gen_range(1..=4);
    (0..n)
        .map(|_| {
            let write = access(rng, &coefs);
            let n_reads = rng.gen_range(0..=3);
            let reads = (0..n_reads).map(|_| access(rng, &coefs)).collect();
            Stmt { write, reads }
        })
        .collect()
}
