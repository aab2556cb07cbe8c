mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use remark_forge::dependence::{
    analyze_dependences, analyze_dependences_with, brute_force_dependences, generate_precise_remarks,
    AnalysisOptions, Confidence, Dependence, Distance,
};
use remark_forge::kernel::{parse_kernel, Kernel};

use common::{any_affine_kernel, render, siv_kernel, Stmt, TRIP};

fn kernel(stmts: &[Stmt]) -> Kernel {
    parse_kernel(&render(stmts), "gen.c").expect("generated kernels parse")
}

/// (statement ordinal, position within the statement) of an access.
fn identity(k: &Kernel, id: usize) -> (usize, usize) {
    for s in &k.nest.body {
        if let Some(pos) = s.accesses().position(|a| a.id == id) {
            return (s.ordinal, pos);
        }
    }
    unreachable!("access id {id} not in body")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn analysis_matches_oracle_on_strong_siv(stmts in siv_kernel()) {
        let k = kernel(&stmts);
        let got: Vec<_> = analyze_dependences(&k).iter().map(Dependence::signature).collect();
        let want: Vec<_> = brute_force_dependences(&k, TRIP).unwrap().iter().map(Dependence::signature).collect();
        prop_assert_eq!(got, want, "kernel:\n{}", render(&stmts));
        prop_assert!(analyze_dependences(&k).iter().all(|d| d.confidence == Confidence::Proven));
    }

    #[test]
    fn every_oracle_conflict_is_reported(stmts in any_affine_kernel()) {
        let k = kernel(&stmts);
        let reported: BTreeSet<(usize, usize)> = analyze_dependences(&k)
            .iter()
            .map(|d| (d.source.id.min(d.sink.id), d.source.id.max(d.sink.id)))
            .collect();
        for d in brute_force_dependences(&k, TRIP).unwrap() {
            let pair = (d.source.id.min(d.sink.id), d.source.id.max(d.sink.id));
            prop_assert!(reported.contains(&pair), "missed {:?} in\n{}", d.signature(), render(&stmts));
        }
    }

    #[test]
    fn swapping_statements_flips_only_same_iteration_order(stmts in any_affine_kernel().prop_filter("two statements", |s| s.len() >= 2)) {
        let mut swapped = stmts.clone();
        swapped.swap(0, 1);
        let (k, ks) = (kernel(&stmts), kernel(&swapped));
        let relabel = |o: usize| match o { 0 => 1, 1 => 0, o => o };
        let opts = AnalysisOptions { include_loop_independent: true };

        let view = |k: &Kernel, swap: bool| -> BTreeSet<_> {
            analyze_dependences_with(k, &opts)
                .into_iter()
                .map(|d| {
                    let (mut s, mut t) = (identity(k, d.source.id), identity(k, d.sink.id));
                    if swap {
                        s.0 = relabel(s.0);
                        t.0 = relabel(t.0);
                    }
                    (s, t, d.distance, d.kind)
                })
                .collect()
        };
        let before = view(&k, false);
        let after = view(&ks, true);
        for (s, t, dist, kind) in &before {
            let flips = *dist == Distance::Known(0) && ((s.0 == 0 && t.0 == 1) || (s.0 == 1 && t.0 == 0));
            if flips {
                let back = after.iter().find(|(s2, t2, d2, _)| s2 == t && t2 == s && *d2 == Distance::Known(0));
                let (_, _, _, k2) = back.expect("reversed loop-independent dependence");
                prop_assert!(*k2 != *kind || *kind == remark_forge::dependence::DepKind::Waw);
            } else if *dist != Distance::Unknown {
                prop_assert!(after.contains(&(*s, *t, *dist, *kind)), "lost {:?}", (s, t, dist, kind));
            }
        }
    }

    #[test]
    fn precise_remarks_are_deterministic(stmts in any_affine_kernel()) {
        let k = kernel(&stmts);
        let a = generate_precise_remarks(&analyze_dependences(&k), &k);
        let b = generate_precise_remarks(&analyze_dependences(&kernel(&stmts)), &k);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn bundled_war_kernel_has_one_proven_war() {
    let k = Kernel::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/kernels/s241.c")).unwrap();
    let deps = analyze_dependences(&k);
    assert_eq!(deps.len(), 1);
    let d = &deps[0];
    assert_eq!(d.kind.to_string(), "WAR");
    assert_eq!((d.source.source_text.as_str(), d.sink.source_text.as_str()), ("a[i+1]", "a[i]"));
    assert_eq!(d.distance, Distance::Known(1));
    let oracle = brute_force_dependences(&k, 16).unwrap();
    assert_eq!(oracle.iter().map(Dependence::signature).collect::<Vec<_>>(), vec![d.signature()]);
}
