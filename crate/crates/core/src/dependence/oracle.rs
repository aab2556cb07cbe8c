use std::collections::{BTreeMap, HashMap};

use super::{Confidence, DepKind, Dependence, DependenceError, Distance};
use crate::kernel::{ArrayAccess, Bound, IndexExpr, Kernel};

/// Simulate `trip` iterations of the innermost loop and report, for every
/// (source access, sink access) pair, the smallest loop-carried distance at
/// which they touch the same element.
///
/// Outer loop variables and other symbols are held at 0.
pub fn brute_force_dependences(k: &Kernel, trip: u64) -> Result<Vec<Dependence>, DependenceError> {
    let unsupported = |why: &str| Err(DependenceError::OracleUnsupported(why.to_string()));
    if trip < 2 {
        return unsupported("trip count below 2");
    }
    if !k.opaque_constructs.is_empty() {
        return unsupported("kernel has opaque constructs");
    }
    let accesses: Vec<&ArrayAccess> = k.nest.accesses().collect();
    if accesses.iter().any(|a| a.conditional) {
        return unsupported("kernel has conditional accesses");
    }
    if accesses.iter().any(|a| !a.is_affine()) {
        return unsupported("kernel has non-affine subscripts");
    }
    let variant = &k.nest.variant_scalars;
    if accesses.iter().flat_map(|a| &a.subscripts).any(|s| match s {
        IndexExpr::Affine(e) => e.coeffs.keys().any(|c| variant.contains(c)),
        IndexExpr::NonAffine { .. } => true,
    }) {
        return unsupported("subscript uses a scalar assigned in the loop");
    }

    let var = k.nest.innermost_var();
    let step = k.nest.innermost_step();
    let lower = match &k.nest.innermost_bounds().lower {
        Bound::Const(c) => *c,
        Bound::Symbolic(_) => 0,
    };

    // Every touch of an element as (iteration, position), in execution order.
    type Element<'a> = (&'a str, Vec<i64>);
    let mut touches: HashMap<Element, Vec<(u64, usize)>> = HashMap::new();
    for iter in 0..trip {
        let i = lower + iter as i64 * step;
        for (pos, a) in accesses.iter().enumerate() {
            let index: Vec<i64> = a
                .subscripts
                .iter()
                .map(|s| s.as_affine().expect("checked affine").eval(|v| if v == var { i } else { 0 }))
                .collect();
            touches.entry((a.array.as_str(), index)).or_default().push((iter, pos));
        }
    }

    let mut best: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for events in touches.values() {
        for (n, &(k1, p1)) in events.iter().enumerate() {
            for &(k2, p2) in &events[n + 1..] {
                if k2 == k1 || (!accesses[p1].is_write() && !accesses[p2].is_write()) {
                    continue;
                }
                let d = k2 - k1;
                best.entry((p1, p2)).and_modify(|b| *b = (*b).min(d)).or_insert(d);
            }
        }
    }

    let mut out: Vec<Dependence> = best
        .into_iter()
        .map(|((p1, p2), d)| {
            let (source, sink) = (accesses[p1], accesses[p2]);
            Dependence {
                kind: DepKind::of(source.mode, sink.mode).expect("one endpoint writes"),
                source: source.clone(),
                sink: sink.clone(),
                distance: Distance::Known(d),
                var: var.to_string(),
                confidence: Confidence::Proven,
            }
        })
        .collect();
    out.sort_by_key(|d| (d.source.id, d.sink.id, d.distance));
    Ok(out)
}
