use super::{Confidence, DepKind, Dependence, Distance};
use crate::kernel::{AffineExpr, ArrayAccess, IndexExpr, Kernel};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Also report same-iteration (distance 0) dependences.
    pub include_loop_independent: bool,
}

/// Outcome of the subscript test for one ordered access pair `(x, y)`,
/// `x` textually first. Distances are `k_y - k_x` in iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Test {
    Independent,
    Unknown,
    /// Every pair of iterations conflicts.
    All,
    Distance(i64),
}

struct Ctx<'a> {
    var: &'a str,
    step: i64,
    variant: &'a [String],
}

impl Ctx<'_> {
    fn mentions_variant(&self, a: &AffineExpr) -> bool {
        a.coeffs.keys().any(|k| self.variant.iter().any(|v| v == k))
    }

    fn dim(&self, x: &IndexExpr, y: &IndexExpr) -> Test {
        let (Some(x), Some(y)) = (x.as_affine(), y.as_affine()) else {
            return Test::Unknown;
        };
        if self.mentions_variant(x) || self.mentions_variant(y) {
            return Test::Unknown;
        }
        if x.coeffs_without(self.var) != y.coeffs_without(self.var) {
            return Test::Unknown;
        }
        let (ax, ay) = (x.coeff(self.var), y.coeff(self.var));
        if ax != ay {
            return Test::Unknown;
        }
        let diff = x.constant - y.constant;
        if ax == 0 {
            return if diff == 0 { Test::All } else { Test::Independent };
        }
        let den = ax * self.step;
        if diff % den != 0 {
            Test::Independent
        } else {
            Test::Distance(diff / den)
        }
    }

    fn pair(&self, x: &ArrayAccess, y: &ArrayAccess) -> Test {
        if x.subscripts.len() != y.subscripts.len() {
            return Test::Unknown;
        }
        let tests: Vec<Test> = x.subscripts.iter().zip(&y.subscripts).map(|(a, b)| self.dim(a, b)).collect();
        if tests.contains(&Test::Independent) {
            return Test::Independent;
        }
        if tests.contains(&Test::Unknown) {
            return Test::Unknown;
        }
        let mut dist = None;
        for t in tests {
            if let Test::Distance(d) = t {
                match dist {
                    Some(prev) if prev != d => return Test::Independent,
                    _ => dist = Some(d),
                }
            }
        }
        dist.map_or(Test::All, Test::Distance)
    }
}

pub fn analyze_dependences(k: &Kernel) -> Vec<Dependence> {
    analyze_dependences_with(k, &AnalysisOptions::default())
}

pub fn analyze_dependences_with(k: &Kernel, opts: &AnalysisOptions) -> Vec<Dependence> {
    let var = k.nest.innermost_var().to_string();
    let accesses: Vec<&ArrayAccess> = k.nest.accesses().collect();

    if !k.opaque_constructs.is_empty() {
        return k
            .written_arrays()
            .into_iter()
            .filter_map(|name| accesses.iter().find(|a| a.is_write() && a.array == name))
            .map(|w| Dependence {
                kind: DepKind::Waw,
                source: (*w).clone(),
                sink: (*w).clone(),
                distance: Distance::Unknown,
                var: var.clone(),
                confidence: Confidence::Assumed,
            })
            .collect();
    }

    let ctx = Ctx { var: &var, step: k.nest.innermost_step(), variant: &k.nest.variant_scalars };
    let trip = k.nest.trip_count();
    let mut out = Vec::new();
    let mut emit = |source: &ArrayAccess, sink: &ArrayAccess, distance: Distance, confidence: Confidence| {
        if let Some(kind) = DepKind::of(source.mode, sink.mode) {
            out.push(Dependence {
                kind,
                source: source.clone(),
                sink: sink.clone(),
                distance,
                var: var.clone(),
                confidence,
            });
        }
    };

    for (p, x) in accesses.iter().enumerate() {
        for y in &accesses[p..] {
            let same = std::ptr::eq(*x, *y);
            if x.array != y.array || (!x.is_write() && !y.is_write()) || (same && !x.is_write()) {
                continue;
            }
            let test = ctx.pair(x, y);
            let conditional = x.conditional || y.conditional;
            let confidence = if conditional { Confidence::Assumed } else { Confidence::Proven };
            let carried = |d: u64| if conditional { Distance::Unknown } else { Distance::Known(d) };
            match test {
                Test::Independent => {}
                Test::Unknown => emit(x, y, Distance::Unknown, Confidence::Assumed),
                Test::All => {
                    if trip.is_none_or(|t| t >= 2) {
                        emit(x, y, carried(1), confidence);
                        if !same {
                            emit(y, x, carried(1), confidence);
                        }
                    }
                    if opts.include_loop_independent && !same {
                        emit(x, y, Distance::Known(0), confidence);
                    }
                }
                Test::Distance(0) => {
                    if opts.include_loop_independent && !same {
                        emit(x, y, Distance::Known(0), confidence);
                    }
                }
                Test::Distance(d) => {
                    let gap = d.unsigned_abs();
                    if trip.is_some_and(|t| gap >= t) {
                        continue;
                    }
                    if d > 0 {
                        emit(x, y, carried(gap), confidence);
                    } else {
                        emit(y, x, carried(gap), confidence);
                    }
                }
            }
        }
    }
    out.sort_by_key(|d| (d.source.id, d.sink.id, d.distance));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_kernel;

    fn kernel(body: &str) -> Kernel {
        let src = format!("float a[100], b[100], c[100];\nint ip[100];\nvoid k(void)\n{{\n{body}\n}}\n");
        parse_kernel(&src, "f.c").unwrap()
    }

    fn summary(k: &Kernel) -> Vec<(DepKind, String, String, Distance, Confidence)> {
        analyze_dependences(k)
            .into_iter()
            .map(|d| (d.kind, d.source.source_text, d.sink.source_text, d.distance, d.confidence))
            .collect()
    }

    #[test]
    fn war_from_forward_read() {
        let k = kernel("for (int i = 0; i < 99; i++) a[i] = a[i+1] + b[i];");
        assert_eq!(
            summary(&k),
            vec![(DepKind::War, "a[i+1]".into(), "a[i]".into(), Distance::Known(1), Confidence::Proven)]
        );
    }

    #[test]
    fn raw_from_backward_read() {
        let k = kernel("for (int i = 0; i < 99; i++) a[i+1] = a[i] + 1;");
        assert_eq!(
            summary(&k),
            vec![(DepKind::Raw, "a[i+1]".into(), "a[i]".into(), Distance::Known(1), Confidence::Proven)]
        );
    }

    #[test]
    fn same_iteration_is_excluded_unless_requested() {
        let k = kernel("for (int i = 0; i < 99; i++) a[i] = a[i] * 2;");
        assert!(analyze_dependences(&k).is_empty());
        let all = analyze_dependences_with(&k, &AnalysisOptions { include_loop_independent: true });
        assert_eq!(all.len(), 1);
        assert_eq!((all[0].kind, all[0].distance), (DepKind::War, Distance::Known(0)));
    }

    #[test]
    fn step_scales_distance() {
        let k = kernel("for (int i = 0; i < 99; i += 2) a[i] = a[i+4] + 1;");
        assert_eq!(summary(&k)[0].3, Distance::Known(2));
        let k = kernel("for (int i = 0; i < 99; i += 2) a[i] = a[i+3] + 1;");
        assert!(summary(&k).is_empty());
    }

    #[test]
    fn zero_coefficient_conflicts_every_iteration() {
        let k = kernel("for (int i = 0; i < 99; i++) { a[0] = b[i]; c[i] = a[0]; }");
        let kinds: Vec<_> = summary(&k).into_iter().map(|s| (s.0, s.3)).collect();
        assert_eq!(
            kinds,
            vec![
                (DepKind::Waw, Distance::Known(1)),
                (DepKind::Raw, Distance::Known(1)),
                (DepKind::War, Distance::Known(1)),
            ]
        );
    }

    #[test]
    fn guards_and_indirection_are_assumed() {
        let k = kernel("for (int i = 0; i < 99; i++) { if (b[i] > 0) a[i] = a[i+1]; }");
        assert_eq!(summary(&k)[0].3, Distance::Unknown);
        assert_eq!(summary(&k)[0].4, Confidence::Assumed);
        assert_eq!(summary(&k)[0].0, DepKind::War);

        let k = kernel("for (int i = 0; i < 99; i++) a[ip[i]] = a[i] + 1;");
        let s = summary(&k);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].0, s[0].3, s[0].4), (DepKind::War, Distance::Unknown, Confidence::Assumed));
        assert_eq!((s[1].0, s[1].1.as_str(), s[1].2.as_str()), (DepKind::Waw, "a[ip[i]]", "a[ip[i]]"));
    }

    #[test]
    fn loop_variant_scalar_subscripts_are_assumed() {
        let k = kernel("for (int i = 0; i < 99; i++) { j++; a[j] = a[j+1]; }");
        assert!(summary(&k).iter().all(|s| s.4 == Confidence::Assumed));
        assert!(!summary(&k).is_empty());
    }

    #[test]
    fn opaque_kernels_report_one_waw_per_array() {
        let k = kernel("for (int i = 0; i < 99; i++) { a[i] = foo(b[i]); c[i] = a[i]; a[i+1] = 0; }");
        let s = summary(&k);
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|d| d.0 == DepKind::Waw && d.3 == Distance::Unknown && d.4 == Confidence::Assumed));
        assert_eq!(s[0].1, "a[i]");
        assert_eq!(s[1].1, "c[i]");
    }

    #[test]
    fn distance_beyond_trip_count_is_dropped() {
        let k = kernel("for (int i = 0; i < 4; i++) a[i] = a[i+4] + 1;");
        assert!(summary(&k).is_empty());
    }

    #[test]
    fn outer_dimension_separates_rows() {
        let src = "float aa[16][16];\nvoid k(void)\n{\nfor (int j = 0; j < 15; j++)\nfor (int i = 1; i < 16; i++) { aa[j][i] = aa[j+1][i-1]; aa[j][i] = aa[j][i-1] + 1; }\n}\n";
        let k = parse_kernel(src, "f.c").unwrap();
        let s = summary(&k);
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|d| d.0 == DepKind::Raw && d.2 == "aa[j][i-1]" && d.3 == Distance::Known(1)));
    }
}
