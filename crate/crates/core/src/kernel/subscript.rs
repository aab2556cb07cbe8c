use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::{Expr, ExprKind};

/// Affine form `sum(coeffs[v] * v) + constant`. Zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineExpr {
    pub coeffs: BTreeMap<String, i64>,
    pub constant: i64,
}

impl AffineExpr {
    pub fn constant(c: i64) -> Self {
        AffineExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), 1);
        AffineExpr { coeffs, constant: 0 }
    }

    pub fn coeff(&self, var: &str) -> i64 {
        self.coeffs.get(var).copied().unwrap_or(0)
    }

    /// Coefficients of every symbol other than `var`.
    pub fn coeffs_without(&self, var: &str) -> BTreeMap<&str, i64> {
        self.coeffs
            .iter()
            .filter(|(k, _)| k.as_str() != var)
            .map(|(k, v)| (k.as_str(), *v))
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn checked_add(&self, other: &AffineExpr) -> Option<AffineExpr> {
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            let e = coeffs.entry(k.clone()).or_insert(0);
            *e = e.checked_add(*v)?;
        }
        coeffs.retain(|_, v| *v != 0);
        Some(AffineExpr { coeffs, constant: self.constant.checked_add(other.constant)? })
    }

    fn checked_scale(&self, k: i64) -> Option<AffineExpr> {
        let mut coeffs = BTreeMap::new();
        for (name, v) in &self.coeffs {
            let s = v.checked_mul(k)?;
            if s != 0 {
                coeffs.insert(name.clone(), s);
            }
        }
        Some(AffineExpr { coeffs, constant: self.constant.checked_mul(k)? })
    }

    /// Evaluate with every symbol bound through `value_of`.
    pub fn eval(&self, value_of: impl Fn(&str) -> i64) -> i64 {
        self.coeffs.iter().fold(self.constant, |acc, (k, v)| acc + v * value_of(k))
    }
}

/// A normalized array subscript.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexExpr {
    Affine(AffineExpr),
    /// Anything we cannot express linearly; keeps the raw source text.
    NonAffine { text: String },
}

impl IndexExpr {
    pub fn as_affine(&self) -> Option<&AffineExpr> {
        match self {
            IndexExpr::Affine(a) => Some(a),
            IndexExpr::NonAffine { .. } => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, IndexExpr::Affine(_))
    }
}

/// Fold an integer expression into affine form. Total: anything that is not a
/// sum of integer-scaled identifiers and integer literals becomes `NonAffine`.
pub fn normalize_subscript(expr: &Expr, source: &str) -> IndexExpr {
    match affine_of(expr) {
        Some(a) => IndexExpr::Affine(a),
        None => IndexExpr::NonAffine { text: expr.text(source).to_string() },
    }
}

fn affine_of(expr: &Expr) -> Option<AffineExpr> {
    match &expr.kind {
        ExprKind::Int(v) => Some(AffineExpr::constant(*v)),
        ExprKind::Ident(name) => Some(AffineExpr::var(name)),
        ExprKind::Unary { op: "-", operand } => affine_of(operand)?.checked_scale(-1),
        ExprKind::Unary { op: "+", operand } => affine_of(operand),
        ExprKind::Binary { op, lhs, rhs } => {
            let (l, r) = (affine_of(lhs)?, affine_of(rhs)?);
            match *op {
                "+" => l.checked_add(&r),
                "-" => l.checked_add(&r.checked_scale(-1)?),
                "*" if l.is_constant() => r.checked_scale(l.constant),
                "*" if r.is_constant() => l.checked_scale(r.constant),
                _ => None,
            }
        }
        _ => None,
    }
}
