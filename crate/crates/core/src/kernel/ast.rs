//! Surface syntax produced by the parser before loop-nest lowering.

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Expr {
    pub fn text<'s>(&self, source: &'s str) -> &'s str {
        &source[self.start..self.end]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Ident(String),
    Index { array: String, subs: Vec<Expr> },
    Unary { op: &'static str, operand: Box<Expr> },
    Binary { op: &'static str, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { name: String, args: Vec<Expr> },
    Ternary { cond: Box<Expr>, then: Box<Expr>, els: Box<Expr> },
    Cast { ty: String, operand: Box<Expr> },
    IncDec { op: &'static str, target: Box<Expr> },
}

#[derive(Debug, Clone)]
pub(crate) struct ForHeader {
    pub var: String,
    pub lower: Expr,
    pub cmp: &'static str,
    pub upper: Expr,
    pub step: i64,
}

#[derive(Debug, Clone)]
pub(crate) enum CStmt {
    Block(Vec<CStmt>),
    For {
        header: ForHeader,
        body: Box<CStmt>,
        line: u32,
        col: u32,
        end_line: u32,
    },
    If {
        cond: Expr,
        then: Box<CStmt>,
        els: Option<Box<CStmt>>,
    },
    Assign {
        target: Expr,
        op: &'static str,
        value: Option<Expr>,
    },
    Decl {
        name: String,
        init: Option<Expr>,
    },
    Expr(Expr),
    Jump {
        what: String,
        line: u32,
        col: u32,
    },
    Return {
        value: Option<Expr>,
        line: u32,
        col: u32,
    },
    Empty,
}
