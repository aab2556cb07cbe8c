//! Restricted C loop kernels.
//!
//! A kernel is a translation unit holding global array declarations and one
//! function whose body contains a single loop nest of depth one or two. The
//! innermost loop body is lowered into an ordered list of [`Statement`]s, each
//! carrying the array accesses it performs with exact source locations and
//! normalized subscripts.

mod ast;
mod lexer;
mod parser;
mod subscript;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{Expr, ExprKind};
pub use subscript::{normalize_subscript, AffineExpr, IndexExpr};

use ast::{CStmt, ForHeader};
use parser::Parser;

/// Math routines that are pure with respect to memory; calls to anything else
/// make the loop body opaque to dependence analysis.
pub const PURE_MATH_FUNCTIONS: &[&str] = &[
    "sqrt", "sqrtf", "fabs", "fabsf", "abs", "exp", "expf", "log", "logf", "sin", "sinf", "cos",
    "cosf", "tan", "tanf", "pow", "powf", "fmin", "fminf", "fmax", "fmaxf", "floor", "floorf",
    "ceil", "ceilf",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("{file}:{line}:{col}: syntax error: {message}")]
    Syntax { file: String, line: u32, col: u32, message: String },
    #[error("{file}: no loop found in kernel function")]
    NoLoopFound { file: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceLoc {
    pub file: String,
    pub line: u32,
    pub col: u32,
}

impl SourceLoc {
    pub fn new(file: impl Into<String>, line: u32, col: u32) -> Self {
        SourceLoc { file: file.into(), line, col }
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

/// Inclusive range of source lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSpan {
    pub start: u32,
    pub end: u32,
}

impl LineSpan {
    pub fn contains(&self, line: u32) -> bool {
        (self.start..=self.end).contains(&line)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AccessMode {
    Read,
    Write,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArrayAccess {
    /// Position of the access in execution order over the whole body.
    pub id: usize,
    pub array: String,
    pub subscripts: Vec<IndexExpr>,
    pub mode: AccessMode,
    /// Points at the first character of the array identifier.
    pub loc: SourceLoc,
    /// Guarded by an `if`, the arm of a ternary, or the right side of `&&`/`||`.
    pub conditional: bool,
    pub stmt_ordinal: usize,
    pub source_text: String,
}

impl ArrayAccess {
    pub fn is_write(&self) -> bool {
        self.mode == AccessMode::Write
    }

    pub fn is_affine(&self) -> bool {
        self.subscripts.iter().all(IndexExpr::is_affine)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtTarget {
    Array(ArrayAccess),
    Scalar(String),
    /// Guard conditions and bare expressions: reads only.
    Effect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub ordinal: usize,
    pub target: StmtTarget,
    /// Reads in evaluation order; all happen before the write.
    pub reads: Vec<ArrayAccess>,
    pub conditional: bool,
    pub line: u32,
}

impl Statement {
    pub fn write(&self) -> Option<&ArrayAccess> {
        match &self.target {
            StmtTarget::Array(a) => Some(a),
            _ => None,
        }
    }

    /// Reads followed by the write, i.e. the order the statement touches memory.
    pub fn accesses(&self) -> impl Iterator<Item = &ArrayAccess> {
        self.reads.iter().chain(self.write())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    Const(i64),
    Symbolic(String),
}

impl Bound {
    pub fn as_const(&self) -> Option<i64> {
        match self {
            Bound::Const(v) => Some(*v),
            Bound::Symbolic(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopBounds {
    pub lower: Bound,
    pub upper: Bound,
    /// Comparison in the loop condition, with the loop variable on the left.
    pub cmp: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopNest {
    /// Outermost first; the last entry is the vectorization target.
    pub vars: Vec<String>,
    pub bounds: Vec<LoopBounds>,
    pub steps: Vec<i64>,
    pub body: Vec<Statement>,
    /// Location of the innermost `for` keyword.
    pub header: SourceLoc,
    /// Lines of the innermost loop, header through closing brace.
    pub span: LineSpan,
    /// Scalars assigned or declared inside the innermost body.
    pub variant_scalars: Vec<String>,
}

impl LoopNest {
    pub fn innermost_var(&self) -> &str {
        self.vars.last().expect("loop nest has at least one variable")
    }

    pub fn innermost_step(&self) -> i64 {
        *self.steps.last().expect("loop nest has at least one step")
    }

    pub fn innermost_bounds(&self) -> &LoopBounds {
        self.bounds.last().expect("loop nest has at least one bound")
    }

    /// Iteration count of the innermost loop when both bounds are literal.
    pub fn trip_count(&self) -> Option<u64> {
        let b = self.innermost_bounds();
        let (lo, hi, step) = (b.lower.as_const()?, b.upper.as_const()?, self.innermost_step());
        let span = match (b.cmp.as_str(), step > 0) {
            ("<", true) => hi - lo,
            ("<=", true) => hi - lo + 1,
            (">", false) => lo - hi,
            (">=", false) => lo - hi + 1,
            ("!=", _) => {
                let d = hi - lo;
                return (d % step == 0 && d / step >= 0).then(|| (d / step) as u64);
            }
            _ => return Some(0),
        };
        if span <= 0 {
            return Some(0);
        }
        let s = step.abs();
        Some(((span + s - 1) / s) as u64)
    }

    /// All accesses in execution order within one iteration.
    pub fn accesses(&self) -> impl Iterator<Item = &ArrayAccess> {
        self.body.iter().flat_map(Statement::accesses)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElemType {
    Real,
    Integer,
}

/// A file-scope variable declaration (array or scalar).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalArray {
    pub name: String,
    pub elem: ElemType,
    /// Dimension expressions as written; empty for scalars.
    pub dims: Vec<String>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpaqueConstruct {
    pub what: String,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub name: String,
    pub source: String,
    pub nest: LoopNest,
    pub file: String,
    pub params: Vec<String>,
    pub globals: Vec<GlobalArray>,
    /// Constructs inside the loop that the analysis cannot see through.
    pub opaque_constructs: Vec<OpaqueConstruct>,
}

impl Kernel {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Kernel, KernelError> {
        let path = path.as_ref();
        let source = std::fs::read_to_string(path).map_err(|e| KernelError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        parse_kernel(&source, &path.display().to_string())
    }

    /// Arrays written in the loop body, in order of first write.
    pub fn written_arrays(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in &self.nest.body {
            if let Some(w) = s.write() {
                if !out.contains(&w.array.as_str()) {
                    out.push(&w.array);
                }
            }
        }
        out
    }

    pub fn global(&self, name: &str) -> Option<&GlobalArray> {
        self.globals.iter().find(|g| g.name == name)
    }

    pub fn file_name(&self) -> &str {
        Path::new(&self.file).file_name().and_then(|s| s.to_str()).unwrap_or(&self.file)
    }
}

/// Parse one standalone expression (used for subscripts and in tests).
pub fn parse_expression(text: &str) -> Result<Expr, KernelError> {
    let mut p = Parser::new(text, "<expr>")?;
    let e = p.parse_expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_kernel(source: &str, file: &str) -> Result<Kernel, KernelError> {
    let unit = Parser::new(source, file)?.parse_unit()?;
    let func = unit.function;

    let mut loops = Vec::new();
    collect_loops(&func.body, &mut loops);
    let outer = match loops.as_slice() {
        [] => return Err(KernelError::NoLoopFound { file: file.to_string() }),
        [one] => *one,
        [_, second, ..] => return Err(loop_error(file, second, "expected a single loop nest")),
    };

    let mut levels = vec![outer];
    loop {
        let current: &CStmt = levels[levels.len() - 1];
        let CStmt::For { body, .. } = current else { unreachable!() };
        let mut inner = Vec::new();
        collect_loops(std::slice::from_ref(body.as_ref()), &mut inner);
        match inner.as_slice() {
            [] => break,
            [one] if levels.len() < 2 => levels.push(*one),
            [one] => return Err(loop_error(file, one, "loop nests deeper than two are not supported")),
            [_, second, ..] => return Err(loop_error(file, second, "expected a single inner loop")),
        }
    }

    let mut vars = Vec::new();
    let mut bounds = Vec::new();
    let mut steps = Vec::new();
    for l in &levels {
        let CStmt::For { header, .. } = l else { unreachable!() };
        if vars.contains(&header.var) {
            return Err(loop_error(file, l, "loop variables must be distinct"));
        }
        vars.push(header.var.clone());
        bounds.push(bounds_of(header, source));
        steps.push(header.step);
    }

    let innermost: &CStmt = levels[levels.len() - 1];
    let CStmt::For { body, line, col, end_line, .. } = innermost else { unreachable!() };
    let mut lower = Lowering { source, file, next_id: 0, body: Vec::new(), opaque: Vec::new(), variant: Vec::new() };
    lower.stmt(body, false);

    Ok(Kernel {
        name: func.name,
        source: source.to_string(),
        nest: LoopNest {
            vars,
            bounds,
            steps,
            body: lower.body,
            header: SourceLoc::new(file, *line, *col),
            span: LineSpan { start: *line, end: *end_line },
            variant_scalars: lower.variant,
        },
        file: file.to_string(),
        params: func.params,
        globals: unit.globals,
        opaque_constructs: lower.opaque,
    })
}

fn loop_error(file: &str, stmt: &CStmt, message: &str) -> KernelError {
    let (line, col) = match stmt {
        CStmt::For { line, col, .. } => (*line, *col),
        _ => (0, 0),
    };
    KernelError::Syntax { file: file.to_string(), line, col, message: message.to_string() }
}

/// Loops reachable from `stmts` without passing through another loop.
fn collect_loops<'a>(stmts: &'a [CStmt], out: &mut Vec<&'a CStmt>) {
    for s in stmts {
        match s {
            CStmt::For { .. } => out.push(s),
            CStmt::Block(b) => collect_loops(b, out),
            CStmt::If { then, els, .. } => {
                collect_loops(std::slice::from_ref(then.as_ref()), out);
                if let Some(e) = els {
                    collect_loops(std::slice::from_ref(e.as_ref()), out);
                }
            }
            _ => {}
        }
    }
}

fn bounds_of(h: &ForHeader, source: &str) -> LoopBounds {
    let bound = |e: &Expr| match normalize_subscript(e, source) {
        IndexExpr::Affine(a) if a.is_constant() => Bound::Const(a.constant),
        _ => Bound::Symbolic(e.text(source).to_string()),
    };
    LoopBounds { lower: bound(&h.lower), upper: bound(&h.upper), cmp: h.cmp.to_string() }
}

struct Lowering<'a> {
    source: &'a str,
    file: &'a str,
    next_id: usize,
    body: Vec<Statement>,
    opaque: Vec<OpaqueConstruct>,
    variant: Vec<String>,
}

impl<'a> Lowering<'a> {
    fn mark_variant(&mut self, name: &str) {
        if !self.variant.iter().any(|v| v == name) {
            self.variant.push(name.to_string());
        }
    }

    fn loc(&self, line: u32, col: u32) -> SourceLoc {
        SourceLoc::new(self.file, line, col)
    }

    fn access(&mut self, e: &Expr, mode: AccessMode, conditional: bool) -> ArrayAccess {
        let ExprKind::Index { array, subs } = &e.kind else {
            unreachable!("access() called on a non-index expression")
        };
        let id = self.next_id;
        self.next_id += 1;
        ArrayAccess {
            id,
            array: array.clone(),
            subscripts: subs.iter().map(|s| normalize_subscript(s, self.source)).collect(),
            mode,
            loc: self.loc(e.line, e.col),
            conditional,
            stmt_ordinal: self.body.len(),
            source_text: e.text(self.source).to_string(),
        }
    }

    fn reads(&mut self, e: &Expr, conditional: bool, out: &mut Vec<ArrayAccess>) {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Float(_) | ExprKind::Ident(_) => {}
            ExprKind::Index { subs, .. } => {
                for s in subs {
                    self.reads(s, conditional, out);
                }
                let a = self.access(e, AccessMode::Read, conditional);
                out.push(a);
            }
            ExprKind::Unary { operand, .. } | ExprKind::Cast { operand, .. } => {
                self.reads(operand, conditional, out)
            }
            ExprKind::IncDec { target, .. } => {
                self.reads(target, conditional, out);
                if let ExprKind::Ident(name) = &target.kind {
                    self.mark_variant(name);
                }
                if matches!(target.kind, ExprKind::Index { .. }) {
                    self.opaque.push(OpaqueConstruct {
                        what: "array update inside expression".into(),
                        loc: self.loc(e.line, e.col),
                    });
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                self.reads(lhs, conditional, out);
                let short_circuit = matches!(*op, "&&" | "||");
                self.reads(rhs, conditional || short_circuit, out);
            }
            ExprKind::Ternary { cond, then, els } => {
                self.reads(cond, conditional, out);
                self.reads(then, true, out);
                self.reads(els, true, out);
            }
            ExprKind::Call { name, args } => {
                if !PURE_MATH_FUNCTIONS.contains(&name.as_str()) {
                    self.opaque.push(OpaqueConstruct {
                        what: format!("call to {name}"),
                        loc: self.loc(e.line, e.col),
                    });
                }
                for a in args {
                    self.reads(a, conditional, out);
                }
            }
        }
    }

    fn push(&mut self, target: StmtTarget, reads: Vec<ArrayAccess>, conditional: bool, line: u32) {
        let ordinal = self.body.len();
        self.body.push(Statement { ordinal, target, reads, conditional, line });
    }

    fn stmt(&mut self, s: &CStmt, conditional: bool) {
        match s {
            CStmt::Block(b) => b.iter().for_each(|s| self.stmt(s, conditional)),
            CStmt::Empty => {}
            CStmt::For { line, col, .. } => {
                // Unreachable for well-formed nests: depth is checked before lowering.
                self.opaque.push(OpaqueConstruct { what: "nested loop".into(), loc: self.loc(*line, *col) });
            }
            CStmt::If { cond, then, els } => {
                let mut reads = Vec::new();
                self.reads(cond, conditional, &mut reads);
                if !reads.is_empty() {
                    self.push(StmtTarget::Effect, reads, conditional, cond.line);
                }
                self.stmt(then, true);
                if let Some(e) = els {
                    self.stmt(e, true);
                }
            }
            CStmt::Assign { target, op, value } => {
                let mut reads = Vec::new();
                match &target.kind {
                    ExprKind::Index { subs, .. } => {
                        for sub in subs {
                            self.reads(sub, conditional, &mut reads);
                        }
                        if *op != "=" {
                            let r = self.access(target, AccessMode::Read, conditional);
                            reads.push(r);
                        }
                        if let Some(v) = value {
                            self.reads(v, conditional, &mut reads);
                        }
                        let w = self.access(target, AccessMode::Write, conditional);
                        self.push(StmtTarget::Array(w), reads, conditional, target.line);
                    }
                    ExprKind::Ident(name) => {
                        self.mark_variant(name);
                        if let Some(v) = value {
                            self.reads(v, conditional, &mut reads);
                        }
                        self.push(StmtTarget::Scalar(name.clone()), reads, conditional, target.line);
                    }
                    _ => unreachable!("parser only accepts identifiers and array elements as targets"),
                }
            }
            CStmt::Decl { name, init } => {
                self.mark_variant(name);
                let mut reads = Vec::new();
                if let Some(v) = init {
                    self.reads(v, conditional, &mut reads);
                    let line = v.line;
                    self.push(StmtTarget::Scalar(name.clone()), reads, conditional, line);
                }
            }
            CStmt::Expr(e) => {
                let mut reads = Vec::new();
                self.reads(e, conditional, &mut reads);
                if !reads.is_empty() {
                    self.push(StmtTarget::Effect, reads, conditional, e.line);
                }
            }
            CStmt::Jump { what, line, col } => {
                self.opaque.push(OpaqueConstruct { what: what.clone(), loc: self.loc(*line, *col) });
            }
            CStmt::Return { value, line, col } => {
                if let Some(v) = value {
                    let mut reads = Vec::new();
                    self.reads(v, conditional, &mut reads);
                    if !reads.is_empty() {
                        self.push(StmtTarget::Effect, reads, conditional, *line);
                    }
                }
                self.opaque.push(OpaqueConstruct { what: "return".into(), loc: self.loc(*line, *col) });
            }
        }
    }
}
