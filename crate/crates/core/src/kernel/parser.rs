//! Recursive-descent parser for translation units of the kernel subset.

use std::collections::HashMap;

use super::ast::{CStmt, Expr, ExprKind, ForHeader};
use super::lexer::{tokenize, Tok, Token};
use super::{ElemType, GlobalArray, KernelError};

const TYPE_WORDS: &[&str] =
    &["void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool"];
const QUALIFIERS: &[&str] =
    &["const", "volatile", "static", "extern", "restrict", "__restrict", "inline", "register"];
const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];

fn binary_prec(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" => 7,
        "<<" | ">>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

/// Raw result of parsing one translation unit.
#[derive(Debug)]
pub(crate) struct Unit {
    pub globals: Vec<GlobalArray>,
    pub function: FunctionDef,
}

#[derive(Debug)]
pub(crate) struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<CStmt>,
}

pub(crate) struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    file: &'a str,
    typedefs: HashMap<String, ElemType>,
}

impl<'a> Parser<'a> {
    pub fn new(source: &'a str, file: &'a str) -> Result<Self, KernelError> {
        Ok(Parser { toks: tokenize(source, file)?, pos: 0, file, typedefs: HashMap::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_n(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn token(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn prev(&self) -> &Token {
        &self.toks[self.pos.saturating_sub(1)]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, tok: &Token, message: impl Into<String>) -> KernelError {
        KernelError::Syntax {
            file: self.file.to_string(),
            line: tok.line,
            col: tok.col,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> KernelError {
        self.error_at(self.token(), message)
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<Token, KernelError> {
        if self.is_punct(p) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected '{p}', found {}", describe(self.peek()))))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_ident(&mut self) -> Result<(String, Token), KernelError> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.advance())),
            other => Err(self.error(format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn is_type_word(&self, tok: &Tok) -> bool {
        match tok {
            Tok::Ident(s) => {
                TYPE_WORDS.contains(&s.as_str())
                    || QUALIFIERS.contains(&s.as_str())
                    || self.typedefs.contains_key(s)
            }
            _ => false,
        }
    }

    fn starts_type(&self) -> bool {
        self.is_type_word(self.peek())
    }

    /// Consume declaration specifiers; returns the spelled type and its element class.
    fn parse_type(&mut self) -> Result<(String, ElemType), KernelError> {
        let mut words = Vec::new();
        let mut elem = None;
        while let Tok::Ident(s) = self.peek().clone() {
            if QUALIFIERS.contains(&s.as_str()) {
                self.advance();
            } else if TYPE_WORDS.contains(&s.as_str()) {
                if s == "float" || s == "double" {
                    elem = Some(ElemType::Real);
                }
                words.push(s);
                self.advance();
            } else if let Some(t) = self.typedefs.get(&s).copied() {
                // A typedef name is only a type specifier if no other type word was seen.
                if !words.is_empty() {
                    break;
                }
                elem = Some(t);
                words.push(s);
                self.advance();
            } else if s == "struct" || s == "union" || s == "enum" {
                return Err(self.error(format!("'{s}' types are not supported")));
            } else {
                break;
            }
        }
        if words.is_empty() {
            return Err(self.error("expected a type"));
        }
        Ok((words.join(" "), elem.unwrap_or(ElemType::Integer)))
    }

    pub fn parse_unit(mut self) -> Result<Unit, KernelError> {
        let mut globals = Vec::new();
        let mut function: Option<FunctionDef> = None;
        while *self.peek() != Tok::Eof {
            if self.eat_punct(";") {
                continue;
            }
            if self.is_keyword("typedef") {
                self.advance();
                let (_, elem) = self.parse_type()?;
                let (name, _) = self.expect_ident()?;
                self.expect_punct(";")?;
                self.typedefs.insert(name, elem);
                continue;
            }
            let start_tok = self.token().clone();
            let (_, elem) = self.parse_type()?;
            if self.is_punct("*") {
                return Err(self.error("pointer declarations are not supported"));
            }
            let (name, name_tok) = self.expect_ident()?;
            if self.is_punct("(") {
                let params = self.parse_params()?;
                if self.eat_punct(";") {
                    continue;
                }
                if !self.is_punct("{") {
                    return Err(self.error("expected '{' or ';' after function declarator"));
                }
                if function.is_some() {
                    return Err(self.error_at(&start_tok, "more than one function definition"));
                }
                let body = match self.parse_block()? {
                    CStmt::Block(b) => b,
                    other => vec![other],
                };
                function = Some(FunctionDef { name, params, body });
                continue;
            }
            // Global variable declarators.
            let mut name = name;
            let mut name_tok = name_tok;
            loop {
                let mut dims = Vec::new();
                while self.eat_punct("[") {
                    let start = self.token().start;
                    let mut depth = 0;
                    while !(depth == 0 && self.is_punct("]")) {
                        match self.peek() {
                            Tok::Eof => return Err(self.error("unterminated array dimension")),
                            Tok::Punct("[") => depth += 1,
                            Tok::Punct("]") => depth -= 1,
                            _ => {}
                        }
                        self.advance();
                    }
                    let end = self.prev().end.max(start);
                    dims.push(self.source_slice(start, end));
                    self.expect_punct("]")?;
                }
                if self.eat_punct("=") {
                    self.skip_initializer()?;
                }
                globals.push(GlobalArray { name: name.clone(), elem, dims, line: name_tok.line });
                if self.eat_punct(",") {
                    let (n, t) = self.expect_ident()?;
                    name = n;
                    name_tok = t;
                    continue;
                }
                self.expect_punct(";")?;
                break;
            }
        }
        let function = function.ok_or_else(|| self.error("no function definition found"))?;
        Ok(Unit { globals, function })
    }

    fn source_slice(&self, start: usize, end: usize) -> String {
        // Reconstruct from tokens to avoid holding the source twice.
        self.toks
            .iter()
            .filter(|t| t.start >= start && t.end <= end && t.tok != Tok::Eof)
            .map(|t| match &t.tok {
                Tok::Ident(s) => s.clone(),
                Tok::Int(v) => v.to_string(),
                Tok::Float(v) => v.to_string(),
                Tok::Punct(p) => p.to_string(),
                Tok::Eof => String::new(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn skip_initializer(&mut self) -> Result<(), KernelError> {
        let mut depth = 0i32;
        loop {
            match self.peek() {
                Tok::Eof => return Err(self.error("unterminated initializer")),
                Tok::Punct("{") | Tok::Punct("(") => depth += 1,
                Tok::Punct("}") | Tok::Punct(")") => depth -= 1,
                Tok::Punct(",") | Tok::Punct(";") if depth == 0 => return Ok(()),
                _ => {}
            }
            self.advance();
        }
    }

    fn parse_params(&mut self) -> Result<Vec<String>, KernelError> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if self.eat_punct(")") {
            return Ok(params);
        }
        if self.is_keyword("void") && matches!(self.peek_n(1), Tok::Punct(")")) {
            self.advance();
            self.advance();
            return Ok(params);
        }
        loop {
            self.parse_type()?;
            while self.eat_punct("*") {
                while matches!(self.peek(), Tok::Ident(s) if QUALIFIERS.contains(&s.as_str())) {
                    self.advance();
                }
            }
            if let Tok::Ident(_) = self.peek() {
                let (n, _) = self.expect_ident()?;
                params.push(n);
            }
            while self.eat_punct("[") {
                while !self.is_punct("]") {
                    if *self.peek() == Tok::Eof {
                        return Err(self.error("unterminated parameter dimension"));
                    }
                    self.advance();
                }
                self.advance();
            }
            if self.eat_punct(")") {
                return Ok(params);
            }
            self.expect_punct(",")?;
        }
    }

    fn parse_block(&mut self) -> Result<CStmt, KernelError> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.is_punct("}") {
            if *self.peek() == Tok::Eof {
                return Err(self.error("unexpected end of input, expected '}'"));
            }
            stmts.push(self.parse_stmt()?);
        }
        self.advance();
        Ok(CStmt::Block(stmts))
    }

    fn parse_stmt(&mut self) -> Result<CStmt, KernelError> {
        let tok = self.token().clone();
        match &tok.tok {
            Tok::Punct("{") => return self.parse_block(),
            Tok::Punct(";") => {
                self.advance();
                return Ok(CStmt::Empty);
            }
            Tok::Ident(kw) => match kw.as_str() {
                "for" => return self.parse_for(),
                "if" => {
                    self.advance();
                    self.expect_punct("(")?;
                    let cond = self.parse_expr()?;
                    self.expect_punct(")")?;
                    let then = Box::new(self.parse_stmt()?);
                    let els = if self.is_keyword("else") {
                        self.advance();
                        Some(Box::new(self.parse_stmt()?))
                    } else {
                        None
                    };
                    return Ok(CStmt::If { cond, then, els });
                }
                "while" | "do" | "switch" | "case" | "default" | "asm" | "__asm__" => {
                    return Err(self.error(format!("'{kw}' is not supported in kernels")));
                }
                "return" => {
                    self.advance();
                    let value = if self.is_punct(";") { None } else { Some(self.parse_expr()?) };
                    self.expect_punct(";")?;
                    return Ok(CStmt::Return { value, line: tok.line, col: tok.col });
                }
                "break" | "continue" => {
                    self.advance();
                    self.expect_punct(";")?;
                    return Ok(CStmt::Jump { what: kw.clone(), line: tok.line, col: tok.col });
                }
                "goto" => {
                    self.advance();
                    let (label, _) = self.expect_ident()?;
                    self.expect_punct(";")?;
                    return Ok(CStmt::Jump {
                        what: format!("goto {label}"),
                        line: tok.line,
                        col: tok.col,
                    });
                }
                _ if self.starts_type() => return self.parse_local_decl(),
                _ => {}
            },
            _ => {}
        }
        let target = self.parse_expr()?;
        if let Tok::Punct(op) = self.peek().clone() {
            if ASSIGN_OPS.contains(&op) {
                if !matches!(target.kind, ExprKind::Ident(_) | ExprKind::Index { .. }) {
                    return Err(self.error_at(&tok, "assignment target must be a variable or array element"));
                }
                self.advance();
                let value = self.parse_expr()?;
                self.expect_punct(";")?;
                return Ok(CStmt::Assign { target, op, value: Some(value) });
            }
        }
        self.expect_punct(";")?;
        if let ExprKind::IncDec { op, target: inner } = &target.kind {
            if matches!(inner.kind, ExprKind::Ident(_) | ExprKind::Index { .. }) {
                let op = if *op == "++" { "+=" } else { "-=" };
                return Ok(CStmt::Assign { target: (**inner).clone(), op, value: None });
            }
        }
        Ok(CStmt::Expr(target))
    }

    fn parse_local_decl(&mut self) -> Result<CStmt, KernelError> {
        self.parse_type()?;
        let mut decls = Vec::new();
        loop {
            if self.is_punct("*") {
                return Err(self.error("pointer declarations are not supported"));
            }
            let (name, _) = self.expect_ident()?;
            if self.is_punct("[") {
                return Err(self.error("local arrays are not supported"));
            }
            let init = if self.eat_punct("=") { Some(self.parse_expr()?) } else { None };
            decls.push(CStmt::Decl { name, init });
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(";")?;
            break;
        }
        Ok(if decls.len() == 1 { decls.pop().unwrap() } else { CStmt::Block(decls) })
    }

    fn parse_for(&mut self) -> Result<CStmt, KernelError> {
        let for_tok = self.advance();
        self.expect_punct("(")?;
        if self.starts_type() {
            self.parse_type()?;
        }
        let (var, var_tok) = self.expect_ident()?;
        self.expect_punct("=")?;
        let lower = self.parse_expr()?;
        self.expect_punct(";")?;

        let cond_tok = self.token().clone();
        let cond = self.parse_expr()?;
        let (cmp, upper) = match cond.kind {
            ExprKind::Binary { op, lhs, rhs } if matches!(op, "<" | "<=" | ">" | ">=" | "!=") => {
                match (&lhs.kind, &rhs.kind) {
                    (ExprKind::Ident(v), _) if *v == var => (op, *rhs),
                    (_, ExprKind::Ident(v)) if *v == var => (flip_cmp(op), *lhs),
                    _ => return Err(self.error_at(&cond_tok, "loop condition must compare the loop variable")),
                }
            }
            _ => return Err(self.error_at(&cond_tok, "unsupported loop condition")),
        };
        self.expect_punct(";")?;

        let step_tok = self.token().clone();
        let step = self.parse_step(&var)?;
        if step == 0 {
            return Err(self.error_at(&step_tok, "loop step must be nonzero"));
        }
        self.expect_punct(")")?;
        let body = Box::new(self.parse_stmt()?);
        let end_line = self.prev().line;
        let _ = var_tok;
        Ok(CStmt::For {
            header: ForHeader { var, lower, cmp, upper, step },
            body,
            line: for_tok.line,
            col: for_tok.col,
            end_line,
        })
    }

    fn parse_step(&mut self, var: &str) -> Result<i64, KernelError> {
        let bad = |p: &Self| p.error("unsupported loop increment");
        if self.is_punct("++") || self.is_punct("--") {
            let up = self.is_punct("++");
            self.advance();
            let (v, _) = self.expect_ident()?;
            if v != var {
                return Err(bad(self));
            }
            return Ok(if up { 1 } else { -1 });
        }
        let (v, _) = self.expect_ident()?;
        if v != var {
            return Err(bad(self));
        }
        match self.peek().clone() {
            Tok::Punct("++") => {
                self.advance();
                Ok(1)
            }
            Tok::Punct("--") => {
                self.advance();
                Ok(-1)
            }
            Tok::Punct(op @ ("+=" | "-=")) => {
                self.advance();
                let k = self.const_int()?;
                Ok(if op == "+=" { k } else { -k })
            }
            Tok::Punct("=") => {
                self.advance();
                let (v2, _) = self.expect_ident()?;
                if v2 != var {
                    return Err(bad(self));
                }
                let sign = match self.peek() {
                    Tok::Punct("+") => 1,
                    Tok::Punct("-") => -1,
                    _ => return Err(bad(self)),
                };
                self.advance();
                Ok(sign * self.const_int()?)
            }
            _ => Err(bad(self)),
        }
    }

    fn const_int(&mut self) -> Result<i64, KernelError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(v)
            }
            _ => Err(self.error("expected an integer literal")),
        }
    }

    pub fn parse_expr(&mut self) -> Result<Expr, KernelError> {
        let cond = self.parse_binary(1)?;
        if self.eat_punct("?") {
            let then = self.parse_expr()?;
            self.expect_punct(":")?;
            let els = self.parse_expr()?;
            let (start, line, col) = (cond.start, cond.line, cond.col);
            let end = els.end;
            return Ok(Expr {
                kind: ExprKind::Ternary { cond: Box::new(cond), then: Box::new(then), els: Box::new(els) },
                start,
                end,
                line,
                col,
            });
        }
        Ok(cond)
    }

    fn parse_binary(&mut self, min_prec: u8) -> Result<Expr, KernelError> {
        let mut lhs = self.parse_unary()?;
        while let Tok::Punct(op) = self.peek() {
            let op = *op;
            let prec = match binary_prec(op) {
                Some(p) if p >= min_prec => p,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_binary(prec + 1)?;
            let (start, line, col, end) = (lhs.start, lhs.line, lhs.col, rhs.end);
            lhs = Expr {
                kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                start,
                end,
                line,
                col,
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, KernelError> {
        let tok = self.token().clone();
        match tok.tok {
            Tok::Punct(op @ ("-" | "+" | "!" | "~")) => {
                self.advance();
                let operand = self.parse_unary()?;
                let end = operand.end;
                Ok(Expr {
                    kind: ExprKind::Unary { op, operand: Box::new(operand) },
                    start: tok.start,
                    end,
                    line: tok.line,
                    col: tok.col,
                })
            }
            Tok::Punct(op @ ("++" | "--")) => {
                self.advance();
                let operand = self.parse_unary()?;
                let end = operand.end;
                Ok(Expr {
                    kind: ExprKind::IncDec { op, target: Box::new(operand) },
                    start: tok.start,
                    end,
                    line: tok.line,
                    col: tok.col,
                })
            }
            Tok::Punct("*") | Tok::Punct("&") => Err(self.error("pointer operations are not supported")),
            Tok::Punct("(") if self.is_type_word(self.peek_n(1)) => {
                self.advance();
                let (ty, _) = self.parse_type()?;
                self.expect_punct(")")?;
                let operand = self.parse_unary()?;
                let end = operand.end;
                Ok(Expr {
                    kind: ExprKind::Cast { ty, operand: Box::new(operand) },
                    start: tok.start,
                    end,
                    line: tok.line,
                    col: tok.col,
                })
            }
            _ => self.parse_postfix(),
        }
    }

    fn parse_postfix(&mut self) -> Result<Expr, KernelError> {
        let mut e = self.parse_primary()?;
        loop {
            match self.peek() {
                Tok::Punct(op @ ("++" | "--")) => {
                    let op = *op;
                    let t = self.advance();
                    let (start, line, col) = (e.start, e.line, e.col);
                    e = Expr { kind: ExprKind::IncDec { op, target: Box::new(e) }, start, end: t.end, line, col };
                }
                Tok::Punct("[") => return Err(self.error("only named arrays can be subscripted")),
                _ => return Ok(e),
            }
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, KernelError> {
        let tok = self.advance();
        let mk = |kind, end| Expr { kind, start: tok.start, end, line: tok.line, col: tok.col };
        match &tok.tok {
            Tok::Int(v) => Ok(mk(ExprKind::Int(*v), tok.end)),
            Tok::Float(v) => Ok(mk(ExprKind::Float(*v), tok.end)),
            Tok::Ident(name) => {
                if self.is_punct("(") {
                    self.advance();
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.parse_expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    let close = self.expect_punct(")")?;
                    return Ok(mk(ExprKind::Call { name: name.clone(), args }, close.end));
                }
                if self.is_punct("[") {
                    let mut subs = Vec::new();
                    let mut end = tok.end;
                    while self.eat_punct("[") {
                        subs.push(self.parse_expr()?);
                        end = self.expect_punct("]")?.end;
                    }
                    return Ok(mk(ExprKind::Index { array: name.clone(), subs }, end));
                }
                Ok(mk(ExprKind::Ident(name.clone()), tok.end))
            }
            Tok::Punct("(") => {
                let mut inner = self.parse_expr()?;
                let close = self.expect_punct(")")?;
                inner.start = tok.start;
                inner.end = close.end;
                inner.line = tok.line;
                inner.col = tok.col;
                Ok(inner)
            }
            other => Err(self.error_at(&tok, format!("expected an expression, found {}", describe(other)))),
        }
    }

    pub fn expect_eof(&self) -> Result<(), KernelError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", describe(self.peek()))))
        }
    }
}

fn flip_cmp(op: &'static str) -> &'static str {
    match op {
        "<" => ">",
        ">" => "<",
        "<=" => ">=",
        ">=" => "<=",
        other => other,
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Int(v) => format!("'{v}'"),
        Tok::Float(v) => format!("'{v}'"),
        Tok::Punct(p) => format!("'{p}'"),
        Tok::Eof => "end of input".to_string(),
    }
}
