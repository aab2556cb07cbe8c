//! Tokenizer for the C kernel subset.
//!
//! Preprocessor lines are dropped wholesale; comments are skipped. Every token
//! carries its 1-based line/column (in characters) and its byte range so that
//! downstream code can recover verbatim source text.

use super::KernelError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
    pub start: usize,
    pub end: usize,
}

const PUNCTS: &[&str] = &[
    "<<=", ">>=", "...", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<=", ">=",
    "==", "!=", "&&", "||", "<<", ">>", "->", "+", "-", "*", "/", "%", "<", ">", "=", "!", "(",
    ")", "[", "]", "{", "}", ";", ",", "?", ":", "&", "|", "^", "~", ".",
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    at_line_start: bool,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
            self.at_line_start = true;
        } else {
            self.col += 1;
            if !c.is_whitespace() {
                self.at_line_start = false;
            }
        }
        Some(c)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }
}

pub fn tokenize(src: &str, file: &str) -> Result<Vec<Token>, KernelError> {
    let mut cur = Cursor { src, pos: 0, line: 1, col: 1, at_line_start: true };
    let mut out = Vec::new();
    let err = |line: u32, col: u32, message: String| KernelError::Syntax {
        file: file.to_string(),
        line,
        col,
        message,
    };

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' && cur.at_line_start {
            // Skip the directive, honouring backslash continuations.
            while let Some(c) = cur.peek() {
                if c == '\\' && cur.peek_at(1) == Some('\n') {
                    cur.bump();
                    cur.bump();
                    continue;
                }
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.rest().starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.rest().starts_with("/*") {
            let (line, col) = (cur.line, cur.col);
            cur.bump();
            cur.bump();
            loop {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(err(line, col, "unterminated comment".into()));
                }
            }
            continue;
        }

        let (line, col, start) = (cur.line, cur.col, cur.pos);
        if c.is_ascii_alphabetic() || c == '_' {
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                cur.bump();
            }
            out.push(Token {
                tok: Tok::Ident(src[start..cur.pos].to_string()),
                line,
                col,
                start,
                end: cur.pos,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && matches!(cur.peek_at(1), Some(d) if d.is_ascii_digit())) {
            let tok = lex_number(&mut cur).map_err(|m| err(line, col, m))?;
            out.push(Token { tok, line, col, start, end: cur.pos });
            continue;
        }
        if let Some(p) = PUNCTS.iter().find(|p| cur.rest().starts_with(**p)) {
            for _ in 0..p.len() {
                cur.bump();
            }
            out.push(Token { tok: Tok::Punct(p), line, col, start, end: cur.pos });
            continue;
        }
        return Err(err(line, col, format!("unexpected character '{c}'")));
    }
    out.push(Token { tok: Tok::Eof, line: cur.line, col: cur.col, start: src.len(), end: src.len() });
    Ok(out)
}

fn lex_number(cur: &mut Cursor<'_>) -> Result<Tok, String> {
    let start = cur.pos;
    if cur.rest().starts_with("0x") || cur.rest().starts_with("0X") {
        cur.bump();
        cur.bump();
        while matches!(cur.peek(), Some(c) if c.is_ascii_hexdigit()) {
            cur.bump();
        }
        let digits = &cur.src[start + 2..cur.pos];
        while matches!(cur.peek(), Some('u' | 'U' | 'l' | 'L')) {
            cur.bump();
        }
        return i64::from_str_radix(digits, 16).map(Tok::Int).map_err(|e| e.to_string());
    }
    let mut is_float = false;
    while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
        cur.bump();
    }
    if cur.peek() == Some('.') {
        is_float = true;
        cur.bump();
        while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let sign = matches!(cur.peek_at(1), Some('+' | '-'));
        let digit_at = if sign { 2 } else { 1 };
        if matches!(cur.peek_at(digit_at), Some(d) if d.is_ascii_digit()) {
            is_float = true;
            for _ in 0..digit_at {
                cur.bump();
            }
            while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                cur.bump();
            }
        }
    }
    let body_end = cur.pos;
    match cur.peek() {
        Some('f' | 'F') => {
            is_float = true;
            cur.bump();
        }
        _ => {
            while matches!(cur.peek(), Some('u' | 'U' | 'l' | 'L')) {
                cur.bump();
            }
        }
    }
    let body = &cur.src[start..body_end];
    if is_float {
        body.parse::<f64>().map(Tok::Float).map_err(|e| e.to_string())
    } else {
        body.parse::<i64>().map(Tok::Int).map_err(|e| e.to_string())
    }
}
