//! Set expressions such as `(A+A)/(A+A)` or `A(A+A+A+A)`.
//!
//! Grammar:
//!
//! ```text
//! Expr   := Term (('+' | '-') Term)*
//! Term   := Factor (('*' | '/')? Factor)*     -- juxtaposition only before '('
//! Factor := identifier | '(' Expr ')'
//! ```
//!
//! Every leaf occurrence ranges over its set independently, so `A-A` means
//! `{a - b : a, b ∈ A}`, and division skips zero denominators.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::rational::Op;
use crate::set::{pairset, FiniteSet, PairOp};

/// Byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Var(String),
    Binary { op: Op, lhs: Box<Expr>, rhs: Box<Expr> },
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Structural equality; spans are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Var(a), ExprKind::Var(b)) => a == b,
            (
                ExprKind::Binary { op: o1, lhs: l1, rhs: r1 },
                ExprKind::Binary { op: o2, lhs: l2, rhs: r2 },
            ) => o1 == o2 && l1 == l2 && r1 == r2,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr { kind: ExprKind::Var(name.into()), span: Span { start: 0, end: 0 } }
    }

    pub fn binary(op: Op, lhs: Expr, rhs: Expr) -> Expr {
        let span = Span { start: lhs.span.start, end: rhs.span.end };
        Expr { kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span }
    }

    /// Variable names in order of first occurrence.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.kind {
            ExprKind::Var(name) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }
}

/// Canonical, fully parenthesized form: `((A+A)/(A+A))`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Var(name) => f.write_str(name),
            ExprKind::Binary { op, lhs, rhs } => write!(f, "({lhs}{}{rhs})", op.symbol()),
        }
    }
}

pub fn format(ast: &Expr) -> String {
    ast.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {position}: found {found}, expected one of {}", expected.join(", "))]
pub struct ParseError {
    pub position: usize,
    pub found: String,
    pub expected: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Op(Op),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Op(op) => format!("'{}'", op.symbol()),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let single = |t: Tok| (t, Span { start: i, end: i + c.len_utf8() });
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '+' => {
                out.push(single(Tok::Op(Op::Add)));
                chars.next();
            }
            '-' | '−' => {
                out.push(single(Tok::Op(Op::Sub)));
                chars.next();
            }
            '*' | '×' => {
                out.push(single(Tok::Op(Op::Mul)));
                chars.next();
            }
            '/' | '÷' => {
                out.push(single(Tok::Op(Op::Div)));
                chars.next();
            }
            '(' => {
                out.push(single(Tok::LParen));
                chars.next();
            }
            ')' => {
                out.push(single(Tok::RParen));
                chars.next();
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut end = i;
                let mut name = String::new();
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        name.push(d);
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(name), Span { start: i, end }));
            }
            other => {
                return Err(ParseError {
                    position: i,
                    found: format!("character {other:?}"),
                    expected: vec!["identifier", "'('", "operator"],
                })
            }
        }
    }
    out.push((Tok::End, Span { start: src.len(), end: src.len() }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError { position: self.span().start, found: self.peek().describe(), expected }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(op @ (Op::Add | Op::Sub)) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match *self.peek() {
                Tok::Op(op @ (Op::Mul | Op::Div)) => {
                    self.bump();
                    op
                }
                Tok::LParen => Op::Mul,
                _ => break,
            };
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let (_, span) = self.bump();
                Ok(Expr { kind: ExprKind::Var(name), span })
            }
            Tok::LParen => {
                let (_, open) = self.bump();
                let mut inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(vec!["')'", "operator"]));
                }
                let (_, close) = self.bump();
                inner.span = Span { start: open.start, end: close.end };
                Ok(inner)
            }
            _ => Err(self.error(vec!["identifier", "'('"])),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(vec!["operator", "'('", "end of input"]));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound set variable {name:?} at {}..{}", span.start, span.end)]
    Unbound { name: String, span: Span },
    #[error("evaluating {expr} needs {pairs} pairs, over the budget of {budget}")]
    Capacity { expr: String, pairs: u128, budget: u64 },
}

/// Named sets an expression is evaluated against.
pub type Env = BTreeMap<String, FiniteSet>;

/// Bottom-up evaluator with an optional cap on pair enumerations and a cache
/// of subexpressions, so `(A+A)/(A+A)` builds `A+A` once.
#[derive(Debug, Default)]
pub struct Evaluator {
    budget: Option<u64>,
    cache: HashMap<String, FiniteSet>,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Each binary node may enumerate at most `budget` ordered pairs.
    pub fn with_budget(budget: u64) -> Self {
        Evaluator { budget: Some(budget), cache: HashMap::new() }
    }

    pub fn eval(&mut self, ast: &Expr, env: &Env) -> Result<FiniteSet, EvalError> {
        match &ast.kind {
            ExprKind::Var(name) => env
                .get(name)
                .cloned()
                .ok_or_else(|| EvalError::Unbound { name: name.clone(), span: ast.span }),
            ExprKind::Binary { op, lhs, rhs } => {
                let key = ast.to_string();
                if let Some(hit) = self.cache.get(&key) {
                    return Ok(hit.clone());
                }
                let l = self.eval(lhs, env)?;
                let r = self.eval(rhs, env)?;
                let pairs = l.len() as u128 * r.len() as u128;
                if let Some(budget) = self.budget {
                    if pairs > budget as u128 {
                        return Err(EvalError::Capacity { expr: key, pairs, budget });
                    }
                }
                let pair_op = match op {
                    Op::Add => PairOp::Sum,
                    Op::Sub => PairOp::Difference,
                    Op::Mul => PairOp::Product,
                    Op::Div => PairOp::Ratio,
                };
                let out = pairset(&l, &r, pair_op);
                self.cache.insert(key, out.clone());
                Ok(out)
            }
        }
    }
}

/// Evaluates without a budget.
pub fn eval(ast: &Expr, env: &Env) -> Result<FiniteSet, EvalError> {
    Evaluator::new().eval(ast, env)
}
