//! Point-line incidences by brute force, and the construction of lines
//! `y = a(x + b)` against the grid `C × A(B+C)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::checks::{CheckResult, DEFAULT_MEMORY_BUDGET};
use crate::expr::{parse, Env, EvalError, Evaluator};
use crate::rational::Rational;
use crate::set::FiniteSet;

/// Constant used for Szemerédi-Trotter sanity reports.
pub const DEFAULT_ST_CONSTANT: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IncidenceError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Capacity(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: impl Into<Rational>, y: impl Into<Rational>) -> Self {
        Point { x: x.into(), y: y.into() }
    }
}

/// A line in canonical form; each line has exactly one representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Line {
    /// `y = slope·x + intercept`
    Sloped { slope: Rational, intercept: Rational },
    /// `x = x`
    Vertical { x: Rational },
}

impl Line {
    pub fn sloped(slope: impl Into<Rational>, intercept: impl Into<Rational>) -> Self {
        Line::Sloped { slope: slope.into(), intercept: intercept.into() }
    }

    pub fn vertical(x: impl Into<Rational>) -> Self {
        Line::Vertical { x: x.into() }
    }

    /// `l_{a,b}: y = a(x + b)`.
    pub fn elekes(a: &Rational, b: &Rational) -> Self {
        Line::Sloped { slope: a.clone(), intercept: a * b }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Line::Sloped { slope, intercept } => &(slope * &p.x) + intercept == p.y,
            Line::Vertical { x } => *x == p.x,
        }
    }
}

impl std::fmt::Display for Line {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Line::Sloped { slope, intercept } => write!(f, "y = {slope}x + {intercept}"),
            Line::Vertical { x } => write!(f, "x = {x}"),
        }
    }
}

fn incidences_per_line(points: &BTreeSet<Point>, lines: &BTreeSet<Line>) -> Vec<u64> {
    let pts: Vec<&Point> = points.iter().collect();
    let ls: Vec<&Line> = lines.iter().collect();
    ls.par_iter()
        .map(|l| pts.iter().filter(|p| l.contains(p)).count() as u64)
        .collect()
}

/// `|{(p, l) : p ∈ l}|` by checking every pair.
pub fn count_incidences(points: &BTreeSet<Point>, lines: &BTreeSet<Line>) -> u64 {
    incidences_per_line(points, lines).into_iter().sum()
}

/// `C(p^{2/3} l^{2/3} + p + l)`, evaluated in floating point.
pub fn st_bound(p: u64, l: u64, c: f64) -> f64 {
    let (p, l) = (p as f64, l as f64);
    c * ((p * l).powf(2.0 / 3.0) + p + l)
}

/// `{y = a(x + b) : a ∈ A \ {0}, b ∈ B}`.
pub fn elekes_lines(a: &FiniteSet, b: &FiniteSet) -> BTreeSet<Line> {
    a.iter()
        .filter(|x| !x.is_zero())
        .flat_map(|x| b.iter().map(move |y| Line::elekes(x, y)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElekesReport {
    pub check: CheckResult,
    pub card_a: usize,
    pub card_a_star: usize,
    pub card_b: usize,
    pub card_c: usize,
    pub lines: usize,
    pub points: usize,
    pub incidences: u64,
    pub min_line_incidences: u64,
    /// `|A(B+C)|`
    pub card_a_b_plus_c: usize,
    /// `|A(B+C)| / min{(|A||B||C|)^{1/2}, |A||B|, |A||C|}`
    pub ratio: f64,
    /// `2.5 (|P|^{2/3}|L|^{2/3} + |P| + |L|)`
    pub st_bound: f64,
    pub st_bound_respected: bool,
}

/// Builds `L = {l_{a,b}}` and `P = C × A(B+C)` and checks that every line
/// meets at least `|C|` points, so `I(P, L) >= |A*||B||C|`.
pub fn check_elekes_construction(a: &FiniteSet, b: &FiniteSet, c: &FiniteSet) -> Result<ElekesReport, IncidenceError> {
    let a_star = a.without_zero();
    if a_star.is_empty() {
        return Err(IncidenceError::Precondition("A must contain a nonzero element".into()));
    }
    if b.is_empty() || c.is_empty() {
        return Err(IncidenceError::Precondition("B and C must be nonempty".into()));
    }
    let mut env = Env::new();
    env.insert("A".into(), a.clone());
    env.insert("B".into(), b.clone());
    env.insert("C".into(), c.clone());
    let mut ev = Evaluator::with_budget(DEFAULT_MEMORY_BUDGET);
    let b_plus_c = ev.eval(&parse("B+C").expect("valid"), &env)?;
    if b_plus_c.len() == 1 && b_plus_c.contains_zero() {
        return Err(IncidenceError::Precondition("B+C must not be {0}".into()));
    }
    let a_b_plus_c = ev.eval(&parse("A*(B+C)").expect("valid"), &env)?;

    let lines = elekes_lines(a, b);
    let points: BTreeSet<Point> = c
        .iter()
        .flat_map(|x| a_b_plus_c.iter().map(move |y| Point { x: x.clone(), y: y.clone() }))
        .collect();
    let per_line = incidences_per_line(&points, &lines);
    let incidences: u64 = per_line.iter().sum();
    let need = c.len() as u64;
    let min_line_incidences = per_line.iter().copied().min().unwrap_or(0);

    let rhs = BigInt::from(a_star.len()) * b.len() * c.len();
    let mut check = CheckResult::at_least("elekes incidences", incidences, rhs, || json!({}));
    if let Some(i) = per_line.iter().position(|&k| k < need) {
        let line = lines.iter().nth(i).expect("index in range");
        check.holds = false;
        check.witness = Some(json!({ "line": line.to_string(), "incidences": per_line[i], "required": need }));
    } else if !check.holds {
        check.witness = Some(json!({ "a": a, "b": b, "c": c }));
    }

    let (na, nb, nc) = (a.len() as f64, b.len() as f64, c.len() as f64);
    let denom = (na * nb * nc).sqrt().min(na * nb).min(na * nc);
    let st = st_bound(points.len() as u64, lines.len() as u64, DEFAULT_ST_CONSTANT);
    Ok(ElekesReport {
        check,
        card_a: a.len(),
        card_a_star: a_star.len(),
        card_b: b.len(),
        card_c: c.len(),
        lines: lines.len(),
        points: points.len(),
        incidences,
        min_line_incidences,
        card_a_b_plus_c: a_b_plus_c.len(),
        ratio: a_b_plus_c.len() as f64 / denom,
        st_bound: st,
        st_bound_respected: incidences as f64 <= st,
    })
}
