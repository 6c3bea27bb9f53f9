//! Finite sets of rationals, their sum/difference/product/ratio sets, and
//! representation-function based energies.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{Rational, RationalError};

/// Row count above which pair enumeration is split across threads.
const PAR_THRESHOLD: usize = 256;

/// Largest set accepted by the O(n^4) energy oracle.
pub const BRUTE_FORCE_LIMIT: usize = 64;

#[derive(Debug, Error)]
pub enum SetError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: RationalError },
    #[error("set of size {size} exceeds the brute-force limit of {limit}")]
    Capacity { size: usize, limit: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A strictly increasing, duplicate-free sequence of rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiniteSet(Vec<Rational>);

impl FiniteSet {
    pub fn empty() -> Self {
        FiniteSet(Vec::new())
    }

    /// Sorts and deduplicates arbitrary input.
    pub fn from_elements<I: IntoIterator<Item = Rational>>(items: I) -> Self {
        let mut v: Vec<Rational> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FiniteSet(v)
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(items: I) -> Self {
        Self::from_elements(items.into_iter().map(Rational::from))
    }

    /// Sorts input already known to be duplicate-free.
    fn from_unique(mut v: Vec<Rational>) -> Self {
        v.sort_unstable();
        FiniteSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn elements(&self) -> &[Rational] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.0.binary_search(x).is_ok()
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    pub fn all_positive(&self) -> bool {
        self.0.first().is_none_or(Rational::is_positive)
    }

    pub fn position(&self, x: &Rational) -> Option<usize> {
        self.0.binary_search(x).ok()
    }

    /// `A \ {0}`.
    pub fn without_zero(&self) -> FiniteSet {
        FiniteSet(self.0.iter().filter(|x| !x.is_zero()).cloned().collect())
    }

    pub fn union(&self, other: &FiniteSet) -> FiniteSet {
        FiniteSet::from_elements(self.0.iter().chain(other.0.iter()).cloned())
    }

    /// `λA`.
    pub fn dilate(&self, lambda: &Rational) -> FiniteSet {
        FiniteSet::from_elements(self.0.iter().map(|x| x * lambda))
    }
}

impl fmt::Debug for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Rational> for FiniteSet {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        FiniteSet::from_elements(iter)
    }
}

impl<'a> IntoIterator for &'a FiniteSet {
    type Item = &'a Rational;
    type IntoIter = std::slice::Iter<'a, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// The binary operation a pair `(a, b)` is mapped through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairOp {
    Sum,
    Difference,
    Product,
    /// `a / b`, with pairs where `b = 0` skipped.
    Ratio,
}

impl PairOp {
    #[inline]
    pub fn apply(self, a: &Rational, b: &Rational) -> Option<Rational> {
        match self {
            PairOp::Sum => Some(a + b),
            PairOp::Difference => Some(a - b),
            PairOp::Product => Some(a * b),
            PairOp::Ratio => a.checked_div(b).ok(),
        }
    }
}

/// Machine-word view of each element, `None` when a part does not fit in
/// `i128`.
fn small_view(a: &FiniteSet) -> Vec<Option<Small>> {
    a.iter().map(Small::from_rational).collect()
}

/// Reduced fraction with `d > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Small {
    n: i128,
    d: i128,
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Small {
    fn from_rational(x: &Rational) -> Option<Small> {
        use num_traits::ToPrimitive;
        Some(Small { n: x.numer().to_i128()?, d: x.denom().to_i128()? })
    }

    fn reduced(n: i128, d: i128) -> Option<Small> {
        let (n, d) = if d < 0 { (n.checked_neg()?, d.checked_neg()?) } else { (n, d) };
        let g = gcd_u128(n.unsigned_abs(), d.unsigned_abs());
        Some(if n == 0 {
            Small { n: 0, d: 1 }
        } else if g > 1 {
            // g divides both, and g > 1 keeps the quotients in range
            Small { n: n / g as i128, d: d / g as i128 }
        } else {
            Small { n, d }
        })
    }

    /// `Err(())` on overflow; `Ok(None)` for a zero divisor.
    #[inline]
    fn apply(op: PairOp, x: Small, y: Small) -> Result<Option<Small>, ()> {
        let r = match op {
            PairOp::Sum | PairOp::Difference => {
                let l = x.n.checked_mul(y.d);
                let r = y.n.checked_mul(x.d);
                let num = match (l, r, op) {
                    (Some(l), Some(r), PairOp::Sum) => l.checked_add(r),
                    (Some(l), Some(r), _) => l.checked_sub(r),
                    _ => None,
                };
                num.zip(x.d.checked_mul(y.d)).and_then(|(n, d)| Small::reduced(n, d))
            }
            PairOp::Product => {
                x.n.checked_mul(y.n).zip(x.d.checked_mul(y.d)).and_then(|(n, d)| Small::reduced(n, d))
            }
            PairOp::Ratio => {
                if y.n == 0 {
                    return Ok(None);
                }
                x.n.checked_mul(y.d).zip(x.d.checked_mul(y.n)).and_then(|(n, d)| Small::reduced(n, d))
            }
        };
        r.map(Some).ok_or(())
    }

    fn to_rational(self) -> Rational {
        Rational::new(self.n, self.d).expect("nonzero denominator")
    }
}

/// Hash key for a pair result: the machine-word form whenever the value
/// fits, so each value has exactly one key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Small(Small),
    Big(Rational),
}

impl Key {
    fn of(x: Rational) -> Key {
        Small::from_rational(&x).map_or(Key::Big(x), Key::Small)
    }

    fn into_rational(self) -> Rational {
        match self {
            Key::Small(s) => s.to_rational(),
            Key::Big(r) => r,
        }
    }
}

/// Calls `emit` with `x op y` for every `y` in `b`, skipping zero divisors.
#[inline]
fn row_results(
    op: PairOp,
    x: (&Rational, Option<Small>),
    b: &[Rational],
    vb: &[Option<Small>],
    mut emit: impl FnMut(Key),
) {
    for (y, &sy) in b.iter().zip(vb) {
        let fast = match (x.1, sy) {
            (Some(sx), Some(sy)) => Small::apply(op, sx, sy),
            _ => Err(()),
        };
        match fast {
            Ok(Some(v)) => emit(Key::Small(v)),
            Ok(None) => {}
            Err(()) => {
                if let Some(v) = op.apply(x.0, y) {
                    emit(Key::of(v));
                }
            }
        }
    }
}

/// Runs `row` over each element of `xs` of `A × B`, in parallel for large `A`, and merges
/// the per-row accumulators.
fn fold_rows<T, Acc, R, M>(xs: &[T], new: fn() -> Acc, row: R, merge: M) -> Acc
where
    T: Sync,
    Acc: Send,
    R: Fn(&mut Acc, &T) + Sync + Send,
    M: Fn(Acc, Acc) -> Acc + Sync + Send,
{
    if xs.len() >= PAR_THRESHOLD {
        xs.par_iter()
            .fold(new, |mut acc, x| {
                row(&mut acc, x);
                acc
            })
            .reduce(new, merge)
    } else {
        let mut acc = new();
        for x in xs {
            row(&mut acc, x);
        }
        acc
    }
}

fn merge_sets<K: std::hash::Hash + Eq>(mut l: HashSet<K>, r: HashSet<K>) -> HashSet<K> {
    if l.len() < r.len() {
        return merge_sets(r, l);
    }
    l.extend(r);
    l
}

fn merge_counts<K: std::hash::Hash + Eq>(mut l: HashMap<K, u64>, r: HashMap<K, u64>) -> HashMap<K, u64> {
    if l.len() < r.len() {
        return merge_counts(r, l);
    }
    for (k, v) in r {
        *l.entry(k).or_insert(0) += v;
    }
    l
}

fn distinct_keys(a: &FiniteSet, b: &FiniteSet, op: PairOp) -> HashSet<Key> {
    let (va, vb) = (small_view(a), small_view(b));
    let rows: Vec<(&Rational, Option<Small>)> = a.iter().zip(va).collect();
    fold_rows(
        &rows,
        HashSet::new,
        |acc: &mut HashSet<Key>, &x| row_results(op, x, b.elements(), &vb, |k| {
            acc.insert(k);
        }),
        merge_sets,
    )
}

fn combine(a: &FiniteSet, b: &FiniteSet, op: PairOp) -> FiniteSet {
    let out = distinct_keys(a, b, op);
    FiniteSet::from_unique(out.into_iter().map(Key::into_rational).collect())
}

/// `A + B`.
pub fn sumset(a: &FiniteSet, b: &FiniteSet) -> FiniteSet {
    combine(a, b, PairOp::Sum)
}

/// `A - B`.
pub fn diffset(a: &FiniteSet, b: &FiniteSet) -> FiniteSet {
    combine(a, b, PairOp::Difference)
}

/// `AB`.
pub fn productset(a: &FiniteSet, b: &FiniteSet) -> FiniteSet {
    combine(a, b, PairOp::Product)
}

/// `A / B`; zero divisors are skipped, so `A / {0}` is empty.
pub fn ratioset(a: &FiniteSet, b: &FiniteSet) -> FiniteSet {
    combine(a, b, PairOp::Ratio)
}

pub fn pairset(a: &FiniteSet, b: &FiniteSet, op: PairOp) -> FiniteSet {
    combine(a, b, op)
}

/// `|{a op b}|` without materializing the set.
pub fn pairset_len(a: &FiniteSet, b: &FiniteSet, op: PairOp) -> usize {
    distinct_keys(a, b, op).len()
}

/// Ordered-pair representation counts `r(x) = #{(a, b) : a op b = x}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepFunction {
    entries: Vec<(Rational, u64)>,
    total: u64,
}

impl RepFunction {
    /// Entries sorted by value.
    pub fn entries(&self) -> &[(Rational, u64)] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, x: &Rational) -> u64 {
        self.entries
            .binary_search_by(|(v, _)| v.cmp(x))
            .map_or(0, |i| self.entries[i].1)
    }

    /// `Σ r(x)^2`, the number of ordered quadruples with `a op b = c op d`.
    pub fn square_sum(&self) -> u64 {
        self.entries.iter().map(|(_, c)| c * c).sum()
    }

    /// The support of `r` as a set.
    pub fn support(&self) -> FiniteSet {
        FiniteSet(self.entries.iter().map(|(v, _)| v.clone()).collect())
    }
}

/// Representation function of `op` over `A × B`.
pub fn rep_function_pairs(a: &FiniteSet, b: &FiniteSet, op: PairOp) -> RepFunction {
    let (va, vb) = (small_view(a), small_view(b));
    let rows: Vec<(&Rational, Option<Small>)> = a.iter().zip(va).collect();
    let mut entries: Vec<(Rational, u64)> = fold_rows(
        &rows,
        HashMap::new,
        |acc: &mut HashMap<Key, u64>, &x| row_results(op, x, b.elements(), &vb, |k| {
            *acc.entry(k).or_insert(0) += 1;
        }),
        merge_counts,
    )
    .into_iter()
    .map(|(k, v)| (k.into_rational(), v))
    .collect();
    entries.sort_unstable_by(|l, r| l.0.cmp(&r.0));
    let total = entries.iter().map(|(_, c)| c).sum();
    RepFunction { entries, total }
}

/// Representation function of `op` over `A × A`.
pub fn rep_function(a: &FiniteSet, op: PairOp) -> RepFunction {
    rep_function_pairs(a, a, op)
}

/// Multiplicative energy `E*(A)`: ordered quadruples in `A^4` with `ab = cd`.
/// Zeros need no special handling: every pair with product zero lands in `r(0)`.
pub fn mult_energy(a: &FiniteSet) -> u64 {
    rep_function(a, PairOp::Product).square_sum()
}

/// Additive energy `E+(A)`: ordered quadruples in `A^4` with `a + b = c + d`.
pub fn add_energy(a: &FiniteSet) -> u64 {
    rep_function(a, PairOp::Sum).square_sum()
}

/// Which equation an energy counts solutions of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyMode {
    Sum,
    Product,
}

impl EnergyMode {
    pub fn pair_op(self) -> PairOp {
        match self {
            EnergyMode::Sum => PairOp::Sum,
            EnergyMode::Product => PairOp::Product,
        }
    }
}

pub fn energy(a: &FiniteSet, mode: EnergyMode) -> u64 {
    rep_function(a, mode.pair_op()).square_sum()
}

/// Literal enumeration of all `|A|^4` quadruples. Only for `|A| <= 64`.
pub fn energy_bruteforce(a: &FiniteSet, mode: EnergyMode) -> Result<u64, SetError> {
    let n = a.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(SetError::Capacity { size: n, limit: BRUTE_FORCE_LIMIT });
    }
    let op = mode.pair_op();
    let xs = a.elements();
    let mut count = 0u64;
    for p in xs {
        for q in xs {
            let lhs = op.apply(p, q).expect("sum and product are total");
            for r in xs {
                for s in xs {
                    if op.apply(r, s).as_ref() == Some(&lhs) {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// `a + b = c + d` only trivially, i.e. `E+(A) = 2|A|^2 - |A|`.
pub fn is_sidon(a: &FiniteSet) -> bool {
    let n = a.len() as u64;
    add_energy(a) == 2 * n * n - n
}

/// Parses the set file format: one rational per line, `#` comments, blank
/// lines ignored. Returns the set and the number of duplicate lines dropped.
pub fn parse_set_text(text: &str) -> Result<(FiniteSet, usize), SetError> {
    let mut items = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x = line.parse::<Rational>().map_err(|source| SetError::Parse { line: i + 1, source })?;
        items.push(x);
    }
    let raw_len = items.len();
    let set = FiniteSet::from_elements(items);
    let dups = raw_len - set.len();
    Ok((set, dups))
}

pub fn read_set_file(path: impl AsRef<Path>) -> Result<(FiniteSet, usize), SetError> {
    let text = std::fs::read_to_string(path)?;
    parse_set_text(&text)
}

/// Renders a set in the set file format.
pub fn format_set_text(a: &FiniteSet) -> String {
    let mut s = String::new();
    for x in a {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    s
}
