//! Exact inequality checks, the geometric-progression energy construction, and
//! the structural probe that measures sum-product quantities of a set.

use num_bigint::BigInt;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::{parse, Env, EvalError, Evaluator};
use crate::rational::Rational;
use crate::set::{diffset, is_sidon, mult_energy, pairset_len, sumset, FiniteSet, PairOp};

/// Default cap on ordered pairs enumerated for any single derived set.
pub const DEFAULT_MEMORY_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error(transparent)]
    Capacity(#[from] EvalError),
}

fn big_to_string<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

/// Outcome of a `lhs >= rhs` check. A witness is attached exactly when the
/// check fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    #[serde(serialize_with = "big_to_string")]
    pub lhs: BigInt,
    #[serde(serialize_with = "big_to_string")]
    pub rhs: BigInt,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl CheckResult {
    /// `lhs >= rhs`, with `witness` recorded only on failure.
    pub fn at_least(name: impl Into<String>, lhs: impl Into<BigInt>, rhs: impl Into<BigInt>, witness: impl FnOnce() -> Value) -> Self {
        let (lhs, rhs) = (lhs.into(), rhs.into());
        let holds = lhs >= rhs;
        CheckResult { name: name.into(), lhs, rhs, holds, witness: (!holds).then(witness) }
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.holds { "ok  " } else { "FAIL" };
        write!(f, "{verdict} {}: lhs={} rhs={}", self.name, self.lhs, self.rhs)?;
        if let Some(w) = &self.witness {
            write!(f, " witness={w}")?;
        }
        Ok(())
    }
}

fn set_witness(a: &FiniteSet) -> Value {
    json!({ "set": a })
}

fn card(a: &FiniteSet) -> BigInt {
    BigInt::from(a.len())
}

/// `|(A-A)/(A-A)| >= |A|^2 - 2` for `|A| >= 2`.
pub fn check_ungar(a: &FiniteSet) -> Result<CheckResult, CheckError> {
    if a.len() < 2 {
        return Err(CheckError::Precondition(format!("need |A| >= 2, got {}", a.len())));
    }
    let d = diffset(a, a);
    let lhs = BigInt::from(pairset_len(&d, &d, PairOp::Ratio));
    let n = card(a);
    let rhs = &n * &n - 2;
    Ok(CheckResult::at_least(format!("ungar |A|={}", a.len()), lhs, rhs, || set_witness(a)))
}

/// `|(A+A)/(A+A)| >= 2|A|^2 - 1` for nonempty `A` of positive rationals.
pub fn check_balog(a: &FiniteSet) -> Result<CheckResult, CheckError> {
    if a.is_empty() {
        return Err(CheckError::Precondition("need |A| >= 1".into()));
    }
    if !a.all_positive() {
        return Err(CheckError::Precondition("all elements must be positive".into()));
    }
    let s = sumset(a, a);
    let lhs = BigInt::from(pairset_len(&s, &s, PairOp::Ratio));
    let n = card(a);
    let rhs = 2 * &n * &n - 1;
    Ok(CheckResult::at_least(format!("balog |A|={}", a.len()), lhs, rhs, || set_witness(a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CsMode {
    /// `E*(B)|B/B| >= |B|^4`
    Ratio,
    /// `E*(B)|BB| >= |B|^4`
    Product,
}

pub fn check_cauchy_schwarz(b: &FiniteSet, mode: CsMode) -> Result<CheckResult, CheckError> {
    if b.is_empty() {
        return Err(CheckError::Precondition("need |B| >= 1".into()));
    }
    let op = match mode {
        CsMode::Ratio => {
            if b.contains_zero() {
                return Err(CheckError::Precondition("0 in B is not allowed in ratio mode".into()));
            }
            PairOp::Ratio
        }
        CsMode::Product => PairOp::Product,
    };
    let lhs = BigInt::from(mult_energy(b)) * BigInt::from(pairset_len(b, b, op));
    let rhs = card(b).pow(4);
    let name = match mode {
        CsMode::Ratio => "cauchy-schwarz ratio",
        CsMode::Product => "cauchy-schwarz product",
    };
    Ok(CheckResult::at_least(format!("{name} |B|={}", b.len()), lhs, rhs, || set_witness(b)))
}

/// `{2^1, ..., 2^n}`; empty for `n = 0`.
pub fn gp_set(n: u32) -> FiniteSet {
    FiniteSet::from_elements((1..=n).map(|k| Rational::from(BigInt::from(1) << k)))
}

/// Extends a quintuple drawn from the middle third `{n/3, ..., 2n/3 - 1}` to
/// `(n1, n2, n3, n4, n5, n2+n5-n1, n1+n3-n5, n1+n4-n5)`.
pub fn octuple_from_quintuple(q: [i64; 5], n: i64) -> Result<[i64; 8], CheckError> {
    if n <= 0 || n % 3 != 0 {
        return Err(CheckError::Range(format!("n = {n} must be a positive multiple of 3")));
    }
    let (lo, hi) = (n / 3, 2 * n / 3 - 1);
    if let Some(bad) = q.iter().find(|&&x| x < lo || x > hi) {
        return Err(CheckError::Range(format!("{bad} outside the middle third [{lo}, {hi}]")));
    }
    let [n1, n2, n3, n4, n5] = q;
    Ok([n1, n2, n3, n4, n5, n2 + n5 - n1, n1 + n3 - n5, n1 + n4 - n5])
}

/// The four linear equations an octuple must satisfy.
pub fn octuple_linear_system_holds(o: &[i64; 8]) -> bool {
    let [n1, n2, n3, n4, n5, n6, n7, n8] = *o;
    n1 + n3 == n5 + n7 && n1 + n4 == n5 + n8 && n2 + n3 == n6 + n7 && n2 + n4 == n6 + n8
}

fn pow2(e: i64) -> BigInt {
    BigInt::from(1) << e as usize
}

/// `(2^n1 + 2^n2)(2^n3 + 2^n4) = (2^n5 + 2^n6)(2^n7 + 2^n8)`.
pub fn octuple_product_identity_holds(o: &[i64; 8]) -> bool {
    let pair = |i: usize, j: usize| pow2(o[i]) + pow2(o[j]);
    pair(0, 1) * pair(2, 3) == pair(4, 5) * pair(6, 7)
}

/// All `(n/3)^5` octuples produced from middle-third quintuples, in
/// lexicographic order of the quintuple.
pub fn middle_third_octuples(n: i64) -> Result<Vec<[i64; 8]>, CheckError> {
    if n <= 0 || n % 3 != 0 {
        return Err(CheckError::Range(format!("n = {n} must be a positive multiple of 3")));
    }
    let range: Vec<i64> = (n / 3..2 * n / 3).collect();
    let mut out = Vec::with_capacity(range.len().pow(5));
    for &a in &range {
        for &b in &range {
            for &c in &range {
                for &d in &range {
                    for &e in &range {
                        out.push(octuple_from_quintuple([a, b, c, d, e], n)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Verifies, for `A = {2, ..., 2^n}` with `3 | n`, that `A` is Sidon, that
/// every middle-third octuple lies in `[1, n]^8` and satisfies the product
/// identity, and that `E*(A+A) >= (n/3)^5`.
pub fn check_gp_energy(n: u32) -> Result<CheckResult, CheckError> {
    check_gp_energy_with_budget(n, DEFAULT_MEMORY_BUDGET)
}

pub fn check_gp_energy_with_budget(n: u32, budget: u64) -> Result<CheckResult, CheckError> {
    if n == 0 || !n.is_multiple_of(3) {
        return Err(CheckError::Precondition(format!("n = {n} must be a positive multiple of 3")));
    }
    let sumset_size = u64::from(n) * u64::from(n + 1) / 2;
    if sumset_size * sumset_size > budget {
        return Err(CheckError::Capacity(EvalError::Capacity {
            expr: "E*(A+A)".into(),
            pairs: u128::from(sumset_size * sumset_size),
            budget,
        }));
    }
    let a = gp_set(n);
    let sidon = is_sidon(&a);
    let octuples = middle_third_octuples(i64::from(n))?;
    let bad_octuple = octuples.iter().find(|o| {
        !(o.iter().all(|&x| 1 <= x && x <= i64::from(n))
            && octuple_linear_system_holds(o)
            && octuple_product_identity_holds(o))
    });
    let s = sumset(&a, &a);
    let energy = mult_energy(&s);
    let rhs = BigInt::from(n / 3).pow(5);
    let mut result = CheckResult::at_least(format!("gp-energy n={n}"), energy, rhs, || json!({ "n": n }));
    if !sidon || bad_octuple.is_some() {
        result.holds = false;
        result.witness = Some(json!({
            "n": n,
            "sidon": sidon,
            "bad_octuple": bad_octuple,
        }));
    }
    Ok(result)
}

fn errors_to_strings<S: Serializer>(errs: &[EvalError], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(errs.iter().map(ToString::to_string))
}

/// Sum-product measurements of a single set. Quantities that could not be
/// computed within the memory budget are `None`, with the reason in `errors`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub descriptor: String,
    pub card_a: u64,
    pub card_sumset: Option<u64>,
    pub card_diffset: Option<u64>,
    pub card_ratio_of_sumsets: Option<u64>,
    pub card_prod_of_diffsets: Option<u64>,
    pub card_a_times_4a: Option<u64>,
    pub energy_mult_sumset: Option<u64>,
    pub ratios: ProbeRatios,
    #[serde(serialize_with = "errors_to_strings")]
    pub errors: Vec<EvalError>,
}

/// Normalized quantities, each exact.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ProbeRatios {
    /// `|A+A| / |A|`
    pub doubling: Option<Rational>,
    /// `|(A+A)/(A+A)| / |A|^2`
    pub ratio_of_sumsets_over_a2: Option<Rational>,
    /// `|(A-A)(A-A)| / |A|^2`
    pub prod_of_diffsets_over_a2: Option<Rational>,
    /// `|A(A+A+A+A)| / |A|^2`
    pub a_times_4a_over_a2: Option<Rational>,
    /// `E*(A+A) / |A|^5`
    pub energy_over_a5: Option<Rational>,
    /// `|A+A|^2 / |A|^3`, bounded when `|A+A| << |A|^{3/2}`
    pub sumset_sq_over_a3: Option<Rational>,
}

pub const PROBE_EXPRESSIONS: [&str; 5] = ["A+A", "A-A", "(A+A)/(A+A)", "(A-A)(A-A)", "A(A+A+A+A)"];

/// Like [`structural_probe`] but records capacity failures per quantity.
pub fn probe_partial(descriptor: &str, a: &FiniteSet, budget: u64) -> ProbeRecord {
    let mut env = Env::new();
    env.insert("A".into(), a.clone());
    let mut ev = Evaluator::with_budget(budget);
    let mut errors = Vec::new();
    let mut sets = Vec::with_capacity(PROBE_EXPRESSIONS.len());
    for src in PROBE_EXPRESSIONS {
        let ast = parse(src).expect("built-in expression parses");
        match ev.eval(&ast, &env) {
            Ok(s) => sets.push(Some(s)),
            Err(e) => {
                errors.push(e);
                sets.push(None);
            }
        }
    }
    let cards: Vec<Option<u64>> = sets.iter().map(|s| s.as_ref().map(|s| s.len() as u64)).collect();
    let energy_mult_sumset = sets[0].as_ref().and_then(|s| {
        let pairs = s.len() as u128 * s.len() as u128;
        if pairs > budget as u128 {
            errors.push(EvalError::Capacity { expr: "E*(A+A)".into(), pairs, budget });
            None
        } else {
            Some(mult_energy(s))
        }
    });
    let n = a.len() as u64;
    let over = |num: Option<u64>, den: u64| -> Option<Rational> {
        num.and_then(|x| Rational::new(x, den).ok())
    };
    let ratios = ProbeRatios {
        doubling: over(cards[0], n),
        ratio_of_sumsets_over_a2: over(cards[2], n * n),
        prod_of_diffsets_over_a2: over(cards[3], n * n),
        a_times_4a_over_a2: over(cards[4], n * n),
        energy_over_a5: energy_mult_sumset
            .and_then(|e| Rational::new(BigInt::from(e), BigInt::from(n).pow(5)).ok()),
        sumset_sq_over_a3: cards[0].and_then(|s| Rational::new(BigInt::from(s).pow(2), BigInt::from(n).pow(3)).ok()),
    };
    ProbeRecord {
        descriptor: descriptor.to_string(),
        card_a: n,
        card_sumset: cards[0],
        card_diffset: cards[1],
        card_ratio_of_sumsets: cards[2],
        card_prod_of_diffsets: cards[3],
        card_a_times_4a: cards[4],
        energy_mult_sumset,
        ratios,
        errors,
    }
}

/// Measures every [`ProbeRecord`] quantity of `A`; pure measurement, nothing
/// is asserted. Fails with the first derived set that exceeds `budget` pairs.
pub fn structural_probe(descriptor: &str, a: &FiniteSet, budget: u64) -> Result<ProbeRecord, CheckError> {
    if a.len() < 2 {
        return Err(CheckError::Precondition(format!("need |A| >= 2, got {}", a.len())));
    }
    let mut record = probe_partial(descriptor, a, budget);
    if record.errors.is_empty() {
        Ok(record)
    } else {
        Err(CheckError::Capacity(record.errors.swap_remove(0)))
    }
}
