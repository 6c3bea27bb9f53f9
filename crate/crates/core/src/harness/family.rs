use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::rational::Rational;
use crate::set::FiniteSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("invalid family configuration: {0}")]
    Config(String),
}

fn one() -> i64 {
    1
}

/// A parametrized family of finite sets. `n` is always the size of the
/// generated set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `{start, start+1, ..., start+n-1}`
    Interval {
        n: u64,
        #[serde(default = "one")]
        start: i64,
    },
    /// `{start + i·step : 0 <= i < n}`
    Arithmetic { n: u64, start: i64, step: i64 },
    /// `{r, r^2, ..., r^n}`
    Geometric { n: u64, ratio: Rational },
    /// `n` distinct integers drawn uniformly from `[1, m]`.
    RandomSubset {
        n: u64,
        m: u64,
        #[serde(default)]
        seed: u64,
    },
    /// `A0 ∪ λA0` for the progression `A0 = {start + i·step}`, where `A0` is
    /// grown one term at a time (alternating between the two halves) until
    /// the union has `n` elements.
    UnionDilate {
        n: u64,
        #[serde(default = "one")]
        start: i64,
        #[serde(default = "one")]
        step: i64,
        lambda: Rational,
    },
}

impl FamilySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            FamilySpec::Interval { .. } => "interval",
            FamilySpec::Arithmetic { .. } => "arithmetic",
            FamilySpec::Geometric { .. } => "geometric",
            FamilySpec::RandomSubset { .. } => "random_subset",
            FamilySpec::UnionDilate { .. } => "union_dilate",
        }
    }

    pub fn n(&self) -> u64 {
        match *self {
            FamilySpec::Interval { n, .. }
            | FamilySpec::Arithmetic { n, .. }
            | FamilySpec::Geometric { n, .. }
            | FamilySpec::RandomSubset { n, .. }
            | FamilySpec::UnionDilate { n, .. } => n,
        }
    }

    /// The RNG seed, for the kinds that use one.
    pub fn seed(&self) -> Option<u64> {
        match *self {
            FamilySpec::RandomSubset { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// Builds a spec from a kind name and `key=value` pairs, as given on the
    /// command line. Values that look like integers are passed as integers.
    pub fn from_kind_params<'a>(
        kind: &str,
        params: impl IntoIterator<Item = (&'a str, &'a str)>,
        seed: Option<u64>,
    ) -> Result<FamilySpec, FamilyError> {
        let mut obj = Map::new();
        obj.insert("kind".into(), Value::String(kind.to_string()));
        for (k, v) in params {
            let v = v.trim();
            let value = match v.parse::<i64>() {
                Ok(i) => Value::from(i),
                Err(_) => match v.parse::<u64>() {
                    Ok(u) => Value::from(u),
                    Err(_) => Value::String(v.to_string()),
                },
            };
            if obj.insert(k.trim().to_string(), value).is_some() {
                return Err(FamilyError::Config(format!("parameter {k} given twice")));
            }
        }
        if let Some(s) = seed {
            obj.insert("seed".into(), Value::from(s));
        }
        serde_json::from_value(Value::Object(obj)).map_err(|e| FamilyError::Config(e.to_string()))
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Interval { n, start } => write!(f, "interval(n={n},start={start})"),
            FamilySpec::Arithmetic { n, start, step } => write!(f, "arithmetic(n={n},start={start},step={step})"),
            FamilySpec::Geometric { n, ratio } => write!(f, "geometric(n={n},ratio={ratio})"),
            FamilySpec::RandomSubset { n, m, seed } => write!(f, "random_subset(n={n},m={m},seed={seed})"),
            FamilySpec::UnionDilate { n, start, step, lambda } => {
                write!(f, "union_dilate(n={n},start={start},step={step},lambda={lambda})")
            }
        }
    }
}

fn config(msg: impl Into<String>) -> FamilyError {
    FamilyError::Config(msg.into())
}

fn progression(n: u64, start: i64, step: i64) -> Result<FiniteSet, FamilyError> {
    let last = (n.saturating_sub(1) as i128) * step as i128 + start as i128;
    if i64::try_from(last).is_err() {
        return Err(config(format!("progression of length {n} leaves the 64-bit range")));
    }
    Ok(FiniteSet::from_ints((0..n as i64).map(|i| start + i * step)))
}

/// Generates the set described by `spec`; identical specs give identical sets.
pub fn gen_family(spec: &FamilySpec) -> Result<FiniteSet, FamilyError> {
    match spec {
        FamilySpec::Interval { n, start } => progression(*n, *start, 1),
        FamilySpec::Arithmetic { n, start, step } => {
            if *step == 0 {
                return Err(config("arithmetic step must be nonzero"));
            }
            progression(*n, *start, *step)
        }
        FamilySpec::Geometric { n, ratio } => {
            if ratio.is_zero() || ratio.abs() == Rational::one() {
                return Err(config(format!("geometric ratio {ratio} must be nonzero with |r| != 1")));
            }
            let mut out = Vec::with_capacity(*n as usize);
            let mut x = ratio.clone();
            for _ in 0..*n {
                let next = &x * ratio;
                out.push(x);
                x = next;
            }
            Ok(FiniteSet::from_elements(out))
        }
        FamilySpec::RandomSubset { n, m, seed } => {
            if m < n {
                return Err(config(format!("random_subset needs m >= n, got m={m}, n={n}")));
            }
            let (n, m) = (
                usize::try_from(*n).map_err(|_| config("n too large"))?,
                usize::try_from(*m).map_err(|_| config("m too large"))?,
            );
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let picks = rand::seq::index::sample(&mut rng, m, n);
            Ok(FiniteSet::from_ints(picks.into_iter().map(|i| i as i64 + 1)))
        }
        FamilySpec::UnionDilate { n, start, step, lambda } => {
            if *step == 0 {
                return Err(config("union_dilate step must be nonzero"));
            }
            if lambda.is_zero() || *lambda == Rational::one() {
                return Err(config(format!("union_dilate lambda {lambda} must differ from 0 and 1")));
            }
            let n = *n as usize;
            let mut out = std::collections::BTreeSet::new();
            let mut i: i64 = 0;
            // the progression is unbounded, so new elements keep arriving
            while out.len() < n {
                let a = i
                    .checked_mul(*step)
                    .and_then(|x| x.checked_add(*start))
                    .ok_or_else(|| config("union_dilate progression leaves the 64-bit range"))?;
                let a = Rational::from(a);
                let la = &a * lambda;
                out.insert(a);
                if out.len() < n {
                    out.insert(la);
                }
                i += 1;
            }
            Ok(FiniteSet::from_elements(out))
        }
    }
}

/// The survey's default families at size `n`: an interval, an arithmetic
/// progression, geometric progressions with ratios 2 and 3, a random subset
/// of `[1, 10n]`, and `A0 ∪ λA0` for `λ = 2, 3`.
pub fn default_families(n: u64, seed: u64) -> Vec<FamilySpec> {
    vec![
        FamilySpec::Interval { n, start: 1 },
        FamilySpec::Arithmetic { n, start: 2, step: 3 },
        FamilySpec::Geometric { n, ratio: Rational::from(2) },
        FamilySpec::Geometric { n, ratio: Rational::from(3) },
        FamilySpec::RandomSubset { n, m: 10 * n, seed: seed.wrapping_add(n) },
        FamilySpec::UnionDilate { n, start: 1, step: 1, lambda: Rational::from(2) },
        FamilySpec::UnionDilate { n, start: 1, step: 1, lambda: Rational::from(3) },
    ]
}

pub const DEFAULT_SIZES: [u64; 5] = [4, 8, 12, 16, 20];

pub const DEFAULT_SEED: u64 = 20_240_101;

/// [`default_families`] for every size in [`DEFAULT_SIZES`].
pub fn default_survey_families() -> Vec<FamilySpec> {
    DEFAULT_SIZES.iter().flat_map(|&n| default_families(n, DEFAULT_SEED)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::{diffset, sumset};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> FiniteSet {
        FiniteSet::from_ints(v.iter().copied())
    }

    #[test]
    fn family_examples() {
        assert_eq!(gen_family(&FamilySpec::Interval { n: 5, start: 1 }).unwrap(), ints(&[1, 2, 3, 4, 5]));
        assert_eq!(
            gen_family(&FamilySpec::Geometric { n: 3, ratio: Rational::from(2) }).unwrap(),
            ints(&[2, 4, 8])
        );
        for seed in [0, 1, 99, u64::MAX] {
            assert_eq!(gen_family(&FamilySpec::RandomSubset { n: 3, m: 3, seed }).unwrap(), ints(&[1, 2, 3]));
        }
        assert_eq!(
            gen_family(&FamilySpec::Arithmetic { n: 4, start: 5, step: -2 }).unwrap(),
            ints(&[-1, 1, 3, 5])
        );
        let half = Rational::new(1, 2).unwrap();
        let g = gen_family(&FamilySpec::Geometric { n: 3, ratio: -half.clone() }).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.contains(&Rational::new(-1, 8).unwrap()));
        assert_eq!(gen_family(&FamilySpec::Interval { n: 0, start: 1 }).unwrap(), FiniteSet::empty());
    }

    #[test]
    fn union_dilate_examples() {
        // {1,2,3} ∪ {2,4,6}: a_i, λa_i alternately until 5 elements
        let u = gen_family(&FamilySpec::UnionDilate { n: 5, start: 1, step: 1, lambda: Rational::from(2) }).unwrap();
        assert_eq!(u, ints(&[1, 2, 3, 4, 6]));
        let u = gen_family(&FamilySpec::UnionDilate { n: 6, start: 1, step: 2, lambda: Rational::from(-1) }).unwrap();
        assert_eq!(u, ints(&[-5, -3, -1, 1, 3, 5]));
    }

    #[test]
    fn invalid_parameters() {
        let bad = [
            FamilySpec::Arithmetic { n: 3, start: 0, step: 0 },
            FamilySpec::Geometric { n: 3, ratio: Rational::zero() },
            FamilySpec::Geometric { n: 3, ratio: Rational::from(-1) },
            FamilySpec::RandomSubset { n: 4, m: 3, seed: 0 },
            FamilySpec::UnionDilate { n: 3, start: 1, step: 1, lambda: Rational::one() },
            FamilySpec::UnionDilate { n: 3, start: 1, step: 0, lambda: Rational::from(2) },
            FamilySpec::Arithmetic { n: 3, start: i64::MAX, step: 1 },
        ];
        for spec in bad {
            assert!(matches!(gen_family(&spec), Err(FamilyError::Config(_))), "{spec}");
        }
    }

    #[test]
    fn spec_from_params_and_json() {
        let s = FamilySpec::from_kind_params("geometric", [("n", "4"), ("ratio", "3/2")], None).unwrap();
        assert_eq!(s, FamilySpec::Geometric { n: 4, ratio: Rational::new(3, 2).unwrap() });
        let s = FamilySpec::from_kind_params("random_subset", [("n", "4"), ("m", "40")], Some(7)).unwrap();
        assert_eq!(s.seed(), Some(7));
        assert_eq!(s.to_string(), "random_subset(n=4,m=40,seed=7)");
        let s = FamilySpec::from_kind_params("interval", [("n", "4")], None).unwrap();
        assert_eq!(s, FamilySpec::Interval { n: 4, start: 1 });
        assert!(FamilySpec::from_kind_params("interval", [("n", "4"), ("bogus", "1")], None).is_err());
        assert!(FamilySpec::from_kind_params("spiral", [("n", "4")], None).is_err());
        assert!(FamilySpec::from_kind_params("interval", [("n", "4"), ("n", "5")], None).is_err());

        let js: FamilySpec = serde_json::from_str(r#"{"kind":"union_dilate","n":6,"lambda":"1/2"}"#).unwrap();
        assert_eq!(js.kind(), "union_dilate");
        let back: FamilySpec = serde_json::from_str(&serde_json::to_string(&js).unwrap()).unwrap();
        assert_eq!(back, js);
    }

    #[test]
    fn default_families_have_requested_size() {
        for spec in default_survey_families() {
            assert_eq!(gen_family(&spec).unwrap().len() as u64, spec.n(), "{spec}");
        }
    }

    #[test]
    fn interval_closed_form() {
        for n in 1..=100 {
            let a = gen_family(&FamilySpec::Interval { n, start: 1 }).unwrap();
            assert_eq!(sumset(&a, &a).len() as u64, 2 * n - 1);
            assert_eq!(diffset(&a, &a).len() as u64, 2 * n - 1);
        }
    }

    fn any_spec() -> impl Strategy<Value = FamilySpec> {
        prop_oneof![
            (0u64..40, -50i64..50).prop_map(|(n, start)| FamilySpec::Interval { n, start }),
            (0u64..40, -50i64..50, prop_oneof![-9i64..0, 1i64..10])
                .prop_map(|(n, start, step)| FamilySpec::Arithmetic { n, start, step }),
            (0u64..20, prop_oneof![-5i64..-1, 2i64..6])
                .prop_map(|(n, r)| FamilySpec::Geometric { n, ratio: Rational::from(r) }),
            (0u64..40, 0u64..100, any::<u64>())
                .prop_map(|(n, extra, seed)| FamilySpec::RandomSubset { n, m: n + extra, seed }),
            (0u64..40, -20i64..20, prop_oneof![-5i64..0, 1i64..6], prop_oneof![-4i64..0, 2i64..5])
                .prop_map(|(n, start, step, l)| FamilySpec::UnionDilate { n, start, step, lambda: Rational::from(l) }),
        ]
    }

    proptest! {
        #[test]
        fn size_and_determinism(spec in any_spec()) {
            let a = gen_family(&spec).unwrap();
            prop_assert_eq!(a.len() as u64, spec.n());
            prop_assert_eq!(gen_family(&spec).unwrap(), a);
        }

        #[test]
        fn random_subset_stays_in_range(n in 0u64..30, extra in 0u64..50, seed in any::<u64>()) {
            let m = n + extra;
            let a = gen_family(&FamilySpec::RandomSubset { n, m, seed }).unwrap();
            prop_assert!(a.iter().all(|x| *x >= Rational::one() && *x <= Rational::from(m)));
        }
    }
}
