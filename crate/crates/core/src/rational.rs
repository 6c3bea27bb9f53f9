//! Exact rational scalars.
//!
//! [`Rational`] wraps an arbitrary-precision fraction that is always kept in
//! lowest terms with a positive denominator, so structural equality, hashing
//! and ordering all agree with numeric equality.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid rational literal {0:?}")]
    Parse(String),
}

/// An exact fraction in canonical form: `gcd(|num|, den) = 1`, `den > 0`,
/// and zero is `0/1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds the reduced fraction `num/den`.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, RationalError> {
        let den = den.into();
        if den.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        // BigRational::new reduces and moves the sign onto the numerator.
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Exact quotient; fails only on a zero divisor.
    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, RationalError> {
        if rhs.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rational, RationalError> {
        Rational::one().checked_div(self)
    }

    pub fn pow(&self, exp: i32) -> Result<Rational, RationalError> {
        if exp < 0 && self.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Rational(num_traits::Pow::pow(&self.0, exp)))
    }

    /// Lossy conversion for reports.
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

macro_rules! from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Rational {
            fn from(n: $t) -> Self {
                Rational::from_integer(n)
            }
        }
    )*};
}
from_int!(i32, i64, u32, u64, usize, i128, BigInt);

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// The four field operations, as used by [`rat_op`] and the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }
}

pub fn rat_op(a: &Rational, b: &Rational, op: Op) -> Result<Rational, RationalError> {
    Ok(match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Mul => a * b,
        Op::Div => a.checked_div(b)?,
    })
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::parse_bytes(s.as_bytes(), 10)
}

/// Text grammar: `-? digits ( '/' digits )?`.
impl FromStr for Rational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RationalError::Parse(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (num, den) = match body.split_once('/') {
            Some((n, d)) => (parse_digits(n).ok_or_else(bad)?, parse_digits(d).ok_or_else(bad)?),
            None => (parse_digits(body).ok_or_else(bad)?, BigInt::one()),
        };
        let num = if negative { -num } else { num };
        Rational::new(num, den)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Accepts the text grammar, or a bare JSON integer.
impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Rational;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational such as \"-3/7\" or an integer")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from(v))
            }
        }
        deserializer.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn make_reduces() {
        let r = q(2, 4);
        assert_eq!((r.numer().clone(), r.denom().clone()), (1.into(), 2.into()));
        let z = q(0, 5);
        assert_eq!((z.numer().clone(), z.denom().clone()), (0.into(), 1.into()));
        let s = q(3, -6);
        assert_eq!((s.numer().clone(), s.denom().clone()), ((-1).into(), 2.into()));
        assert_eq!(Rational::new(1, 0), Err(RationalError::ZeroDenominator));
    }

    #[test]
    fn field_ops() {
        assert_eq!(rat_op(&q(1, 2), &q(1, 3), Op::Add).unwrap(), q(5, 6));
        assert_eq!(rat_op(&q(2, 3), &Rational::zero(), Op::Mul).unwrap(), q(0, 1));
        assert_eq!(
            rat_op(&Rational::one(), &Rational::zero(), Op::Div),
            Err(RationalError::ZeroDenominator)
        );
    }

    #[test]
    fn serde_forms() {
        let v: Vec<Rational> = serde_json::from_str(r#"["-3/7", 4, "6/4"]"#).unwrap();
        assert_eq!(v, vec![q(-3, 7), q(4, 1), q(3, 2)]);
        assert_eq!(serde_json::to_string(&q(-3, 7)).unwrap(), r#""-3/7""#);
        assert!(serde_json::from_str::<Rational>(r#""1/0""#).is_err());
        assert!(serde_json::from_str::<Rational>("1.5").is_err());
    }

    #[test]
    fn text_grammar() {
        assert_eq!("-3/7".parse::<Rational>().unwrap(), q(-3, 7));
        assert_eq!("42".parse::<Rational>().unwrap(), q(42, 1));
        assert_eq!("6/4".parse::<Rational>().unwrap(), q(3, 2));
        for bad in ["", "-", "1/", "/2", "+1", "1.5", "a", "1/-2", "--1", " 1"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} should not parse");
        }
        assert_eq!("1/0".parse::<Rational>(), Err(RationalError::ZeroDenominator));
        assert_eq!(q(-3, 7).to_string(), "-3/7");
        assert_eq!(q(84, 2).to_string(), "42");
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn renormalization_is_identity(n in -10_000i64..10_000, d in -10_000i64..10_000) {
            prop_assume!(d != 0);
            let r = q(n, d);
            let again = Rational::new(r.numer().clone(), r.denom().clone()).unwrap();
            prop_assert_eq!(&again, &r);
            prop_assert!(r.denom().is_positive());
            prop_assert!(num_integer::Integer::gcd(r.numer(), r.denom()).is_one());
        }

        #[test]
        fn field_axioms(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a + &(-&a), Rational::zero());
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.recip().unwrap(), Rational::one());
            }
        }

        #[test]
        fn text_round_trip(a in arb_rational()) {
            prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
        }
    }
}
