//! Trial-division factorization of small positive integers.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

/// Default trial-division bound: any integer up to this value factors completely.
pub const DEFAULT_FACTOR_BOUND: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error("cannot factor 0")]
    Zero,
    #[error("cofactor {cofactor} of {n} has no factor below {limit} but exceeds the trial-division bound")]
    Capacity { n: BigUint, cofactor: BigUint, limit: u64 },
}

/// Prime-power decomposition with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Factorization(Vec<(BigUint, u32)>);

impl Factorization {
    pub fn pairs(&self) -> &[(BigUint, u32)] {
        &self.0
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.0.iter().map(|(p, _)| p)
    }

    pub fn exponent_of(&self, p: &BigUint) -> u32 {
        self.0.iter().find(|(q, _)| q == p).map_or(0, |(_, e)| *e)
    }

    pub fn recompose(&self) -> BigUint {
        self.0.iter().fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Factors `n` with the default bound.
pub fn factorize(n: &BigUint) -> Result<Factorization, FactorError> {
    factorize_with_bound(n, DEFAULT_FACTOR_BOUND)
}

/// Factors `n` by trial division with divisors up to `sqrt(bound)`.
///
/// A leftover cofactor is accepted as prime when no divisor up to its square
/// root exists; otherwise the factorization is incomplete and a capacity error
/// is returned.
pub fn factorize_with_bound(n: &BigUint, bound: u64) -> Result<Factorization, FactorError> {
    if n.is_zero() {
        return Err(FactorError::Zero);
    }
    let limit = isqrt(bound).max(2);
    let mut rest = n.clone();
    let mut out = Vec::new();
    let mut d: u64 = 2;
    // big cofactor: BigUint division until it fits in a machine word
    while d <= limit && rest.to_u64().is_none() {
        let mut e = 0;
        loop {
            let (q, rem) = rest.div_rem(&BigUint::from(d));
            if !rem.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            out.push((BigUint::from(d), e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if let Some(mut r) = rest.to_u64() {
        while d <= limit && d.saturating_mul(d) <= r {
            if r % d == 0 {
                let mut e = 0;
                while r % d == 0 {
                    r /= d;
                    e += 1;
                }
                out.push((BigUint::from(d), e));
            }
            d += if d == 2 { 1 } else { 2 };
        }
        rest = BigUint::from(r);
    }
    if !rest.is_one() {
        let proven_prime = BigUint::from(d) * BigUint::from(d) > rest;
        if !proven_prime {
            return Err(FactorError::Capacity { n: n.clone(), cofactor: rest, limit });
        }
        out.push((rest, 1));
    }
    Ok(Factorization(out))
}
