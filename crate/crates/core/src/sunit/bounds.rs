use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::SunitError;
use crate::rational::Rational;

/// Largest subspace bound (in decimal digits) that will be materialized.
pub const DEFAULT_DIGIT_BUDGET: u64 = 1_000_000;

/// Exponent `4k^4(k + kr + 1)` of the subspace bound.
pub fn subspace_exponent(k: u64, r: u64) -> BigUint {
    let k = BigUint::from(k);
    let r = BigUint::from(r);
    BigUint::from(4u32) * k.pow(4) * (&k + &k * &r + 1u32)
}

/// Decimal digits of `(8k)^{4k^4(k+kr+1)}`, from the logarithm.
pub fn subspace_bound_digits(k: u64, r: u64) -> f64 {
    let e = subspace_exponent(k, r).to_f64().unwrap_or(f64::INFINITY);
    (e * ((8 * k) as f64).log10()).floor() + 1.0
}

/// `(8k)^{4k^4(k+kr+1)}`, the bound on nondegenerate solutions of
/// `a_1 x_1 + ... + a_k x_k = 1` with `x_i` in a rank-`r` group.
pub fn subspace_bound(k: u64, r: u64) -> Result<BigUint, SunitError> {
    subspace_bound_with_budget(k, r, DEFAULT_DIGIT_BUDGET)
}

pub fn subspace_bound_with_budget(k: u64, r: u64, digit_budget: u64) -> Result<BigUint, SunitError> {
    if k == 0 {
        return Err(SunitError::Domain("k must be at least 1".into()));
    }
    let digits = subspace_bound_digits(k, r);
    if digits > digit_budget as f64 {
        return Err(SunitError::Capacity(format!(
            "subspace bound for k={k}, r={r} has about {digits:.0} digits, over the budget of {digit_budget}"
        )));
    }
    let e = subspace_exponent(k, r).to_u32().expect("exponent fits once the digit budget passed");
    Ok(BigUint::from(8 * k).pow(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Step3Params {
    /// `⌈2/ε⌉`
    pub k: u64,
    /// `1 / (5 k^5 ln(8k))`, a report value
    pub c: f64,
}

/// Path length and rank constant for a given `ε ∈ (0, 1)`.
pub fn step3_params(eps: &Rational) -> Result<Step3Params, SunitError> {
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(SunitError::Domain(format!("epsilon {eps} must lie in (0, 1)")));
    }
    // 2/ε = 2·den/num with num > 0
    let two_den: BigInt = BigInt::from(2) * eps.denom();
    let k = two_den.div_ceil(eps.numer());
    debug_assert!(k.is_positive());
    let k = k
        .to_u64()
        .ok_or_else(|| SunitError::Capacity(format!("k = {k} does not fit in 64 bits")))?;
    let kf = k as f64;
    let c = 1.0 / (5.0 * kf.powi(5) * (8.0 * kf).ln());
    Ok(Step3Params { k, c })
}
