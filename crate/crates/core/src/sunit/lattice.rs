//! Membership in a finitely generated subgroup of the nonzero rationals.
//!
//! A rational `x = ±∏ p^e_p` lies in `Γ = ⟨-1, g_1, ..., g_r⟩` exactly when its
//! exponent vector `e` over the primes of the generators is an integer
//! combination of the generators' exponent vectors. That is decided by
//! putting the exponent matrix in column Hermite form.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::SunitError;
use crate::factor::factorize;
use crate::rational::Rational;

/// Generators of `Γ`; `-1` is always treated as a member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSpec {
    generators: Vec<Rational>,
}

impl GroupSpec {
    pub fn new(generators: Vec<Rational>) -> Result<Self, SunitError> {
        if generators.iter().any(Rational::is_zero) {
            return Err(SunitError::Domain("0 cannot generate a multiplicative group".into()));
        }
        Ok(GroupSpec { generators })
    }

    pub fn generators(&self) -> &[Rational] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }
}

/// Prime basis and exponent matrix of a [`GroupSpec`]: `matrix[i][j]` is the
/// exponent of `primes[i]` in generator `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentLattice {
    pub primes: Vec<BigUint>,
    pub matrix: Vec<Vec<BigInt>>,
    rank: usize,
}

pub fn build_lattice(spec: &GroupSpec) -> Result<ExponentLattice, SunitError> {
    let mut facs = Vec::with_capacity(spec.rank());
    for g in spec.generators() {
        let num = factorize(g.numer().magnitude())?;
        let den = factorize(g.denom().magnitude())?;
        facs.push((num, den));
    }
    let mut primes: Vec<BigUint> = facs
        .iter()
        .flat_map(|(n, d)| n.primes().chain(d.primes()).cloned())
        .collect();
    primes.sort();
    primes.dedup();
    let matrix = primes
        .iter()
        .map(|p| {
            facs.iter()
                .map(|(n, d)| BigInt::from(n.exponent_of(p)) - BigInt::from(d.exponent_of(p)))
                .collect()
        })
        .collect();
    Ok(ExponentLattice { primes, matrix, rank: spec.rank() })
}

fn strip(mut m: BigUint, p: &BigUint) -> (BigUint, u64) {
    let mut e = 0;
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return (m, e);
        }
        m = q;
        e += 1;
    }
}

impl ExponentLattice {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Exponent vector of `|x|` over the prime basis, or `None` when `x`
    /// involves some other prime.
    pub fn exponent_vector(&self, x: &Rational) -> Option<Vec<BigInt>> {
        let mut num = x.numer().magnitude().clone();
        let mut den = x.denom().magnitude().clone();
        let mut e = Vec::with_capacity(self.primes.len());
        for p in &self.primes {
            let (n2, en) = strip(num, p);
            let (d2, ed) = strip(den, p);
            num = n2;
            den = d2;
            e.push(BigInt::from(en) - BigInt::from(ed));
        }
        (num.is_one() && den.is_one()).then_some(e)
    }
}

/// Solves `M z = e` over the integers, returning one solution if any exists.
pub fn solve_integer_system(m: &[Vec<BigInt>], e: &[BigInt]) -> Option<Vec<BigInt>> {
    let rows = m.len();
    assert_eq!(rows, e.len(), "right-hand side length must match the row count");
    let cols = m.first().map_or(0, Vec::len);
    let mut h: Vec<Vec<BigInt>> = m.to_vec();
    // u tracks the unimodular column operations: h = m * u
    let mut u: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| (0..cols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let col_axpy = |mat: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, q: &BigInt| {
        for row in mat.iter_mut() {
            let t = &row[src] * q;
            row[dst] -= t;
        }
    };
    let col_swap = |mat: &mut Vec<Vec<BigInt>>, a: usize, b: usize| {
        for row in mat.iter_mut() {
            row.swap(a, b);
        }
    };
    let col_neg = |mat: &mut Vec<Vec<BigInt>>, a: usize| {
        for row in mat.iter_mut() {
            row[a] = -&row[a];
        }
    };

    // pivot_of_row[i] = Some(c) when row i carries the pivot of column c
    let mut pivot_of_row = vec![None; rows];
    let mut pc = 0;
    for i in 0..rows {
        if pc == cols {
            break;
        }
        loop {
            let best = (pc..cols)
                .filter(|&j| !h[i][j].is_zero())
                .min_by(|&a, &b| h[i][a].abs().cmp(&h[i][b].abs()));
            let Some(best) = best else { break };
            col_swap(&mut h, pc, best);
            col_swap(&mut u, pc, best);
            let mut done = true;
            for j in pc + 1..cols {
                if h[i][j].is_zero() {
                    continue;
                }
                let q = h[i][j].div_floor(&h[i][pc]);
                col_axpy(&mut h, j, pc, &q);
                col_axpy(&mut u, j, pc, &q);
                if !h[i][j].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[i][pc].is_zero() {
            continue;
        }
        if h[i][pc].is_negative() {
            col_neg(&mut h, pc);
            col_neg(&mut u, pc);
        }
        pivot_of_row[i] = Some(pc);
        pc += 1;
    }

    let mut y = vec![BigInt::zero(); cols];
    for i in 0..rows {
        let mut residual = e[i].clone();
        for (j, yj) in y.iter().enumerate() {
            if !yj.is_zero() {
                residual -= &h[i][j] * yj;
            }
        }
        match pivot_of_row[i] {
            Some(c) => {
                let (q, r) = residual.div_rem(&h[i][c]);
                if !r.is_zero() {
                    return None;
                }
                y[c] = q;
            }
            None => {
                if !residual.is_zero() {
                    return None;
                }
            }
        }
    }
    let z: Vec<BigInt> = (0..cols)
        .map(|i| (0..cols).fold(BigInt::zero(), |acc, j| acc + &u[i][j] * &y[j]))
        .collect();
    debug_assert!((0..rows).all(|i| {
        (0..cols).fold(BigInt::zero(), |acc, j| acc + &m[i][j] * &z[j]) == e[i]
    }));
    Some(z)
}

/// Exponents `z` with `|x| = ∏ |g_j|^{z_j}`, if `x ∈ Γ`.
pub fn gamma_exponents(x: &Rational, lat: &ExponentLattice) -> Result<Option<Vec<BigInt>>, SunitError> {
    if x.is_zero() {
        return Err(SunitError::Domain("0 is never in a multiplicative group".into()));
    }
    let Some(e) = lat.exponent_vector(x) else { return Ok(None) };
    if lat.primes.is_empty() {
        // every generator is ±1 and x = ±1
        return Ok(Some(vec![BigInt::zero(); lat.rank()]));
    }
    Ok(solve_integer_system(&lat.matrix, &e))
}

/// Whether `x ∈ Γ`. The sign of `x` is ignored since `-1 ∈ Γ`.
pub fn gamma_member(x: &Rational, lat: &ExponentLattice) -> Result<bool, SunitError> {
    Ok(gamma_exponents(x, lat)?.is_some())
}
