//! Nondegenerate walks in a difference graph.
//!
//! A walk `v_0, v_1, ..., v_k` has differences `x_i = v_{i-1} - v_i`. It is
//! nondegenerate when no nonempty subset of the `x_i` sums to zero; this
//! covers both the proper-subset condition and the requirement that the walk
//! is not closed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use super::graph::DiffGraph;
use super::SunitError;
use crate::rational::Rational;

pub const MAX_PATH_LENGTH: usize = 8;

/// Checks every nonempty subset of `diffs` by enumeration.
pub fn is_nondegenerate_path(diffs: &[Rational]) -> bool {
    if diffs.is_empty() {
        return false;
    }
    assert!(diffs.len() < 32, "subset enumeration over {} terms", diffs.len());
    (1u32..1 << diffs.len()).all(|mask| {
        let sum = diffs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(Rational::zero(), |acc, (_, d)| acc + d.clone());
        !sum.is_zero()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathCount {
    pub total: u64,
    /// endpoint vertex index -> number of nondegenerate walks ending there
    pub per_endpoint: BTreeMap<usize, u64>,
}

impl PathCount {
    /// The endpoint reached by the most walks, and that count.
    pub fn busiest_endpoint(&self) -> Option<(usize, u64)> {
        self.per_endpoint.iter().map(|(&w, &c)| (w, c)).max_by_key(|&(w, c)| (c, std::cmp::Reverse(w)))
    }
}

struct Search<'g> {
    g: &'g DiffGraph,
    k: usize,
    /// sums of all nonempty subsets of the differences chosen so far
    subset_sums: Vec<Rational>,
    out: PathCount,
}

impl Search<'_> {
    fn extend(&mut self, at: usize, depth: usize) {
        if depth == self.k {
            self.out.total += 1;
            *self.out.per_endpoint.entry(at).or_insert(0) += 1;
            return;
        }
        let xs = self.g.vertices().elements();
        for &next in self.g.neighbors(at) {
            let d = &xs[at] - &xs[next];
            let neg = -&d;
            if self.subset_sums.contains(&neg) {
                continue;
            }
            let mark = self.subset_sums.len();
            for i in 0..mark {
                let s = &self.subset_sums[i] + &d;
                self.subset_sums.push(s);
            }
            self.subset_sums.push(d);
            self.extend(next, depth + 1);
            self.subset_sums.truncate(mark);
        }
    }
}

/// Counts nondegenerate walks of exactly `k` edges starting at vertex `v`.
/// Vertices may repeat.
pub fn count_nondeg_paths(g: &DiffGraph, v: usize, k: usize) -> Result<PathCount, SunitError> {
    if !(1..=MAX_PATH_LENGTH).contains(&k) {
        return Err(SunitError::Capacity(format!("path length {k} outside 1..={MAX_PATH_LENGTH}")));
    }
    if v >= g.vertex_count() {
        return Err(SunitError::Domain(format!("vertex {v} out of range")));
    }
    let mut search = Search {
        g,
        k,
        subset_sums: Vec::with_capacity(1 << k),
        out: PathCount { total: 0, per_endpoint: BTreeMap::new() },
    };
    search.extend(v, 0);
    Ok(search.out)
}

/// `∏_{l=0}^{k-1} max(δ - 2^l + 1, 0)`: at step `l` at most `2^l - 1`
/// neighbours close a zero subset sum.
pub fn path_count_lower_bound(min_degree: u64, k: u32) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, l| {
        let bad = (1u128 << l) - 1;
        let good = (min_degree as u128).saturating_sub(bad);
        acc * BigInt::from(good)
    })
}
