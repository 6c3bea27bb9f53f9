//! Difference graphs over a multiplicative group `Γ ⊂ ℚ*`: membership,
//! graph construction, minimum-degree pruning, nondegenerate walk counting,
//! and the numeric bounds attached to them.

use thiserror::Error;

use crate::factor::FactorError;

mod bounds;
mod graph;
mod lattice;
mod paths;

pub use bounds::{
    step3_params, subspace_bound, subspace_bound_digits, subspace_bound_with_budget, subspace_exponent,
    Step3Params, DEFAULT_DIGIT_BUDGET,
};
pub use graph::{build_diff_graph, prune_min_degree, DiffGraph};
pub use lattice::{build_lattice, gamma_exponents, gamma_member, solve_integer_system, ExponentLattice, GroupSpec};
pub use paths::{count_nondeg_paths, is_nondegenerate_path, path_count_lower_bound, PathCount, MAX_PATH_LENGTH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SunitError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error(transparent)]
    Factor(#[from] FactorError),
}
