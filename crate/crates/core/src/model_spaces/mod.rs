//! Weighted intervals standing in for one-dimensional metric measure spaces,
//! and piecewise linear functions on them.

mod function;
mod grid;
pub mod io;

pub use function::{dirichlet_energy, lp_norm, SampledFunction};
pub(crate) use function::{energy, lp_integral};
pub use grid::{sphere_normalizer, DomainKind, WeightedGrid};

use crate::error::Result;

/// The model space `I_N`: `[0, π]` with normalized density `sin^{N-1}`.
pub fn build_sphere_model(n: f64, n_nodes: usize) -> Result<WeightedGrid> {
    WeightedGrid::sphere_model(n, n_nodes)
}

/// The Euclidean model `[0, R]` with density `σ_{N-1} t^{N-1}`.
pub fn build_cone_model(n: f64, r_max: f64, n_nodes: usize) -> Result<WeightedGrid> {
    WeightedGrid::cone_model(n, r_max, n_nodes)
}
