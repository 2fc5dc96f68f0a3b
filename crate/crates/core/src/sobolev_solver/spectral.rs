use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, Tridiagonal};
use crate::model_spaces::{energy, SampledFunction, WeightedGrid};

use super::quotient::MASS_TOL;

/// First non-trivial Neumann eigenpair of `-(h u')' = λ h u`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralGapResult {
    pub lambda: f64,
    /// Zero mean and unit `L²` norm against the (normalized) grid measure.
    pub eigenfunction: SampledFunction,
    /// Euclidean norm of `A u − λ M u` for the finite element pencil.
    pub residual: f64,
    pub mean: f64,
    pub l2_norm: f64,
}

/// Stiffness and consistent mass matrices of the P1 discretization.
pub(crate) fn pencil(grid: &WeightedGrid) -> (Tridiagonal, Tridiagonal) {
    let (ad, ao) = grid.stiffness_matrix();
    let (md, mo) = grid.mass_matrix(None);
    (Tridiagonal::new(ad, ao), Tridiagonal::new(md, mo))
}

/// Spectral gap of a weighted interval.
///
/// The second eigenvalue of the pencil is bracketed by a Sturm count and a
/// Rayleigh quotient, located by bisection and polished by inverse
/// iteration. Grids whose mass is not one are rejected unless
/// `auto_normalize` is set (the eigenvalue itself is scale invariant).
pub fn spectral_gap(grid: &WeightedGrid, auto_normalize: bool) -> Result<SpectralGapResult> {
    let m = grid.total_mass();
    if !(m > 0.0) || grid.weight_at_node().iter().all(|w| *w == 0.0) {
        return Err(Error::input("spectral gap needs a non-zero density"));
    }
    let grid = if (m - 1.0).abs() > MASS_TOL {
        if !auto_normalize {
            return Err(Error::input(format!("spectral gap needs unit mass, grid mass is {m}")));
        }
        grid.normalized()
    } else {
        grid.clone()
    };
    let (a, mm) = pencil(&grid);
    let n = a.len();
    let ones = vec![1.0; n];
    let m1 = mm.mul(&ones);
    let total = dot(&ones, &m1);

    // a zero-mean test function gives an upper bracket
    let x = grid.nodes();
    let mut trial: Vec<f64> = x.to_vec();
    orthogonalize(&mut trial, &m1, total);
    let mut hi = a.quad_form(&trial) / mm.quad_form(&trial);
    while Tridiagonal::sturm_count(&a, &mm, hi) < 2 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if Tridiagonal::sturm_count(&a, &mm, mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let sigma = 0.5 * (lo + hi);

    let shifted = a.add_scaled(&mm, -sigma);
    let mut v = trial;
    let mut lambda = sigma;
    for _ in 0..6 {
        let rhs = mm.mul(&v);
        let mut w = shifted.solve(&rhs);
        orthogonalize(&mut w, &m1, total);
        let nrm = mm.quad_form(&w).sqrt();
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::degenerate("inverse iteration broke down"));
        }
        v = w.iter().map(|x| x / nrm).collect();
        lambda = energy(&grid, &v, 2.0);
    }
    if v[0] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let av = grid.stiffness_apply(&v);
    let mv = mm.mul(&v);
    let residual = av.iter().zip(&mv).map(|(p, q)| (p - lambda * q).powi(2)).sum::<f64>().sqrt();
    let mean = dot(&v, &m1) / total;
    let l2_norm = mm.quad_form(&v).sqrt();
    Ok(SpectralGapResult {
        lambda,
        eigenfunction: SampledFunction::new(Arc::new(grid), v)?,
        residual,
        mean,
        l2_norm,
    })
}

/// Removes the mean: `v ← v − (1ᵀMv / 1ᵀM1)·1`.
fn orthogonalize(v: &mut [f64], m1: &[f64], total: f64) {
    let c = dot(v, m1) / total;
    v.iter_mut().for_each(|x| *x -= c);
}
