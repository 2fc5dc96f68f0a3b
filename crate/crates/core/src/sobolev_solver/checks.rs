//! Closed-form consequences of Sobolev inequalities and numerical checks of
//! the linearized and the tight inequality.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::constants::{eucl_constant, ExponentPair, Extended};
use crate::fit::log_log_slope;
use crate::error::{Error, Result};
use crate::model_spaces::{energy, lp_integral, SampledFunction, WeightedGrid};
use crate::seeding;

use super::optimize::{optimize_aopt, AoptOptions};
use super::quotient::{check_unit_mass, numerator, sobolev_quotient, MIN_ENERGY};

/// Optimal `α_p` constant `(Eucl(N,p) / min θ^{1/N})^p`; zero when the
/// minimal density is infinite.
pub fn alpha_p_value(min_theta: Extended, n: f64, p: f64) -> Result<f64> {
    ExponentPair::new(p, n)?;
    match min_theta {
        Extended::Infinite => Ok(0.0),
        Extended::Finite(theta) => {
            if !(theta > 0.0 && theta.is_finite()) {
                return Err(Error::domain(format!("minimal density must be positive, got {theta}")));
            }
            Ok((eucl_constant(n, p)? / theta.powf(1.0 / n)).powf(p))
        }
    }
}

/// Lower bound `(Eucl(N,p)/A)^N` on the asymptotic volume ratio implied by
/// a Euclidean-type Sobolev inequality with constant `A`.
pub fn avr_lower_bound_from_sobolev(a: f64, n: f64, p: f64) -> Result<f64> {
    ExponentPair::new(p, n)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("Sobolev constant must be positive, got {a}")));
    }
    Ok((eucl_constant(n, p)? / a).powf(n))
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizationReport {
    pub q: f64,
    pub eps: Vec<f64>,
    /// `Q(1 + ε f)` for each `ε`.
    pub lhs: Vec<f64>,
    /// `(q−2)‖f−f̄‖²_{L²}/‖f'‖²_{L²}`.
    pub rhs: f64,
    pub defect: Vec<f64>,
    /// Slope of `log defect` against `log ε`; absent when every defect
    /// vanishes.
    pub fitted_order: Option<f64>,
    /// `min(q, 3) − 2`.
    pub predicted_order: f64,
    /// `max_ε defect / (ε‖f‖_{W^{1,2}})^{predicted_order}`.
    pub max_defect_ratio: f64,
}

/// Relative size of the mean of `f` tolerated as zero.
const MEAN_TOL: f64 = 1e-8;

/// Compares `Q(1 + εf)` with its small-`ε` limit for zero-mean `f`.
pub fn linearization_check(f: &SampledFunction, q: f64, eps_list: &[f64]) -> Result<LinearizationReport> {
    let grid = f.grid();
    check_unit_mass(grid)?;
    if !(q >= 2.0 && q.is_finite()) {
        return Err(Error::domain(format!("linearization needs q >= 2, got {q}")));
    }
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::input("eps_list must hold positive numbers"));
    }
    let v = f.values();
    let e = energy(grid, v, 2.0);
    if !(e > MIN_ENERGY) {
        return Err(Error::degenerate("linearization needs a non-constant f"));
    }
    let l2 = lp_integral(grid, v, 2.0);
    let mean = grid.integrate_map(v, |x| x);
    if mean.abs() > MEAN_TOL * l2.sqrt() {
        return Err(Error::input(format!("f must have zero mean, mean is {mean:e}")));
    }
    if let Some(eps) = eps_list.iter().find(|eps| **eps * l2.sqrt() > 0.5) {
        return Err(Error::input(format!("‖εf‖_L2 exceeds 1/2 for ε = {eps}")));
    }
    let rhs = (q - 2.0) * (l2 - mean * mean) / e;
    let w12 = (l2 + e).sqrt();
    let predicted_order = q.min(3.0) - 2.0;
    let mut lhs = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let u = f.with_values(v.iter().map(|x| 1.0 + eps * x).collect())?;
        lhs.push(sobolev_quotient(&u, q)?);
    }
    let defect: Vec<f64> = lhs.iter().map(|l| (l - rhs).abs()).collect();
    let max_defect_ratio = eps_list
        .iter()
        .zip(&defect)
        .map(|(eps, d)| d / (eps * w12).powf(predicted_order))
        .fold(0.0, f64::max);
    Ok(LinearizationReport {
        q,
        eps: eps_list.to_vec(),
        lhs,
        rhs,
        fitted_order: log_log_slope(eps_list, &defect),
        defect,
        predicted_order,
        max_defect_ratio,
    })
}

/// Relative slack granted to the right-hand side before a trial counts as a
/// violation, absorbing discretization error of the model constants.
pub const TIGHT_CHECK_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct TightCheckReport {
    pub q: f64,
    pub a: f64,
    pub trials: usize,
    pub passed: bool,
    pub violations: usize,
    /// Largest `(‖u‖²_q − ‖u‖²_2) / (A‖u'‖²_2)` over all candidates.
    pub worst_ratio: f64,
    pub slack: f64,
    /// Candidate attaining `worst_ratio`, if any candidate was non-constant.
    pub witness: Option<SampledFunction>,
    pub witness_from_optimizer: bool,
}

/// Tests `‖u‖²_q ≤ A‖u'‖²_2 + ‖u‖²_2` on seeded random trigonometric
/// polynomials and on a short warm-started optimizer run.
pub fn tight_sobolev_check(grid: &WeightedGrid, q: f64, a: f64, trials: usize, seed: u64) -> Result<TightCheckReport> {
    check_unit_mass(grid)?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::domain(format!("exponent must satisfy 1 <= q < inf, got {q}")));
    }
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("constant must be finite and non-negative, got {a}")));
    }
    let arc = Arc::new(grid.clone());
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut from_optimizer = false;
    let mut violations = 0;
    let mut consider = |u: Vec<f64>, optimizer: bool, worst: &mut f64| -> Result<()> {
        let e = energy(grid, &u, 2.0);
        let num = numerator(grid, &u, q);
        let scale = lp_integral(grid, &u, 2.0).max(f64::MIN_POSITIVE);
        if !(e > MIN_ENERGY * scale) {
            return Ok(());
        }
        if num > a * e * (1.0 + TIGHT_CHECK_SLACK) {
            violations += 1;
        }
        let ratio = if a > 0.0 { num / (a * e) } else { f64::INFINITY * num.signum() };
        if ratio > *worst {
            *worst = ratio;
            witness = Some(SampledFunction::new(arc.clone(), u)?);
            from_optimizer = optimizer;
        }
        Ok(())
    };

    let (lo, hi) = (grid.left(), grid.right());
    let mut rng = seeding::stream(seed, 0);
    for _ in 0..trials {
        let size = 10f64.powf(rng.random_range(-3.0..0.5));
        let terms: Vec<(f64, f64)> =
            (1..=8).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let u = grid
            .nodes()
            .iter()
            .map(|&t| {
                let z = PI * (t - lo) / (hi - lo);
                1.0 + size
                    * terms
                        .iter()
                        .enumerate()
                        .map(|(k, (c, s))| {
                            let k = (k + 1) as f64;
                            (c * (k * z).cos() + s * (k * z).sin()) / (k * k)
                        })
                        .sum::<f64>()
            })
            .collect();
        consider(u, false, &mut worst)?;
    }
    if q > 2.0 {
        let opts = AoptOptions { n_restarts: 2, max_iter: 300, seed, ..AoptOptions::default() };
        match optimize_aopt(grid, q, &opts) {
            Ok(r) => consider(r.argmax_or_argmin.into_values(), true, &mut worst)?,
            Err(Error::Domain(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(TightCheckReport {
        q,
        a,
        trials,
        passed: violations == 0,
        violations,
        worst_ratio: worst,
        slack: TIGHT_CHECK_SLACK,
        witness,
        witness_from_optimizer: from_optimizer,
    })
}
