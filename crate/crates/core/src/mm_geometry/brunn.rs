use serde::Serialize;

use crate::constants::{distortion_sigma, Extended};
use crate::error::{Error, Result};
use crate::model_spaces::WeightedGrid;

/// Allowed shortfall of the left-hand side.
pub const BRUNN_MINKOWSKI_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BrunnMinkowskiVerdict {
    Pass,
    Fail,
    /// A distortion coefficient is infinite and the inequality says nothing.
    Vacuous,
}

#[derive(Debug, Clone, Serialize)]
pub struct BrunnMinkowskiReport {
    pub a0: (f64, f64),
    pub a1: (f64, f64),
    pub a_t: (f64, f64),
    pub t: f64,
    pub k: f64,
    pub n: f64,
    /// Minimal distance between the sets for `K >= 0`, maximal for `K < 0`.
    pub theta: f64,
    pub sigma_0: Extended,
    pub sigma_1: Extended,
    /// `m(A_t)^{1/N}`.
    pub lhs: f64,
    /// `σ^{(1-t)} m(A_0)^{1/N} + σ^{(t)} m(A_1)^{1/N}`; absent when vacuous.
    pub rhs: Option<f64>,
    pub slack: f64,
    pub verdict: BrunnMinkowskiVerdict,
}

fn check_interval(grid: &WeightedGrid, name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo <= hi && lo >= grid.left() && hi <= grid.right()) {
        return Err(Error::input(format!(
            "{name} = [{lo}, {hi}] must be an interval inside [{}, {}]",
            grid.left(),
            grid.right()
        )));
    }
    Ok(())
}

/// Brunn–Minkowski inequality with distortion coefficients for two intervals
/// of a weighted interval. Geodesics are segments, so the set of
/// `t`-midpoints is the interval between the interpolated endpoints.
pub fn brunn_minkowski_check(
    grid: &WeightedGrid,
    a0: (f64, f64),
    a1: (f64, f64),
    t: f64,
    k: f64,
    n: f64,
) -> Result<BrunnMinkowskiReport> {
    check_interval(grid, "A0", a0)?;
    check_interval(grid, "A1", a1)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("t must lie in [0, 1], got {t}")));
    }
    if !(k.is_finite() && n.is_finite() && n >= 1.0) {
        return Err(Error::domain(format!("need finite K and N >= 1, got K = {k}, N = {n}")));
    }
    let a_t = ((1.0 - t) * a0.0 + t * a1.0, (1.0 - t) * a0.1 + t * a1.1);
    let theta = if k >= 0.0 {
        (a1.0 - a0.1).max(a0.0 - a1.1).max(0.0)
    } else {
        (a1.1 - a0.0).abs().max((a0.1 - a1.0).abs())
    };
    let sigma_0 = distortion_sigma(1.0 - t, k, n, theta);
    let sigma_1 = distortion_sigma(t, k, n, theta);
    let root = |(lo, hi): (f64, f64)| grid.mass_between(lo, hi).powf(1.0 / n);
    let lhs = root(a_t);
    let rhs = match (sigma_0, sigma_1) {
        (Extended::Finite(s0), Extended::Finite(s1)) => Some(s0 * root(a0) + s1 * root(a1)),
        _ => None,
    };
    let verdict = match rhs {
        None => BrunnMinkowskiVerdict::Vacuous,
        Some(r) if lhs - r >= -BRUNN_MINKOWSKI_SLACK => BrunnMinkowskiVerdict::Pass,
        Some(_) => BrunnMinkowskiVerdict::Fail,
    };
    Ok(BrunnMinkowskiReport {
        a0,
        a1,
        a_t,
        t,
        k,
        n,
        theta,
        sigma_0,
        sigma_1,
        lhs,
        rhs,
        slack: BRUNN_MINKOWSKI_SLACK,
        verdict,
    })
}
