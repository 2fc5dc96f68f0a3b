use serde::Serialize;

use crate::constants::{comparison_volume, unit_ball_volume, Dimension, Extended};
use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::model_spaces::{DomainKind, WeightedGrid};

use super::discrete::DiscreteMMS;

/// Slope of `log θ` against `log r` over the smallest radii below which the
/// profile counts as diverging.
pub const DIVERGENCE_SLOPE: f64 = -0.25;
/// Relative tolerance for the monotonicity of `θ_{N,r}` on unbounded models.
pub const MONOTONE_TOL: f64 = 1e-9;

/// Spaces where open balls have a mass.
pub trait BallMass {
    /// How a center is specified: a point index or a position.
    type Point: Copy + Serialize;

    /// `m(B_r(x))` for the open ball.
    fn ball_mass(&self, x: Self::Point, r: f64) -> Result<f64>;
}

impl BallMass for DiscreteMMS {
    type Point = usize;

    fn ball_mass(&self, x: usize, r: f64) -> Result<f64> {
        check_radius(r)?;
        if x >= self.len() {
            return Err(Error::input(format!("center {x} is not a point of the space")));
        }
        Ok((0..self.len()).filter(|&j| self.distance(x, j) < r).map(|j| self.mass()[j]).sum())
    }
}

impl BallMass for WeightedGrid {
    type Point = f64;

    fn ball_mass(&self, x: f64, r: f64) -> Result<f64> {
        check_radius(r)?;
        if !(x >= self.left() && x <= self.right()) {
            return Err(Error::input(format!("center {x} lies outside [{}, {}]", self.left(), self.right())));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(self.mass_between(x - r, x + r))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r >= 0.0) || r.is_nan() {
        return Err(Error::domain(format!("ball radius must be >= 0, got {r}")));
    }
    Ok(())
}

/// Mass of the open ball of radius `r` about `x`.
pub fn ball_mass<S: BallMass + ?Sized>(space: &S, x: S::Point, r: f64) -> Result<f64> {
    space.ball_mass(x, r)
}

/// Volume ratios `θ_{N,r}(x) = m(B_r(x))/(ω_N r^N)` along a list of radii.
#[derive(Debug, Clone, Serialize)]
pub struct DensityProfile<P> {
    pub center: P,
    pub n: f64,
    pub radii: Vec<f64>,
    pub theta_r: Vec<f64>,
    /// `θ_{N,r}` at the smallest radius.
    pub theta_smallest: f64,
    /// Supremum of `θ_{N,r}` over the radius list.
    pub theta_sup: f64,
    /// Least-squares slope of `log θ` against `log r` over the smallest radii.
    pub small_radius_slope: Option<f64>,
    /// The sup, or `inf` when the small-radius slope shows divergence.
    pub theta_0_estimate: Extended,
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::input("radius list is empty"));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::input("radii must be positive and finite"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("radii must be strictly increasing"));
    }
    Ok(())
}

/// `θ_{N,r}(x)` for every radius, with the small-radius behaviour summarized.
///
/// The density at `x` is estimated by the sup over the list, which is what
/// Bishop–Gromov monotonicity makes the honest estimator; no limit is fitted.
/// When `log θ` grows at a rate steeper than [`DIVERGENCE_SLOPE`] over the
/// smallest third of the radii the estimate is reported as infinite.
pub fn density_profile<S: BallMass + ?Sized>(space: &S, x: S::Point, n: f64, radii: &[f64]) -> Result<DensityProfile<S::Point>> {
    let n = Dimension::new(n)?.value();
    check_radii(radii)?;
    let omega = unit_ball_volume(n)?;
    let theta_r = radii
        .iter()
        .map(|&r| Ok(space.ball_mass(x, r)? / (omega * r.powf(n))))
        .collect::<Result<Vec<f64>>>()?;
    let theta_sup = theta_r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let head = (radii.len() / 3).max(3).min(radii.len());
    let slope = log_log_slope(&radii[..head], &theta_r[..head]);
    let diverging = slope.is_some_and(|s| s < DIVERGENCE_SLOPE);
    Ok(DensityProfile {
        center: x,
        n,
        radii: radii.to_vec(),
        theta_smallest: theta_r[0],
        theta_r,
        theta_sup,
        small_radius_slope: slope,
        theta_0_estimate: if diverging { Extended::Infinite } else { Extended::Finite(theta_sup) },
    })
}

/// `m(B_r(x))/v_{K,N}(r)` for each radius; Bishop–Gromov makes this
/// non-increasing on `CD(K, N)` spaces.
pub fn bishop_gromov_ratios<S: BallMass + ?Sized>(space: &S, x: S::Point, k: f64, n: f64, radii: &[f64]) -> Result<Vec<f64>> {
    check_radii(radii)?;
    radii.iter().map(|&r| Ok(space.ball_mass(x, r)? / comparison_volume(k, n, r)?)).collect()
}

/// Asymptotic volume ratio with the profile it was read from.
#[derive(Debug, Clone, Serialize)]
pub struct AvrEstimate {
    pub value: f64,
    pub center: f64,
    pub n: f64,
    pub radii: Vec<f64>,
    pub theta_r: Vec<f64>,
    pub monotone_tol: f64,
}

/// Number of radii sampled in the largest decade.
const AVR_RADII: usize = 25;

/// `lim_{r→∞} θ_{N,r}(x)` read off the largest decade of radii available on
/// a grid standing for a half-line. The profile must be non-increasing up to
/// [`MONOTONE_TOL`]; the value at the largest radius is returned.
pub fn avr_estimate(grid: &WeightedGrid, x: f64, n: f64) -> Result<AvrEstimate> {
    match grid.kind() {
        DomainKind::ConeModel { .. } | DomainKind::Custom { unbounded: true } => {}
        other => {
            return Err(Error::input(format!(
                "asymptotic volume ratio needs an unbounded model, got {other:?}"
            )))
        }
    }
    let top = grid.right() - x;
    if !(top > 0.0) {
        return Err(Error::input(format!("center {x} leaves no room for large balls")));
    }
    let radii: Vec<f64> =
        (0..AVR_RADII).map(|i| top * 10f64.powf(i as f64 / (AVR_RADII - 1) as f64 - 1.0)).collect();
    let profile = density_profile(grid, x, n, &radii)?;
    for (i, w) in profile.theta_r.windows(2).enumerate() {
        if w[1] > w[0] * (1.0 + MONOTONE_TOL) {
            return Err(Error::ModelViolation(format!(
                "θ increases from {} to {} between radii {} and {}",
                w[0],
                w[1],
                radii[i],
                radii[i + 1]
            )));
        }
    }
    Ok(AvrEstimate {
        value: profile.theta_r[AVR_RADII - 1],
        center: x,
        n: profile.n,
        radii,
        theta_r: profile.theta_r,
        monotone_tol: MONOTONE_TOL,
    })
}
