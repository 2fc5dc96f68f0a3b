use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{eucl_constant, unit_ball_volume, ExponentPair};
use crate::error::{Error, Result};
use crate::model_spaces::{energy, lp_integral, DomainKind, SampledFunction, WeightedGrid};
use crate::seeding;

use super::density::BallMass;

/// Inputs of [`local_sobolev_check`].
#[derive(Debug, Clone, Serialize)]
pub struct LocalSobolevParams {
    pub x: f64,
    /// Support radius of the trial functions.
    pub r: f64,
    /// Radius at which the volume ratio is measured.
    pub big_r: f64,
    pub n: f64,
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    /// Lower Ricci bound; read from the model when absent.
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalSobolevVerdict {
    Pass,
    Fail,
    /// The hypotheses behind the constant could not be confirmed, so only the
    /// ratios are reported.
    OutsideRegime,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalSobolevReport {
    pub params: LocalSobolevParams,
    pub p_star: f64,
    pub k: Option<f64>,
    pub theta_r: f64,
    pub theta_big_r: f64,
    /// `θ_{N,r}(x)/θ_{N,R}(x)`.
    pub density_ratio: f64,
    pub delta: f64,
    pub eta: Option<f64>,
    /// `1/(1 − (2C^{1/N}+1)δ − 2η) − 1`, when positive denominators allow it.
    pub epsilon: Option<f64>,
    pub eucl: f64,
    pub regime_notes: Vec<String>,
    /// Largest `‖u‖_{p*} θ_{N,R}^{1/N} / (Eucl ‖u'‖_p)` over the trials.
    pub worst_ratio: f64,
    pub worst_trial: usize,
    pub witness: SampledFunction,
    pub violations: usize,
    pub verdict: LocalSobolevVerdict,
}

/// `‖u‖_{L^{p*}}/‖u'‖_{L^p}` for `u` supported in the open ball `B_r(x)`.
///
/// Every cell on which the interpolant is nonzero must lie in the closed
/// ball; anything else is rejected.
pub fn local_sobolev_ratio(u: &SampledFunction, x: f64, r: f64, n: f64, p: f64) -> Result<f64> {
    let pair = ExponentPair::new(p, n)?;
    let nodes = u.grid().nodes();
    let v = u.values();
    for c in 0..nodes.len() - 1 {
        if (v[c] != 0.0 || v[c + 1] != 0.0) && ((nodes[c] - x).abs() > r || (nodes[c + 1] - x).abs() > r) {
            return Err(Error::input(format!(
                "function is nonzero on [{}, {}], outside the ball of radius {r} about {x}",
                nodes[c],
                nodes[c + 1]
            )));
        }
    }
    let e = energy(u.grid(), v, p);
    if !(e > 0.0) {
        return Err(Error::degenerate("trial function has zero energy"));
    }
    let ps = pair.p_star();
    Ok(lp_integral(u.grid(), v, ps).powf(1.0 / ps) / e.powf(1.0 / p))
}

/// Node values of trial `index`: a profile of the scaled offset `(t − x)/r`,
/// kept at zero on nodes whose neighbours leave the open ball.
fn trial_values(grid: &WeightedGrid, prm: &LocalSobolevParams, index: usize) -> Vec<f64> {
    let mut rng = seeding::stream(prm.seed, index as u64);
    let (n, p, r, x) = (prm.n, prm.p, prm.r, prm.x);
    let lo = ((grid.left() - x) / r).max(-1.0);
    let hi = ((grid.right() - x) / r).min(1.0);
    let profile: Box<dyn Fn(f64) -> f64> = match index % 4 {
        0 => {
            let beta = 10f64.powf(rng.random_range(-2.0..4.0));
            let pc = p / (p - 1.0);
            let ex = (p - n) / p;
            let floor = (1.0 + beta).powf(ex);
            Box::new(move |s: f64| ((1.0 + beta * s.abs().powf(pc)).powf(ex) - floor).max(0.0))
        }
        1 => {
            let a = rng.random_range(1.0..4.0);
            let c = rng.random_range(1.0..3.0);
            Box::new(move |s: f64| (1.0 - s.abs().powf(a)).max(0.0).powf(c))
        }
        2 => {
            let c = rng.random_range(1.0..3.0);
            let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.3..0.3));
            Box::new(move |s: f64| {
                let s = s.abs();
                let wave: f64 = a.iter().enumerate().map(|(k, ak)| ak * ((k + 1) as f64 * std::f64::consts::PI * s).cos()).sum();
                (1.0 - s).max(0.0).powf(c) * (1.0 + wave)
            })
        }
        _ => {
            let center = lo + (hi - lo) * rng.random_range(0.2..0.8);
            let width = rng.random_range(0.05..1.0) * (1.0 - center.abs()).max(0.05);
            let c = rng.random_range(1.0..3.0);
            Box::new(move |s: f64| (1.0 - ((s - center) / width).powi(2)).max(0.0).powf(c))
        }
    };
    let nodes = grid.nodes();
    support_mask(grid, x, r)
        .into_iter()
        .enumerate()
        .map(|(i, keep)| if keep { profile((nodes[i] - x) / r) } else { 0.0 })
        .collect()
}

/// Nodes that may carry a nonzero value: inside the open ball together with
/// their neighbours, so every cell touching them stays in the ball.
fn support_mask(grid: &WeightedGrid, x: f64, r: f64) -> Vec<bool> {
    let nodes = grid.nodes();
    let inside = |i: usize| (nodes[i] - x).abs() < r;
    (0..nodes.len())
        .map(|i| inside(i) && (i == 0 || inside(i - 1)) && (i + 1 == nodes.len() || inside(i + 1)))
        .collect()
}

fn model_curvature(grid: &WeightedGrid) -> Option<f64> {
    match grid.kind() {
        DomainKind::SphereModel { n, .. } => Some(n - 1.0),
        DomainKind::ConeModel { .. } => Some(0.0),
        DomainKind::Custom { .. } => None,
    }
}

/// Tests `‖u‖_{p*} ≤ (1+ε) Eucl(N,p) θ_{N,R}(x)^{-1/N} ‖u'‖_p` on seeded
/// functions supported in `B_r(x)`.
///
/// The almost-Euclidean factor is `1 − (2C^{1/N}+1)δ − 2η` with
/// `C = θ_{N,r}/θ_{N,R}`, `δ = r/R` and `η` the negative-curvature correction
/// `1 − 2R√(K⁻/N)/sinh(2R√(K⁻/N))`. If the curvature is unknown, exceeds the
/// admissible scale, or the factor is not positive, the ratios are still
/// computed but the verdict is [`LocalSobolevVerdict::OutsideRegime`].
pub fn local_sobolev_check(grid: &WeightedGrid, prm: &LocalSobolevParams) -> Result<LocalSobolevReport> {
    let pair = ExponentPair::new(prm.p, prm.n)?;
    let n = prm.n;
    if !(prm.r > 0.0 && prm.r < prm.big_r && prm.big_r.is_finite()) {
        return Err(Error::domain(format!("need 0 < r < R, got r = {}, R = {}", prm.r, prm.big_r)));
    }
    if prm.trials == 0 {
        return Err(Error::input("at least one trial is needed"));
    }
    let omega = unit_ball_volume(n)?;
    let theta_r = grid.ball_mass(prm.x, prm.r)? / (omega * prm.r.powf(n));
    let theta_big_r = grid.ball_mass(prm.x, prm.big_r)? / (omega * prm.big_r.powf(n));
    let density_ratio = theta_r / theta_big_r;
    let delta = prm.r / prm.big_r;

    let mut notes = Vec::new();
    let k = prm.k.or_else(|| model_curvature(grid));
    if let Some(dim) = grid.dimension() {
        if n < dim {
            notes.push(format!("N = {n} is below the model dimension {dim}"));
        }
    }
    let eta = match k {
        None => {
            notes.push("lower curvature bound unknown".into());
            None
        }
        Some(k) if k >= 0.0 => Some(0.0),
        Some(k) => {
            let scale = (-k / n).sqrt();
            if prm.big_r >= 0.5 / scale {
                notes.push(format!("R = {} is not below (1/2)·sqrt(N/K⁻) = {}", prm.big_r, 0.5 / scale));
            }
            let z = 2.0 * prm.big_r * scale;
            Some(1.0 - z / z.sinh())
        }
    };
    let epsilon = eta.and_then(|eta| {
        let factor = 1.0 - (2.0 * density_ratio.powf(1.0 / n) + 1.0) * delta - 2.0 * eta;
        if factor > 0.0 {
            Some(1.0 / factor - 1.0)
        } else {
            notes.push(format!("almost-Euclidean factor {factor} is not positive"));
            None
        }
    });

    if support_mask(grid, prm.x, prm.r).iter().filter(|&&k| k).count() < 2 {
        return Err(Error::input(format!("ball of radius {} about {} holds too few grid nodes", prm.r, prm.x)));
    }

    let eucl = eucl_constant(n, prm.p)?;
    let scale = theta_big_r.powf(1.0 / n) / eucl;
    let grid_arc = Arc::new(grid.clone());
    let ratios = (0..prm.trials)
        .into_par_iter()
        .map(|i| {
            let u = SampledFunction::new(grid_arc.clone(), trial_values(grid, prm, i))?;
            local_sobolev_ratio(&u, prm.x, prm.r, n, prm.p).map(|q| q * scale)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (worst_trial, worst_ratio) = ratios
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, q)| if q > best.1 { (i, q) } else { best });
    let witness = SampledFunction::new(grid_arc, trial_values(grid, prm, worst_trial))?;
    let (violations, verdict) = match epsilon {
        Some(eps) if notes.is_empty() => {
            let v = ratios.iter().filter(|&&q| q > 1.0 + eps).count();
            (v, if v == 0 { LocalSobolevVerdict::Pass } else { LocalSobolevVerdict::Fail })
        }
        _ => (0, LocalSobolevVerdict::OutsideRegime),
    };
    Ok(LocalSobolevReport {
        params: prm.clone(),
        p_star: pair.p_star(),
        k,
        theta_r,
        theta_big_r,
        density_ratio,
        delta,
        eta,
        epsilon,
        eucl,
        regime_notes: notes,
        worst_ratio,
        worst_trial,
        witness,
        violations,
        verdict,
    })
}
