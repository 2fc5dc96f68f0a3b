//! Distribution functions, their generalized inverses and the monotone
//! rearrangements onto the sphere model and the Euclidean cone.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::constants::{comparison_volume, unit_ball_volume, unit_sphere_volume};
use crate::error::{Error, Result};
use crate::model_spaces::{
    dirichlet_energy, lp_norm, sphere_normalizer, SampledFunction, WeightedGrid,
};

/// Distribution function `μ(t) = m({u > t})` tabulated on decreasing levels.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionProfile {
    /// Strictly decreasing thresholds from `max u` down to 0.
    pub levels: Vec<f64>,
    /// `m({u > t})` at each level.
    pub mu: Vec<f64>,
    /// `m({u >= t})` at each level; differs from `mu` only on plateaus.
    pub mu_closed: Vec<f64>,
    pub total_mass: f64,
}

fn check_non_negative(u: &SampledFunction) -> Result<()> {
    if let Some(v) = u.values().iter().find(|v| **v < 0.0) {
        return Err(Error::input(format!("rearrangement needs u >= 0, found value {v}")));
    }
    Ok(())
}

/// Tabulates `μ` on `n_levels` uniform thresholds in `[0, max u]` merged with
/// every distinct node value. Superlevel sets are measured exactly for the
/// piecewise linear interpolant.
pub fn distribution_function(u: &SampledFunction, n_levels: usize) -> Result<DistributionProfile> {
    check_non_negative(u)?;
    if n_levels < 2 {
        return Err(Error::input(format!("need at least 2 levels, got {n_levels}")));
    }
    let grid = u.grid();
    let vals = u.values();
    let top = u.max();

    let mut levels: Vec<f64> = (0..n_levels).map(|k| top * k as f64 / (n_levels - 1) as f64).collect();
    levels.extend_from_slice(vals);
    levels.push(0.0);
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();

    let nc = grid.n_cells();
    let lo: Vec<f64> = (0..nc).map(|c| vals[c].min(vals[c + 1])).collect();
    let hi: Vec<f64> = (0..nc).map(|c| vals[c].max(vals[c + 1])).collect();
    let mut by_hi: Vec<usize> = (0..nc).collect();
    by_hi.sort_by(|&a, &b| hi[b].partial_cmp(&hi[a]).unwrap());
    let mut by_lo: Vec<usize> = (0..nc).collect();
    by_lo.sort_by(|&a, &b| lo[b].partial_cmp(&lo[a]).unwrap());

    let mut plateaus: HashMap<u64, f64> = HashMap::new();
    for c in 0..nc {
        if vals[c] == vals[c + 1] {
            *plateaus.entry(vals[c].to_bits()).or_insert(0.0) += grid.cell_mass()[c];
        }
    }

    // 0 = inactive, 1 = crossing the current level, 2 = entirely above it
    let mut state = vec![0u8; nc];
    let mut active: Vec<usize> = Vec::new();
    let (mut ph, mut pl) = (0, 0);
    let mut full = 0.0;
    let x = grid.nodes();
    let mut mu = Vec::with_capacity(levels.len());
    let mut mu_closed = Vec::with_capacity(levels.len());
    for &t in &levels {
        while ph < nc && hi[by_hi[ph]] > t {
            state[by_hi[ph]] = 1;
            active.push(by_hi[ph]);
            ph += 1;
        }
        while pl < nc && lo[by_lo[pl]] > t {
            state[by_lo[pl]] = 2;
            full += grid.cell_mass()[by_lo[pl]];
            pl += 1;
        }
        active.retain(|&c| state[c] == 1);
        let mut partial = 0.0;
        for &c in &active {
            let (u0, u1) = (vals[c], vals[c + 1]);
            let s = x[c] + (t - u0) / (u1 - u0) * (x[c + 1] - x[c]);
            partial += if u0 > u1 {
                grid.cell_mass_between(c, x[c], s)
            } else {
                grid.cell_mass_between(c, s, x[c + 1])
            };
        }
        let m = (full + partial).min(grid.total_mass());
        mu.push(m);
        let plateau = plateaus.get(&t.to_bits()).copied().unwrap_or(0.0);
        mu_closed.push((m + plateau).min(grid.total_mass()));
    }
    // enforce monotonicity against rounding in the partial sums
    for k in 1..mu.len() {
        mu[k] = mu[k].max(mu[k - 1]);
        mu_closed[k] = mu_closed[k].max(mu_closed[k - 1]).max(mu[k]);
    }
    Ok(DistributionProfile { levels, mu, mu_closed, total_mass: grid.total_mass() })
}

/// The decreasing rearrangement `u^#(s) = inf{t : μ(t) < s}` on `[0, m]`.
#[derive(Debug, Clone)]
pub struct GeneralizedInverse {
    profile: DistributionProfile,
}

/// Builds `u^#` from a tabulated profile. Between levels `μ` is interpolated
/// linearly; plateaus of `u` give exact flat pieces.
pub fn generalized_inverse(profile: DistributionProfile) -> GeneralizedInverse {
    GeneralizedInverse { profile }
}

impl GeneralizedInverse {
    pub fn profile(&self) -> &DistributionProfile {
        &self.profile
    }

    /// `u^#(s)`; `s <= 0` returns `ess sup u` and `s` beyond every
    /// superlevel mass returns 0.
    pub fn eval(&self, s: f64) -> f64 {
        let p = &self.profile;
        let t = &p.levels;
        if s <= 0.0 {
            return t[0];
        }
        // masses are sums of cell masses; forgive rounding at the ends
        let slack = 1e-14 * p.total_mass;
        let s = if s > p.total_mass - slack && s <= p.total_mass + slack { p.total_mass - slack } else { s };
        // first level whose open superlevel mass reaches s
        let k = p.mu.partition_point(|&m| m < s);
        if k == 0 {
            // μ(max u) = 0 < s always, kept for safety
            return t[0];
        }
        if k == t.len() {
            return 0.0;
        }
        let (t_hi, t_lo) = (t[k - 1], t[k]);
        let m_hi = p.mu_closed[k - 1];
        if s <= m_hi + slack {
            return t_hi;
        }
        let m_lo = p.mu[k];
        let frac = if m_lo > m_hi { (s - m_hi) / (m_lo - m_hi) } else { 1.0 };
        t_hi - frac.clamp(0.0, 1.0) * (t_hi - t_lo)
    }
}

fn default_levels(u: &SampledFunction, n_out: usize) -> usize {
    4 * u.grid().len().max(n_out).max(256)
}

/// Mass of `[0, r]` in the normalized model of dimension `N`.
fn sphere_mass_up_to(n: f64, r: f64, c_n: f64) -> Result<f64> {
    Ok(comparison_volume(n - 1.0, n, r)? / (unit_sphere_volume(n)? * c_n))
}

/// Monotone rearrangement onto `[0, r] ⊂ I_N` with `m_N([0, r]) = m(Ω)`:
/// `u*(x) = u^#(m_N([0, x]))`.
pub fn monotone_rearrange_sphere(u: &SampledFunction, n: f64, n_out: usize) -> Result<SampledFunction> {
    check_non_negative(u)?;
    let mass = u.grid().total_mass();
    if mass > 1.0 + 1e-10 {
        return Err(Error::input(format!(
            "domain mass {mass} exceeds the unit mass of the sphere model"
        )));
    }
    let radius = if mass >= 1.0 - 1e-10 {
        PI
    } else {
        let c_n = sphere_normalizer(n)?;
        let (mut a, mut b) = (0.0, PI);
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if sphere_mass_up_to(n, mid, c_n)? < mass {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-15 * b {
                break;
            }
        }
        0.5 * (a + b)
    };
    let target = if radius == PI {
        WeightedGrid::sphere_model(n, n_out)?
    } else {
        WeightedGrid::sphere_sub_model(n, radius, n_out)?
    };
    let inverse = generalized_inverse(distribution_function(u, default_levels(u, n_out))?);
    let scale = mass / target.total_mass();
    let values = target.cumulative_mass().iter().map(|&m| inverse.eval(m * scale)).collect();
    SampledFunction::new(Arc::new(target), values)
}

/// Euclidean rearrangement onto `[0, r]` of the cone model with
/// `ω_N r^N = m(Ω)`: `u*(x) = u^#(ω_N x^N)`.
pub fn euclidean_rearrange(u: &SampledFunction, n: f64, n_out: usize) -> Result<SampledFunction> {
    check_non_negative(u)?;
    let mass = u.grid().total_mass();
    let omega = unit_ball_volume(n)?;
    let radius = (mass / omega).powf(1.0 / n);
    let target = WeightedGrid::cone_model(n, radius, n_out)?;
    let inverse = generalized_inverse(distribution_function(u, default_levels(u, n_out))?);
    let values = target.nodes().iter().map(|&x| inverse.eval(omega * x.powf(n))).collect();
    SampledFunction::new(Arc::new(target), values)
}

/// Target of a Pólya–Szegő comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum RearrangementTarget {
    Sphere { n: f64 },
    /// Euclidean cone; `c_isop` is an isoperimetric constant valid for the
    /// superlevel sets of the input.
    Euclid { n: f64, c_isop: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyaSzegoReport {
    pub p: f64,
    pub target: RearrangementTarget,
    pub energy_in: f64,
    pub energy_out: f64,
    /// Energy of the rearrangement (scaled by `(C/(Nω_N^{1/N}))^p` for the
    /// Euclidean target) divided by the input energy.
    pub ratio: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub degenerate: bool,
}

/// Default relative tolerance of the Pólya–Szegő comparison.
pub const POLYA_SZEGO_TOL: f64 = 5e-3;

/// Compares `∫|u'|^p` with the energy of its rearrangement (on the same
/// number of nodes as the input grid).
pub fn polya_szego_report(
    u: &SampledFunction,
    p: f64,
    target: RearrangementTarget,
    tol: Option<f64>,
) -> Result<PolyaSzegoReport> {
    let tolerance = tol.unwrap_or(POLYA_SZEGO_TOL);
    let energy_in = dirichlet_energy(u, p)?;
    check_non_negative(u)?;
    let n_out = u.grid().len();
    let (rearranged, factor) = match target {
        RearrangementTarget::Sphere { n } => (monotone_rearrange_sphere(u, n, n_out)?, 1.0),
        RearrangementTarget::Euclid { n, c_isop } => {
            if !(c_isop > 0.0) {
                return Err(Error::input(format!("isoperimetric constant must be positive, got {c_isop}")));
            }
            let iso_eucl = n * unit_ball_volume(n)?.powf(1.0 / n);
            (euclidean_rearrange(u, n, n_out)?, (c_isop / iso_eucl).powf(p))
        }
    };
    let energy_out = dirichlet_energy(&rearranged, p)?;
    let degenerate = u.max() == u.min();
    if degenerate {
        return Ok(PolyaSzegoReport {
            p,
            target,
            energy_in: 0.0,
            energy_out: 0.0,
            ratio: 1.0,
            tolerance,
            passed: true,
            degenerate,
        });
    }
    let scaled = factor * energy_out;
    let ratio = scaled / energy_in;
    Ok(PolyaSzegoReport {
        p,
        target,
        energy_in,
        energy_out,
        ratio,
        tolerance,
        passed: scaled <= energy_in * (1.0 + tolerance),
        degenerate,
    })
}

/// Lp norms of a function and of a rearrangement, side by side.
#[derive(Debug, Clone, Serialize)]
pub struct NormComparison {
    pub p: f64,
    pub norm_in: f64,
    pub norm_out: f64,
    pub relative_difference: f64,
}

pub fn compare_norms(u: &SampledFunction, v: &SampledFunction, ps: &[f64]) -> Result<Vec<NormComparison>> {
    ps.iter()
        .map(|&p| {
            let a = lp_norm(u, p)?;
            let b = lp_norm(v, p)?;
            let rel = if a > 0.0 { (b - a).abs() / a } else { b.abs() };
            Ok(NormComparison { p, norm_in: a, norm_out: b, relative_difference: rel })
        })
        .collect()
}
