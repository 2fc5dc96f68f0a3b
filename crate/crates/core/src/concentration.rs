//! Diagnostics for extremizing sequences: which of the three behaviours
//! (non-constant limit, constant limit, concentration at a point) a sequence
//! shows, the Brezis–Lieb splitting of `∫|u|^q`, and the density bound at a
//! concentration point.

use serde::Serialize;

use crate::constants::{eucl_constant, ExponentPair, Extended};
use crate::error::{Error, Result};
use crate::fit::linear_slope;
use crate::model_spaces::{energy, lp_integral, SampledFunction, WeightedGrid};
use crate::sobolev_solver::{numerator, MIN_ENERGY};

/// Thresholds of the trend tests, all surfaced in reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConcentrationThresholds {
    /// Share of `∫|u|^q` a ball must hold to count as concentrated.
    pub ball_fraction: f64,
    /// Last/first ratio below which a trace counts as decayed.
    pub decay_factor: f64,
    /// Energy below which a limit counts as constant.
    pub constant_energy: f64,
    /// Required magnitude of the log-slope per term in the tail.
    pub slope_margin: f64,
    /// Distances below this count as zero.
    pub distance_floor: f64,
}

impl Default for ConcentrationThresholds {
    fn default() -> Self {
        ConcentrationThresholds {
            ball_fraction: 0.9,
            decay_factor: 0.1,
            constant_energy: 1e-8,
            slope_margin: 0.05,
            distance_floor: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    NonConstantLimit,
    ConstantLimit,
    Concentration { location: f64, mass_in_shrinking_balls: f64 },
    /// No rule applies; the traces are attached for inspection.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceDiagnostics {
    pub classification: Classification,
    pub q: f64,
    /// `‖u_k‖_{L^q}` before normalization.
    pub input_lq_norms: Vec<f64>,
    /// The remaining traces refer to the normalized terms.
    pub l2_norms: Vec<f64>,
    pub lq_norms: Vec<f64>,
    pub energy: Vec<f64>,
    /// `(‖u‖²_q − ‖u‖²_2)/‖u'‖²_2`, absent for constant terms.
    pub quotient_trace: Vec<Option<f64>>,
    /// `‖u_{k+1} − u_k‖_{L^2}`.
    pub step_distances: Vec<f64>,
    /// Peak of the smoothed `|u|^q` mass.
    pub modes: Vec<f64>,
    /// Smallest dyadic radius whose ball about the mode holds the required share.
    pub ball_radii: Vec<f64>,
    pub ball_fractions: Vec<f64>,
    pub thresholds: ConcentrationThresholds,
    pub warnings: Vec<String>,
}

/// `∫|u|^q` over each cell.
fn cell_masses(grid: &WeightedGrid, u: &[f64], q: f64) -> Vec<f64> {
    (0..grid.n_cells())
        .map(|c| {
            let (lam, w) = grid.cell_rule(c);
            lam.iter().zip(w).map(|(l, w)| w * (u[c] + (u[c + 1] - u[c]) * l).abs().powf(q)).sum()
        })
        .collect()
}

/// Node nearest to the heaviest window of three consecutive cells.
fn running_mode(grid: &WeightedGrid, cells: &[f64]) -> f64 {
    let k = cells.len();
    let window = |j: usize| cells[j.saturating_sub(1)..(j + 2).min(k)].iter().sum::<f64>();
    let best = (0..k).fold(0, |b, j| if window(j) > window(b) { j } else { b });
    let left = if best > 0 { cells[best - 1] } else { 0.0 };
    let right = if best + 1 < k { cells[best + 1] } else { 0.0 };
    grid.nodes()[if left >= right { best } else { best + 1 }]
}

/// Share of the cell masses inside `(x − ρ, x + ρ)`; cells cut by the ball
/// contribute in proportion to the covered length.
fn ball_share(grid: &WeightedGrid, cells: &[f64], x: f64, rho: f64) -> f64 {
    let nodes = grid.nodes();
    let total: f64 = cells.iter().sum();
    let inside: f64 = cells
        .iter()
        .enumerate()
        .map(|(c, m)| {
            let (a, b) = (nodes[c], nodes[c + 1]);
            let cover = ((x + rho).min(b) - (x - rho).max(a)).max(0.0);
            m * cover / (b - a)
        })
        .sum();
    inside / total
}

/// Smallest radius `diam·2^{-j}` capturing `fraction` of the mass, and the
/// share actually captured there.
fn concentration_radius(grid: &WeightedGrid, cells: &[f64], x: f64, fraction: f64) -> (f64, f64) {
    let mut rho = grid.diameter();
    let mut share = ball_share(grid, cells, x, rho);
    for _ in 0..60 {
        let next = 0.5 * rho;
        let s = ball_share(grid, cells, x, next);
        if s < fraction {
            break;
        }
        rho = next;
        share = s;
    }
    (rho, share)
}

fn l2_distance(grid: &WeightedGrid, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    lp_integral(grid, &d, 2.0).sqrt()
}

fn tail_log_slope(values: &[f64]) -> Option<f64> {
    let start = values.len() / 2;
    let (x, y): (Vec<f64>, Vec<f64>) =
        values[start..].iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(i, v)| (i as f64, v.ln())).unzip();
    linear_slope(&x, &y)
}

/// Sorts a sequence of functions into the three behaviours of extremizing
/// sequences, normalizing every term to unit `L^q` norm first.
pub fn classify_sequence(
    grid: &WeightedGrid,
    seq: &[SampledFunction],
    q: f64,
    th: &ConcentrationThresholds,
) -> Result<SequenceDiagnostics> {
    if seq.len() < 4 {
        return Err(Error::input(format!("sequence needs at least 4 terms, got {}", seq.len())));
    }
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::domain(format!("exponent must satisfy 2 < q < inf, got {q}")));
    }
    let mut warnings = Vec::new();
    let mut terms = Vec::with_capacity(seq.len());
    let mut input_lq_norms = Vec::with_capacity(seq.len());
    for (k, u) in seq.iter().enumerate() {
        if !grid.same_as(u.grid()) {
            return Err(Error::input(format!("term {k} lives on a different grid")));
        }
        let norm = lp_integral(grid, u.values(), q).powf(1.0 / q);
        if !(norm > 0.0) {
            return Err(Error::input(format!("term {k} vanishes and cannot be normalized")));
        }
        if (norm - 1.0).abs() > 1e-10 {
            warnings.push(format!("term {k} had L^q norm {norm} and was normalized"));
        }
        input_lq_norms.push(norm);
        terms.push(u.values().iter().map(|v| v / norm).collect::<Vec<f64>>());
    }

    let l2_norms: Vec<f64> = terms.iter().map(|u| lp_integral(grid, u, 2.0).sqrt()).collect();
    let lq_norms: Vec<f64> = terms.iter().map(|u| lp_integral(grid, u, q).powf(1.0 / q)).collect();
    let energies: Vec<f64> = terms.iter().map(|u| energy(grid, u, 2.0)).collect();
    let quotient_trace = terms
        .iter()
        .zip(&energies)
        .map(|(u, &e)| (e > MIN_ENERGY).then(|| numerator(grid, u, q) / e))
        .collect();
    let step_distances: Vec<f64> = terms.windows(2).map(|w| l2_distance(grid, &w[0], &w[1])).collect();
    let mut modes = Vec::new();
    let mut ball_radii = Vec::new();
    let mut ball_fractions = Vec::new();
    for u in &terms {
        let cells = cell_masses(grid, u, q);
        let x = running_mode(grid, &cells);
        let (rho, share) = concentration_radius(grid, &cells, x, th.ball_fraction);
        modes.push(x);
        ball_radii.push(rho);
        ball_fractions.push(share);
    }

    let last = terms.len() - 1;
    let decayed = |v: &[f64]| v[v.len() - 1] < th.decay_factor * v[0];
    let falling = |v: &[f64]| tail_log_slope(v).is_some_and(|s| s < -th.slope_margin);
    let l2_vanishes = decayed(&l2_norms) && falling(&l2_norms);
    let balls_shrink = ball_radii[last] <= 0.5 * ball_radii[0]
        && ball_radii[last / 2..].windows(2).all(|w| w[1] <= w[0])
        && ball_fractions[last] >= th.ball_fraction;
    let steps_vanish = step_distances[last / 2..].iter().all(|d| *d <= th.distance_floor)
        || (decayed(&step_distances) && falling(&step_distances));
    let energy_vanishes = energies[last] < th.constant_energy || (decayed(&energies) && falling(&energies));

    let classification = if l2_vanishes && balls_shrink {
        Classification::Concentration { location: modes[last], mass_in_shrinking_balls: ball_fractions[last] }
    } else if !decayed(&l2_norms) && steps_vanish && energy_vanishes {
        Classification::ConstantLimit
    } else if !decayed(&l2_norms) && steps_vanish && !decayed(&energies) && energies[last] > th.constant_energy {
        Classification::NonConstantLimit
    } else {
        Classification::Inconclusive
    };
    Ok(SequenceDiagnostics {
        classification,
        q,
        input_lq_norms,
        l2_norms,
        lq_norms,
        energy: energies,
        quotient_trace,
        step_distances,
        modes,
        ball_radii,
        ball_fractions,
        thresholds: *th,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BrezisLiebReport {
    pub q: f64,
    pub q_prime: f64,
    /// `|∫|u_k|^q − ∫|u_k − v_k|^q − ∫|u_∞|^q|` with `u_∞` the last `v`.
    pub defects: Vec<f64>,
    /// Largest defect over the second half of the sequence.
    pub max_tail_defect: f64,
    pub monotone: bool,
    pub decaying: bool,
}

/// Brezis–Lieb splitting along a sequence. The common limit is taken to be
/// the last term of `v_seq`; the hypotheses are checked as trends and any
/// that fail are listed in the error.
pub fn brezis_lieb_check(
    grid: &WeightedGrid,
    u_seq: &[SampledFunction],
    v_seq: &[SampledFunction],
    q: f64,
    q_prime: f64,
) -> Result<BrezisLiebReport> {
    if !(q >= 2.0 && q.is_finite() && q_prime > 1.0 && q_prime < q) {
        return Err(Error::domain(format!("need q >= 2 and 1 < q' < q, got q = {q}, q' = {q_prime}")));
    }
    if u_seq.len() != v_seq.len() || u_seq.len() < 4 {
        return Err(Error::input("u and v sequences need equal lengths of at least 4"));
    }
    if u_seq.iter().chain(v_seq).any(|f| !grid.same_as(f.grid())) {
        return Err(Error::input("all terms must live on the given grid"));
    }
    let limit = v_seq[v_seq.len() - 1].values();
    let dist = |f: &SampledFunction, r: f64| {
        let d: Vec<f64> = f.values().iter().zip(limit).map(|(a, b)| a - b).collect();
        lp_integral(grid, &d, r).powf(1.0 / r)
    };
    let floor = 1e-12 * (1.0 + lp_integral(grid, limit, q).powf(1.0 / q));
    let converges = |d: &[f64]| {
        let d = &d[..d.len() - 1];
        d.iter().all(|x| *x <= floor) || d[d.len() - 1] < 0.5 * d[0]
    };
    let mut problems = Vec::new();
    let v_q: Vec<f64> = v_seq.iter().map(|f| dist(f, q)).collect();
    let v_qp: Vec<f64> = v_seq.iter().map(|f| dist(f, q_prime)).collect();
    if !converges(&v_q) || !converges(&v_qp) {
        problems.push("v does not settle in L^q and L^{q'}");
    }
    let u_qp: Vec<f64> = u_seq.iter().map(|f| dist(f, q_prime)).collect();
    let u_qp_tail = &u_qp[u_qp.len() / 2..];
    if !(u_qp_tail.iter().all(|x| *x <= floor) || u_qp[u_qp.len() - 1] < 0.5 * u_qp[0]) {
        problems.push("u does not approach the limit in L^{q'}");
    }
    let u_norms: Vec<f64> = u_seq.iter().map(|f| lp_integral(grid, f.values(), q).powf(1.0 / q)).collect();
    let (lo, hi) = u_norms.iter().fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    if hi > 10.0 * lo.max(floor) && hi > 1.0 {
        problems.push("u is not bounded in L^q");
    }
    if !problems.is_empty() {
        return Err(Error::input(format!("Brezis–Lieb hypotheses fail: {}", problems.join("; "))));
    }
    let limit_mass = lp_integral(grid, limit, q);
    let defects: Vec<f64> = u_seq
        .iter()
        .zip(v_seq)
        .map(|(u, v)| {
            let diff: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| a - b).collect();
            (lp_integral(grid, u.values(), q) - lp_integral(grid, &diff, q) - limit_mass).abs()
        })
        .collect();
    let tail = &defects[defects.len() / 2..];
    let max_tail_defect = tail.iter().cloned().fold(0.0, f64::max);
    let monotone = defects.windows(2).all(|w| w[1] <= w[0]);
    let decaying = max_tail_defect <= floor || (tail[tail.len() - 1] < defects[0] && tail.windows(2).all(|w| w[1] <= w[0]));
    Ok(BrezisLiebReport { q, q_prime, defects, max_tail_defect, monotone, decaying })
}

/// Relative tolerance for the density bound at a concentration point.
pub const DENSITY_BOUND_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct DensityBoundReport {
    pub theta: Extended,
    pub limsup_a: f64,
    pub n: f64,
    pub p: f64,
    /// `Eucl(N,p)^N (limsup A)^{-N/p}`.
    pub bound: Extended,
    pub tolerance: f64,
    pub passed: bool,
}

/// `θ_N(y₀) ≤ Eucl(N,p)^N (limsup A_n)^{-N/p}`; an infinite density is only
/// compatible with `limsup A_n = 0`.
pub fn concentration_density_bound(theta: Extended, limsup_a: f64, n: f64, p: f64) -> Result<DensityBoundReport> {
    ExponentPair::new(p, n)?;
    if !(limsup_a >= 0.0 && limsup_a.is_finite()) {
        return Err(Error::domain(format!("limsup A must be finite and >= 0, got {limsup_a}")));
    }
    if let Extended::Finite(t) = theta {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("density must be positive, got {t}")));
        }
    }
    let bound = if limsup_a == 0.0 {
        Extended::Infinite
    } else {
        Extended::Finite(eucl_constant(n, p)?.powf(n) * limsup_a.powf(-n / p))
    };
    let passed = match (theta, bound) {
        (_, Extended::Infinite) => true,
        (Extended::Infinite, Extended::Finite(_)) => false,
        (Extended::Finite(t), Extended::Finite(b)) => t <= b * (1.0 + DENSITY_BOUND_TOL),
    };
    Ok(DensityBoundReport { theta, limsup_a, n, p, bound, tolerance: DENSITY_BOUND_TOL, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_share_counts_partial_cells() {
        let g = WeightedGrid::uniform(0.0, 1.0, 11).unwrap();
        let cells = vec![1.0; 10];
        assert!((ball_share(&g, &cells, 0.5, 0.25) - 0.5).abs() < 1e-12);
        assert!((ball_share(&g, &cells, 0.0, 0.05) - 0.05).abs() < 1e-12);
        assert_eq!(ball_share(&g, &cells, 0.5, 2.0), 1.0);
    }

    #[test]
    fn mode_follows_the_peak() {
        let g = WeightedGrid::uniform(0.0, 1.0, 11).unwrap();
        let mut cells = vec![0.0; 10];
        cells[6] = 3.0;
        cells[7] = 1.0;
        assert_eq!(running_mode(&g, &cells), g.nodes()[7]);
    }

    #[test]
    fn density_bound_edge_cases() {
        assert!(concentration_density_bound(Extended::Infinite, 0.0, 3.0, 2.0).unwrap().passed);
        assert!(!concentration_density_bound(Extended::Infinite, 0.1, 3.0, 2.0).unwrap().passed);
        assert!(concentration_density_bound(Extended::Finite(1.0), -1.0, 3.0, 2.0).is_err());
        assert!(concentration_density_bound(Extended::Finite(0.0), 1.0, 3.0, 2.0).is_err());
        assert!(concentration_density_bound(Extended::Finite(1.0), 1.0, 3.0, 3.5).is_err());
    }
}
