//! The generalized Yamabe constant
//! `λ_S = inf (∫|u'|² dm + ∫S u² dm)/‖u‖²_{L^{2*}}` on weighted intervals.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{eucl_constant, Extended};
use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::model_spaces::{energy, lp_integral, SampledFunction, WeightedGrid};
use crate::seeding;
use crate::sobolev_solver::ascent::{self, AscentOutcome, AscentSettings, Objective};
use crate::sobolev_solver::{check_unit_mass, pencil, StepRule, StopReason};

/// Relative slack of [`yamabe_upper_bound_check`].
pub const UPPER_BOUND_TOL: f64 = 1e-9;
/// Factor of `‖S‖_{L^p}` below which a descent trace looks unbounded.
pub const UNBOUNDED_FACTOR: f64 = 10.0;

/// A potential `S` sampled at the nodes of a grid, tagged with the exponent
/// `p > N/2` of its assumed integrability.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<WeightedGrid>,
    values: Vec<f64>,
    declared_p: f64,
}

impl Serialize for ScalarField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ScalarField", 3)?;
        st.serialize_field("nodes", self.grid.nodes())?;
        st.serialize_field("values", &self.values)?;
        st.serialize_field("declared_p", &self.declared_p)?;
        st.end()
    }
}

impl ScalarField {
    /// Checks the length, finiteness and `declared_p > N/2` when the grid
    /// knows its dimension.
    pub fn new(grid: Arc<WeightedGrid>, values: Vec<f64>, declared_p: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::input(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("scalar field has non-finite values"));
        }
        if !(declared_p >= 1.0 && declared_p.is_finite()) {
            return Err(Error::domain(format!("integrability exponent must be finite and >= 1, got {declared_p}")));
        }
        if let Some(n) = grid.dimension() {
            check_exponent(declared_p, n)?;
        }
        Ok(ScalarField { grid, values, declared_p })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<WeightedGrid>, f: F, declared_p: f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        ScalarField::new(grid, values, declared_p)
    }

    pub fn constant(grid: Arc<WeightedGrid>, s0: f64, declared_p: f64) -> Result<Self> {
        ScalarField::from_fn(grid, |_| s0, declared_p)
    }

    /// Reuses the grid and node values of a sampled function.
    pub fn from_function(f: SampledFunction, declared_p: f64) -> Result<Self> {
        let grid = f.grid_arc().clone();
        ScalarField::new(grid, f.into_values(), declared_p)
    }

    pub fn grid(&self) -> &WeightedGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn declared_p(&self) -> f64 {
        self.declared_p
    }

    /// `‖S‖_{L^p}` at the declared exponent.
    pub fn lp_norm(&self) -> f64 {
        lp_integral(&self.grid, &self.values, self.declared_p).powf(1.0 / self.declared_p)
    }

    /// `‖S⁻‖_{L^p}` of the negative part at the declared exponent.
    pub fn negative_part_norm(&self) -> f64 {
        let neg: Vec<f64> = self.values.iter().map(|v| (-v).max(0.0)).collect();
        lp_integral(&self.grid, &neg, self.declared_p).powf(1.0 / self.declared_p)
    }

    /// The field shifted by a constant.
    pub fn shifted(&self, c: f64) -> Self {
        ScalarField { values: self.values.iter().map(|v| v + c).collect(), ..self.clone() }
    }

    fn potential_matrix(&self) -> Tridiagonal {
        let (d, o) = self.grid.mass_matrix(Some(&self.values));
        Tridiagonal::new(d, o)
    }
}

fn check_exponent(p: f64, n: f64) -> Result<()> {
    if p <= 0.5 * n {
        return Err(Error::domain(format!("scalar field exponent {p} must exceed N/2 = {}", 0.5 * n)));
    }
    Ok(())
}

/// `2* = 2N/(N−2)`, finite only for `N > 2`.
fn critical_exponent(n: f64) -> Result<f64> {
    if !(n > 2.0 && n.is_finite()) {
        return Err(Error::domain(format!("the Yamabe quotient needs 2 < N < inf, got {n}")));
    }
    Ok(2.0 * n / (n - 2.0))
}

fn check_pairing(u: &SampledFunction, s: &ScalarField, n: f64) -> Result<f64> {
    let q = critical_exponent(n)?;
    check_exponent(s.declared_p, n)?;
    if !s.grid.same_as(u.grid()) {
        return Err(Error::input("function and scalar field live on different grids"));
    }
    Ok(q)
}

/// `Q_S(u) = (∫|u'|² dm + ∫S u² dm)/‖u‖²_{L^{2*}}` on a probability grid.
pub fn yamabe_quotient(u: &SampledFunction, s: &ScalarField, n: f64) -> Result<f64> {
    let q = check_pairing(u, s, n)?;
    check_unit_mass(u.grid())?;
    let nrm2 = lp_integral(u.grid(), u.values(), q).powf(2.0 / q);
    if !(nrm2 > 0.0) {
        return Err(Error::degenerate("the Yamabe quotient of the zero function is undefined"));
    }
    let v = u.values();
    Ok((energy(u.grid(), v, 2.0) + s.potential_matrix().quad_form(v)) / nrm2)
}

/// `∫ |u|^{2*−2} u φ_i dm` for every hat function.
fn critical_load(grid: &WeightedGrid, u: &[f64], q: f64) -> Vec<f64> {
    grid.load_vector(u, |v| v.abs().powf(q - 2.0) * v)
}

/// Largest `|∫u'v' + ∫S u v − λ∫|u|^{2*−2}u v| / ‖v‖_{W^{1,2}}` over the hat
/// functions `v`.
///
/// The input is used as given: a function off the unit `L^{2*}` sphere is
/// not rescaled, so perturbations show up in the residual.
pub fn euler_lagrange_residual(u: &SampledFunction, lambda: f64, s: &ScalarField, n: f64) -> Result<f64> {
    let q = check_pairing(u, s, n)?;
    let grid = u.grid();
    let v = u.values();
    let ku = grid.stiffness_apply(v);
    let su = s.potential_matrix().mul(v);
    let b = critical_load(grid, v, q);
    let (stiff, mass) = pencil(grid);
    Ok((0..v.len())
        .map(|i| (ku[i] + su[i] - lambda * b[i]).abs() / (stiff.diag[i] + mass.diag[i]).sqrt())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct YamabeOptions {
    pub n_restarts: usize,
    pub max_iter: usize,
    /// Bound on the projected gradient, in the `W^{1,2}` dual norm.
    pub grad_tol: f64,
    pub step_rule: StepRule,
    pub seed: u64,
    pub stall_window: usize,
    pub stall_rel: f64,
}

impl Default for YamabeOptions {
    fn default() -> Self {
        YamabeOptions {
            n_restarts: 6,
            max_iter: 5000,
            grad_tol: 1e-7,
            step_rule: StepRule::default(),
            seed: 0,
            stall_window: 200,
            stall_rel: 1e-12,
        }
    }
}

/// Initial function of a restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum YamabeStart {
    Constant,
    /// Narrow bumps at either end of the interval.
    LeftEnd,
    RightEnd,
    /// A bump where `S` is smallest.
    PotentialWell,
    /// A bump of random center and width over a small floor.
    Random,
}

fn start_kind(index: usize) -> YamabeStart {
    match index {
        0 => YamabeStart::Constant,
        1 => YamabeStart::PotentialWell,
        2 => YamabeStart::LeftEnd,
        3 => YamabeStart::RightEnd,
        _ => YamabeStart::Random,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct YamabeRestart {
    pub index: usize,
    pub start: YamabeStart,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm_final: f64,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, Serialize)]
pub struct YamabeReport {
    /// `Q_S` at the minimizer, an upper bound for `λ_S`.
    pub lambda_estimate: f64,
    /// Non-negative, unit `L^{2*}` norm.
    pub minimizer: SampledFunction,
    pub el_residual: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub grad_norm_final: f64,
    pub stop_reason: StopReason,
    pub converged: bool,
    pub n: f64,
    pub critical_exponent: f64,
    pub declared_p: f64,
    pub s_lp_norm: f64,
    /// Set when the trace fell below `−10‖S‖_{L^p}`.
    pub unbounded_looking: bool,
    pub options: YamabeOptions,
    pub restarts: Vec<YamabeRestart>,
}

struct YamabeObjective<'a> {
    grid: &'a WeightedGrid,
    potential: Tridiagonal,
    q: f64,
}

impl YamabeObjective<'_> {
    fn numerator(&self, x: &[f64]) -> f64 {
        energy(self.grid, x, 2.0) + self.potential.quad_form(x)
    }
}

impl Objective for YamabeObjective<'_> {
    /// Clips negative values and rescales to unit `L^{2*}` norm.
    fn evaluate(&self, x: &mut [f64]) -> Option<f64> {
        x.iter_mut().for_each(|v| *v = v.max(0.0));
        let nrm = lp_integral(self.grid, x, self.q).powf(1.0 / self.q);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return None;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
        Some(self.numerator(x))
    }

    /// Gradient of `Q_S`, with components that would push a zero node
    /// negative removed.
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let d = lp_integral(self.grid, x, self.q);
        let nrm2 = d.powf(2.0 / self.q);
        let value = self.numerator(x) / nrm2;
        let ku = self.grid.stiffness_apply(x);
        let su = self.potential.mul(x);
        let b = critical_load(self.grid, x, self.q);
        let scale = value * d.powf(2.0 / self.q - 1.0);
        (0..x.len())
            .map(|i| {
                let g = 2.0 * (ku[i] + su[i] - scale * b[i]) / nrm2;
                if x[i] <= 0.0 && g > 0.0 {
                    0.0
                } else {
                    g
                }
            })
            .collect()
    }
}

fn bump(grid: &WeightedGrid, centre: f64, width: f64) -> Vec<f64> {
    grid.nodes().iter().map(|&t| 0.02 + (-((t - centre) / width).powi(2)).exp()).collect()
}

fn initial_function(grid: &WeightedGrid, s: &ScalarField, kind: YamabeStart, rng: &mut impl Rng) -> Vec<f64> {
    let (a, len) = (grid.left(), grid.diameter());
    match kind {
        YamabeStart::Constant => vec![1.0; grid.len()],
        YamabeStart::LeftEnd => bump(grid, a, 0.05 * len),
        YamabeStart::RightEnd => bump(grid, grid.right(), 0.05 * len),
        YamabeStart::PotentialWell => {
            let i = s.values.iter().enumerate().fold(0, |b, (i, v)| if *v < s.values[b] { i } else { b });
            bump(grid, grid.nodes()[i], 0.1 * len)
        }
        YamabeStart::Random => {
            let centre = a + len * rng.random_range(0.0..1.0);
            bump(grid, centre, len * rng.random_range(0.03..0.3))
        }
    }
}

/// Values this close to the minimum count as ties.
const TIE_REL: f64 = 1e-12;

/// Lowest value, preferring a converged run among ties, then the lowest
/// index.
fn pick_winner(runs: &[(YamabeStart, AscentOutcome)]) -> usize {
    let low = runs.iter().map(|(_, o)| o.value).fold(f64::INFINITY, f64::min);
    let tied = |o: &AscentOutcome| o.value <= low + TIE_REL * low.abs().max(1.0);
    runs.iter()
        .position(|(_, o)| tied(o) && o.stop.is_converged())
        .or_else(|| runs.iter().position(|(_, o)| o.value == low))
        .unwrap_or(0)
}

/// Minimizes `Q_S` over non-negative functions on a probability grid.
///
/// Every restart runs preconditioned projected descent on the unit `L^{2*}`
/// sphere, clipping negative values before each rescaling, and stops once
/// the projected gradient is below `opts.grad_tol`. Restarts are seeded from
/// `(opts.seed, index)`. The lowest value wins; among values equal up to
/// roundoff a converged run is preferred.
pub fn minimize_yamabe(grid: &WeightedGrid, s: &ScalarField, n: f64, opts: &YamabeOptions) -> Result<YamabeReport> {
    let q = critical_exponent(n)?;
    check_exponent(s.declared_p, n)?;
    check_unit_mass(grid)?;
    if !grid.same_as(&s.grid) {
        return Err(Error::input("scalar field lives on a different grid"));
    }
    if opts.n_restarts == 0 {
        return Err(Error::input("at least one restart is required"));
    }
    let (stiffness, mass) = pencil(grid);
    let precond = stiffness.add_scaled(&mass, 1.0);
    let objective = YamabeObjective { grid, potential: s.potential_matrix(), q };
    let settings = AscentSettings {
        max_iter: opts.max_iter,
        grad_tol: opts.grad_tol,
        step_rule: opts.step_rule,
        stall_window: opts.stall_window.max(1),
        stall_rel: opts.stall_rel,
        maximize: false,
    };

    let runs: Vec<(YamabeStart, AscentOutcome)> = (0..opts.n_restarts)
        .into_par_iter()
        .map(|i| {
            let kind = start_kind(i);
            let mut rng = seeding::stream(opts.seed, i as u64);
            let x = initial_function(grid, s, kind, &mut rng);
            (kind, ascent::run(&objective, &precond, x, &settings))
        })
        .collect();

    let restarts = runs
        .iter()
        .enumerate()
        .map(|(index, (start, o))| YamabeRestart {
            index,
            start: *start,
            value: o.value,
            iterations: o.iterations,
            grad_norm_final: o.grad_norm,
            stop_reason: o.stop,
        })
        .collect();
    let win = &runs[pick_winner(&runs)].1;
    let minimizer = SampledFunction::new(Arc::new(grid.clone()), win.x.clone())?;
    let el_residual = euler_lagrange_residual(&minimizer, win.value, s, n)?;
    let s_lp_norm = s.lp_norm();
    let floor = -UNBOUNDED_FACTOR * s_lp_norm;
    Ok(YamabeReport {
        lambda_estimate: win.value,
        minimizer,
        el_residual,
        iterations: win.iterations,
        trace: win.trace.clone(),
        grad_norm_final: win.grad_norm,
        stop_reason: win.stop,
        converged: win.stop.is_converged(),
        n,
        critical_exponent: q,
        declared_p: s.declared_p,
        s_lp_norm,
        unbounded_looking: win.trace.iter().any(|v| *v < floor),
        options: opts.clone(),
        restarts,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct YamabeBoundReport {
    pub lambda_estimate: f64,
    pub min_theta: Extended,
    pub n: f64,
    /// `min θ^{2/N}/Eucl(N,2)²`.
    pub bound: Extended,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks `λ ≤ min θ^{2/N}/Eucl(N,2)²` up to [`UPPER_BOUND_TOL`] relative.
pub fn yamabe_upper_bound_check(lambda_estimate: f64, min_theta: Extended, n: f64) -> Result<YamabeBoundReport> {
    critical_exponent(n)?;
    let e = eucl_constant(n, 2.0)?;
    let bound = match min_theta {
        Extended::Finite(t) if t > 0.0 && t.is_finite() => Extended::Finite(t.powf(2.0 / n) / (e * e)),
        Extended::Finite(t) => return Err(Error::domain(format!("density must be positive, got {t}"))),
        Extended::Infinite => Extended::Infinite,
    };
    let passed = match bound {
        Extended::Finite(b) => lambda_estimate <= b + UPPER_BOUND_TOL * b.abs().max(1.0),
        Extended::Infinite => true,
    };
    Ok(YamabeBoundReport { lambda_estimate, min_theta, n, bound, tolerance: UPPER_BOUND_TOL, passed })
}

/// Largest successive jump of `λ_S` allowed at the end of a convergent family.
pub const TREND_JUMP_TOL: f64 = 1e-2;

/// Jumps below this multiple of `max |λ|` are roundoff and never count as growth.
pub const TREND_NOISE_REL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct LambdaTrendReport {
    pub n: f64,
    pub lambdas: Vec<f64>,
    /// `|λ_{k+1} − λ_k|`.
    pub jumps: Vec<f64>,
    pub max_jump: f64,
    pub last_jump: f64,
    pub converged: Vec<bool>,
    pub jump_tol: f64,
    /// The last jump is below the tolerance and no larger than the first,
    /// unless it is at roundoff level.
    pub passed: bool,
}

/// `λ_S` along a family of grids and potentials, one minimization per
/// member, run in parallel.
pub fn lambda_continuity_trend(
    grids: &[WeightedGrid],
    fields: &[ScalarField],
    n: f64,
    opts: &YamabeOptions,
) -> Result<LambdaTrendReport> {
    if grids.len() != fields.len() {
        return Err(Error::input(format!("{} grids but {} scalar fields", grids.len(), fields.len())));
    }
    if grids.len() < 2 {
        return Err(Error::input("a trend needs at least two family members"));
    }
    let reports = grids
        .par_iter()
        .zip(fields)
        .map(|(g, s)| minimize_yamabe(g, s, n, opts))
        .collect::<Result<Vec<_>>>()?;
    let lambdas: Vec<f64> = reports.iter().map(|r| r.lambda_estimate).collect();
    let jumps: Vec<f64> = lambdas.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let max_jump = jumps.iter().cloned().fold(0.0, f64::max);
    let last_jump = *jumps.last().expect("at least one jump");
    let noise = TREND_NOISE_REL * lambdas.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    Ok(LambdaTrendReport {
        n,
        converged: reports.iter().map(|r| r.converged).collect(),
        passed: last_jump < TREND_JUMP_TOL && (last_jump <= jumps[0] || last_jump <= noise),
        lambdas,
        jumps,
        max_jump,
        last_jump,
        jump_tol: TREND_JUMP_TOL,
    })
}
