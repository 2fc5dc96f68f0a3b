use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use serde::{Deserialize, Serialize};
use soblab_core::concentration::{
    brezis_lieb_check, classify_sequence, concentration_density_bound, BrezisLiebReport, ConcentrationThresholds,
    DensityBoundReport, SequenceDiagnostics,
};
use soblab_core::constants::unit_sphere_volume;
use soblab_core::model_spaces::{SampledFunction, WeightedGrid};
use soblab_core::yamabe::{
    lambda_continuity_trend, minimize_yamabe, yamabe_upper_bound_check, ScalarField, YamabeBoundReport, YamabeOptions,
    YamabeReport,
};
use soblab_core::Extended;

use crate::error::{CliError, CliResult};
use crate::grid::{read_function, resolve, GridSpec, ModelKind};
use crate::output::{Cell, Outcome, Status, Table};
use crate::params;

fn read_manifest<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<(T, Option<PathBuf>)> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let m = serde_json::from_str(&text).map_err(|e| CliError::parse(format!("manifest {}", path.display()), e))?;
    Ok((m, path.parent().map(Path::to_path_buf)))
}

fn read_all(grid: &Arc<WeightedGrid>, base: Option<&Path>, files: &[PathBuf]) -> CliResult<Vec<SampledFunction>> {
    files.iter().map(|f| read_function(grid, &resolve(base, f))).collect()
}

/// Sequence manifest: the function files in order, plus optional grid,
/// exponent and Brezis–Lieb data.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceManifest {
    grid: Option<GridSpec>,
    q: Option<f64>,
    functions: Vec<PathBuf>,
    brezis_lieb: Option<BrezisLiebSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BrezisLiebSpec {
    /// The sequence `v_k` converging to the limit.
    v_functions: Vec<PathBuf>,
    q: f64,
    q_prime: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConcentrationArgs {
    /// JSON manifest listing function files in order.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Grid used when the manifest has none.
    #[command(flatten)]
    pub grid: GridSpec,
    /// Exponent; the manifest value, else 2N/(N−2).
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = ConcentrationThresholds::default().ball_fraction)]
    pub ball_fraction: f64,
    #[arg(long, default_value_t = ConcentrationThresholds::default().decay_factor)]
    pub decay_factor: f64,
    #[arg(long, default_value_t = ConcentrationThresholds::default().constant_energy)]
    pub constant_energy: f64,
    #[arg(long, default_value_t = ConcentrationThresholds::default().slope_margin)]
    pub slope_margin: f64,
    /// Density at the concentration point for the density bound check.
    #[arg(long, value_parser = params::extended, requires = "limsup_a")]
    pub theta: Option<Extended>,
    /// limsup of the Sobolev constants along the sequence.
    #[arg(long, requires = "theta")]
    pub limsup_a: Option<f64>,
    /// Exponent p of the density bound.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
}

#[derive(Serialize)]
struct ConcentrationOut {
    diagnostics: SequenceDiagnostics,
    brezis_lieb: Option<BrezisLiebReport>,
    density_bound: Option<DensityBoundReport>,
}

pub fn concentration_scan(a: &ConcentrationArgs) -> CliResult<Outcome> {
    let (m, base): (SequenceManifest, _) = read_manifest(&a.manifest)?;
    let base = base.as_deref();
    let spec = m.grid.as_ref().unwrap_or(&a.grid);
    let grid = Arc::new(spec.build_in(base)?);
    let q = match a.q.or(m.q) {
        Some(q) => q,
        None if spec.n > 2.0 => 2.0 * spec.n / (spec.n - 2.0),
        None => return Err(CliError::usage("no exponent: give --q or set N > 2")),
    };
    let seq = read_all(&grid, base, &m.functions)?;
    let th = ConcentrationThresholds {
        ball_fraction: a.ball_fraction,
        decay_factor: a.decay_factor,
        constant_energy: a.constant_energy,
        slope_margin: a.slope_margin,
        ..ConcentrationThresholds::default()
    };
    let diagnostics = classify_sequence(&grid, &seq, q, &th)?;
    let brezis_lieb = match &m.brezis_lieb {
        Some(bl) => {
            let v = read_all(&grid, base, &bl.v_functions)?;
            Some(brezis_lieb_check(&grid, &seq, &v, bl.q, bl.q_prime)?)
        }
        None => None,
    };
    let density_bound = match (a.theta, a.limsup_a) {
        (Some(t), Some(l)) => Some(concentration_density_bound(t, l, spec.n, a.p)?),
        _ => None,
    };
    let passed = brezis_lieb.as_ref().is_none_or(|b| b.monotone && b.decaying)
        && density_bound.as_ref().is_none_or(|d| d.passed);
    let d = &diagnostics;
    let mut table = Table::new(["k", "input_lq_norm", "l2_norm", "energy", "quotient", "mode", "ball_radius", "ball_fraction"]);
    for k in 0..d.l2_norms.len() {
        table.rows.push(vec![
            Cell::Int(k),
            Cell::Num(d.input_lq_norms[k]),
            Cell::Num(d.l2_norms[k]),
            Cell::Num(d.energy[k]),
            d.quotient_trace[k].map_or(Cell::Text(String::new()), Cell::Num),
            Cell::Num(d.modes[k]),
            Cell::Num(d.ball_radii[k]),
            Cell::Num(d.ball_fractions[k]),
        ]);
    }
    let out = ConcentrationOut { diagnostics, brezis_lieb, density_bound };
    Ok(Outcome::new(&out, Status::from_pass(passed))?.with_table(table))
}

#[derive(Debug, Args, Serialize)]
pub struct YamabeArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    /// Potential S as CSV `node,S` (or JSON) on the grid nodes.
    #[arg(long, conflicts_with = "s0")]
    pub scalar: Option<PathBuf>,
    /// Constant potential.
    #[arg(long)]
    pub s0: Option<f64>,
    /// Integrability exponent of S, above N/2; defaults to N.
    #[arg(long)]
    pub declared_p: Option<f64>,
    /// Minimal density θ_N for the upper bound check; 1/σ_N on the sphere
    /// model when absent.
    #[arg(long, value_parser = params::extended)]
    pub min_theta: Option<Extended>,
    /// Trend manifest: a list of grids with potentials.
    #[arg(long, conflicts_with_all = ["scalar", "s0"])]
    pub family: Option<PathBuf>,
    #[arg(long, default_value_t = YamabeOptions::default().n_restarts)]
    pub restarts: usize,
    #[arg(long, default_value_t = YamabeOptions::default().max_iter)]
    pub max_iter: usize,
    /// Bound on the projected gradient in the W^{1,2}-dual norm.
    #[arg(long, default_value_t = YamabeOptions::default().grad_tol)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl YamabeArgs {
    fn options(&self) -> YamabeOptions {
        YamabeOptions {
            n_restarts: self.restarts,
            max_iter: self.max_iter,
            grad_tol: self.grad_tol,
            seed: self.seed,
            ..YamabeOptions::default()
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyManifest {
    #[serde(rename = "N")]
    n: f64,
    declared_p: Option<f64>,
    members: Vec<FamilyMember>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyMember {
    grid: GridSpec,
    scalar: Option<PathBuf>,
    s0: Option<f64>,
}

fn potential(
    grid: &Arc<WeightedGrid>,
    file: Option<&Path>,
    s0: Option<f64>,
    declared_p: f64,
) -> CliResult<ScalarField> {
    match (file, s0) {
        (Some(_), Some(_)) => Err(CliError::usage("give either a potential file or a constant, not both")),
        (Some(path), None) => Ok(ScalarField::from_function(read_function(grid, path)?, declared_p)?),
        (None, s0) => Ok(ScalarField::constant(grid.clone(), s0.unwrap_or(0.0), declared_p)?),
    }
}

#[derive(Serialize)]
struct YamabeOut {
    #[serde(flatten)]
    report: YamabeReport,
    upper_bound: Option<YamabeBoundReport>,
}

pub fn yamabe(a: &YamabeArgs) -> CliResult<Outcome> {
    if let Some(path) = &a.family {
        return yamabe_family(a, path);
    }
    let grid = Arc::new(a.grid.build()?);
    let n = a.grid.n;
    let s = potential(&grid, a.scalar.as_deref(), a.s0, a.declared_p.unwrap_or(n))?;
    let report = minimize_yamabe(&grid, &s, n, &a.options())?;
    let min_theta = match (a.min_theta, a.grid.model) {
        (Some(t), _) => Some(t),
        (None, ModelKind::Sphere) => Some(Extended::Finite(1.0 / unit_sphere_volume(n + 1.0)?)),
        _ => None,
    };
    let upper_bound = min_theta.map(|t| yamabe_upper_bound_check(report.lambda_estimate, t, n)).transpose()?;
    let passed = upper_bound.as_ref().is_none_or(|b| b.passed);
    Outcome::new(&YamabeOut { report, upper_bound }, Status::from_pass(passed))
}

fn yamabe_family(a: &YamabeArgs, path: &Path) -> CliResult<Outcome> {
    let (m, base): (FamilyManifest, _) = read_manifest(path)?;
    let base = base.as_deref();
    let declared_p = a.declared_p.or(m.declared_p).unwrap_or(m.n);
    let mut grids = Vec::new();
    let mut fields = Vec::new();
    for member in &m.members {
        let g = Arc::new(member.grid.build_in(base)?);
        let file = member.scalar.as_ref().map(|f| resolve(base, f));
        fields.push(potential(&g, file.as_deref(), member.s0, declared_p)?);
        grids.push(g.as_ref().clone());
    }
    let rep = lambda_continuity_trend(&grids, &fields, m.n, &a.options())?;
    let mut table = Table::new(["k", "lambda", "jump"]);
    for (k, l) in rep.lambdas.iter().enumerate() {
        let jump = if k == 0 { Cell::Text(String::new()) } else { Cell::Num(rep.jumps[k - 1]) };
        table.rows.push(vec![Cell::Int(k), Cell::Num(*l), jump]);
    }
    Ok(Outcome::new(&rep, Status::from_pass(rep.passed))?.with_table(table))
}
