use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use serde::Serialize;
use soblab_core::model_spaces::{io, SampledFunction};
use soblab_core::rearrangement::{
    compare_norms, euclidean_rearrange, monotone_rearrange_sphere, polya_szego_report, NormComparison,
    PolyaSzegoReport, RearrangementTarget,
};
use soblab_core::sobolev_solver::{linearization_check, sobolev_quotient};

use crate::error::{CliError, CliResult};
use crate::grid::{read_function, GridSpec};
use crate::output::{Outcome, Status, Table};
use crate::params;

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Sphere,
    Euclid,
}

#[derive(Debug, Args, Serialize)]
pub struct RearrangeArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    /// Non-negative function on the grid (CSV `node,value` or JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Where the rearranged function is written; JSON if the name ends in `.json`.
    #[arg(long)]
    pub rearranged: PathBuf,
    #[arg(long, value_enum, default_value_t = TargetKind::Sphere)]
    pub target: TargetKind,
    /// Isoperimetric constant for the Euclidean target.
    #[arg(long)]
    pub c_isop: Option<f64>,
    /// Energy exponent of the Pólya–Szegő comparison.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Relative slack of the energy comparison.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Exponents of the norm comparison.
    #[arg(long, default_value = "1,2,3")]
    pub norms: String,
}

#[derive(Serialize)]
struct RearrangeReport {
    norms_in: Vec<f64>,
    norms_out: Vec<f64>,
    norm_comparison: Vec<NormComparison>,
    energy_in: f64,
    energy_out: f64,
    polya_szego: PolyaSzegoReport,
    rearranged_file: String,
}

pub fn rearrange(a: &RearrangeArgs) -> CliResult<Outcome> {
    let grid = Arc::new(a.grid.build()?);
    let u = read_function(&grid, &a.input)?;
    let n = a.grid.n;
    let out_nodes = grid.len();
    let (target, v) = match a.target {
        TargetKind::Sphere => (RearrangementTarget::Sphere { n }, monotone_rearrange_sphere(&u, n, out_nodes)?),
        TargetKind::Euclid => {
            let c_isop = a.c_isop.ok_or_else(|| CliError::usage("the Euclidean target needs --c-isop"))?;
            (RearrangementTarget::Euclid { n, c_isop }, euclidean_rearrange(&u, n, out_nodes)?)
        }
    };
    let ps = polya_szego_report(&u, a.p, target, a.tol)?;
    let cmp = compare_norms(&u, &v, &params::list(&a.norms)?)?;
    io::write_function(&v, &a.rearranged)?;
    let status = Status::from_pass(ps.passed);
    let report = RearrangeReport {
        norms_in: cmp.iter().map(|c| c.norm_in).collect(),
        norms_out: cmp.iter().map(|c| c.norm_out).collect(),
        norm_comparison: cmp,
        energy_in: ps.energy_in,
        energy_out: ps.energy_out,
        polya_szego: ps,
        rearranged_file: a.rearranged.display().to_string(),
    };
    Outcome::new(&report, status)
}

#[derive(Debug, Args, Serialize)]
pub struct QuotientArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub q: f64,
}

#[derive(Serialize)]
struct QuotientOut {
    q: f64,
    value: f64,
}

pub fn quotient(a: &QuotientArgs) -> CliResult<Outcome> {
    let grid = Arc::new(a.grid.build()?);
    let u = read_function(&grid, &a.input)?;
    Outcome::ok(&QuotientOut { q: a.q, value: sobolev_quotient(&u, a.q)? })
}

#[derive(Debug, Args, Serialize)]
pub struct LinearizeArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    #[arg(long)]
    pub q: f64,
    /// Zero-mean direction; `cos t` centred on the grid when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Step sizes ε.
    #[arg(long, default_value = "1e-1,1e-2,1e-3,1e-4")]
    pub eps: String,
}

pub fn linearize(a: &LinearizeArgs) -> CliResult<Outcome> {
    let grid = Arc::new(a.grid.build()?);
    let f = match &a.input {
        Some(p) => read_function(&grid, p)?,
        None => {
            let raw = SampledFunction::from_fn(grid.clone(), f64::cos)?;
            let mean = raw.integral() / grid.total_mass();
            SampledFunction::from_fn(grid.clone(), |t| t.cos() - mean)?
        }
    };
    let rep = linearization_check(&f, a.q, &params::list(&a.eps)?)?;
    let table = Table::from_columns(&[("eps", &rep.eps), ("lhs", &rep.lhs), ("defect", &rep.defect)]);
    Ok(Outcome::ok(&rep)?.with_table(table))
}
