use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use soblab_core::model_spaces::io;
use soblab_core::sobolev_solver::{optimize_aopt, spectral_gap as gap, tight_sobolev_check, AoptOptions};

use crate::error::{CliError, CliResult};
use crate::grid::GridSpec;
use crate::output::{Cell, Outcome, Status, Table};
use crate::params::Range;

#[derive(Debug, Args, Serialize)]
pub struct SpectralGapArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    /// Accept grids whose mass is not one.
    #[arg(long)]
    pub auto_normalize: bool,
    /// Also write the eigenfunction to this file.
    #[arg(long)]
    pub eigenfunction: Option<PathBuf>,
}

pub fn spectral_gap(a: &SpectralGapArgs) -> CliResult<Outcome> {
    let grid = a.grid.build()?;
    let r = gap(&grid, a.auto_normalize)?;
    if let Some(p) = &a.eigenfunction {
        io::write_function(&r.eigenfunction, p)?;
    }
    Outcome::ok(&r)
}

/// Optimizer flags shared by `aopt` and sweeps.
#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// Gradient tolerance in the H¹-dual norm.
    #[arg(long, default_value_t = 1e-7)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Minimal relative gain per 100 iterations.
    #[arg(long, default_value_t = 1e-6)]
    pub stall_rel: f64,
}

impl OptimizerArgs {
    pub fn options(&self) -> AoptOptions {
        AoptOptions {
            n_restarts: self.restarts,
            max_iter: self.max_iter,
            grad_tol: self.grad_tol,
            seed: self.seed,
            stall_rel: self.stall_rel,
            ..AoptOptions::default()
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AoptArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    #[arg(long, required_unless_present = "sweep")]
    pub q: Option<f64>,
    /// Range of q as `q=start:stop:step`; emits CSV `q,value,iters`.
    #[arg(long, conflicts_with = "q")]
    pub sweep: Option<String>,
    #[command(flatten)]
    pub opt: OptimizerArgs,
}

#[derive(Serialize)]
struct AoptOut {
    q: f64,
    /// `(q − 2)/N`, the sharp value on the sphere model.
    model_reference: Option<f64>,
    options: AoptOptions,
    #[serde(flatten)]
    result: soblab_core::sobolev_solver::QuotientReport,
}

pub fn aopt(a: &AoptArgs) -> CliResult<Outcome> {
    let grid = a.grid.build()?;
    let opts = a.opt.options();
    let reference = |q: f64| (a.grid.model == crate::grid::ModelKind::Sphere).then(|| (q - 2.0) / a.grid.n);
    if let Some(spec) = &a.sweep {
        let range = spec
            .strip_prefix("q=")
            .ok_or_else(|| CliError::usage(format!("--sweep expects q=start:stop:step, got {spec:?}")))?;
        let qs = Range::parse(range)?.values()?;
        let runs = qs
            .par_iter()
            .map(|&q| optimize_aopt(&grid, q, &opts).map(|r| (q, r)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut table = Table::new(["q", "value", "iters"]);
        let mut rows = Vec::new();
        for (q, r) in &runs {
            table.rows.push(vec![Cell::Num(*q), Cell::Num(r.value), Cell::Int(r.iterations)]);
            rows.push(serde_json::json!({
                "q": q, "value": r.value, "iters": r.iterations,
                "converged": r.converged, "model_reference": reference(*q),
            }));
        }
        let report = serde_json::json!({ "options": opts, "sweep": rows });
        return Ok(Outcome::ok(&report)?.with_table(table));
    }
    let q = a.q.expect("clap requires q without a sweep");
    let result = optimize_aopt(&grid, q, &opts)?;
    Outcome::ok(&AoptOut { q, model_reference: reference(q), options: opts, result })
}

#[derive(Debug, Args, Serialize)]
pub struct TightCheckArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    #[arg(long)]
    pub q: f64,
    /// Candidate constant A.
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: f64,
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// File receiving the worst violating function.
    #[arg(long, default_value = "tight-check-witness.csv")]
    pub witness: PathBuf,
}

#[derive(Serialize)]
struct TightOut {
    witness_file: Option<String>,
    #[serde(flatten)]
    result: soblab_core::sobolev_solver::TightCheckReport,
}

pub fn tight_check(a: &TightCheckArgs) -> CliResult<Outcome> {
    let grid = a.grid.build()?;
    let r = tight_sobolev_check(&grid, a.q, a.a, a.trials, a.seed)?;
    let mut witness_file = None;
    if !r.passed {
        if let Some(w) = &r.witness {
            io::write_function(w, &a.witness)?;
            witness_file = Some(a.witness.display().to_string());
        }
    }
    let status = Status::from_pass(r.passed);
    Outcome::new(&TightOut { witness_file, result: r }, status)
}
