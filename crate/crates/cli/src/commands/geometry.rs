use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use soblab_core::mm_geometry::{
    avr_estimate, bishop_gromov_ratios, brunn_minkowski_check, density_profile, isoperimetric_constant,
    local_sobolev_check, BrunnMinkowskiVerdict, DiscreteMMS, LocalSobolevParams, LocalSobolevVerdict,
};
use soblab_core::model_spaces::io;

use crate::error::{CliError, CliResult};
use crate::grid::GridSpec;
use crate::output::{Outcome, Status, Table};
use crate::params;

fn read_text(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    /// Discrete metric measure space (JSON) used instead of the grid.
    #[arg(long)]
    pub mms: Option<PathBuf>,
    /// Center: a position on the grid, or a point index of the discrete space.
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    /// Radii as a comma list, or `a:b:k` for k log-spaced radii.
    #[arg(long)]
    pub radii: String,
    /// Lower Ricci bound; adds the Bishop–Gromov ratios.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<f64>,
}

#[derive(Serialize)]
struct DensityOut<P: Serialize> {
    #[serde(flatten)]
    profile: soblab_core::mm_geometry::DensityProfile<P>,
    divergence_slope: f64,
    bishop_gromov: Option<Vec<f64>>,
}

pub fn density(a: &DensityArgs) -> CliResult<Outcome> {
    let radii = params::radii(&a.radii)?;
    let n = a.grid.n;
    let (out, table) = match &a.mms {
        Some(path) => {
            let space = DiscreteMMS::from_json(&read_text(path)?)?;
            if !(a.x >= 0.0 && a.x.fract() == 0.0) {
                return Err(CliError::usage(format!("--x must be a point index for a discrete space, got {}", a.x)));
            }
            let x = a.x as usize;
            let profile = density_profile(&space, x, n, &radii)?;
            let bg = a.k.map(|k| bishop_gromov_ratios(&space, x, k, n, &radii)).transpose()?;
            let table = Table::from_columns(&[("r", &profile.radii), ("theta", &profile.theta_r)]);
            let out = DensityOut { profile, divergence_slope: soblab_core::mm_geometry::DIVERGENCE_SLOPE, bishop_gromov: bg };
            (crate::output::to_value(&out)?, table)
        }
        None => {
            let grid = a.grid.build()?;
            let profile = density_profile(&grid, a.x, n, &radii)?;
            let bg = a.k.map(|k| bishop_gromov_ratios(&grid, a.x, k, n, &radii)).transpose()?;
            let table = Table::from_columns(&[("r", &profile.radii), ("theta", &profile.theta_r)]);
            let out = DensityOut { profile, divergence_slope: soblab_core::mm_geometry::DIVERGENCE_SLOPE, bishop_gromov: bg };
            (crate::output::to_value(&out)?, table)
        }
    };
    Ok(Outcome::ok(&out)?.with_table(table))
}

#[derive(Debug, Args, Serialize)]
pub struct AvrArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
}

pub fn avr(a: &AvrArgs) -> CliResult<Outcome> {
    let grid = a.grid.build()?;
    let r = avr_estimate(&grid, a.x, a.grid.n)?;
    let table = Table::from_columns(&[("r", &r.radii), ("theta", &r.theta_r)]);
    Ok(Outcome::ok(&r)?.with_table(table))
}

#[derive(Debug, Args, Serialize)]
pub struct IsopArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    /// Region `lo,hi`; the whole grid when absent.
    #[arg(long, value_parser = params::interval)]
    pub region: Option<(f64, f64)>,
}

pub fn isop(a: &IsopArgs) -> CliResult<Outcome> {
    let grid = a.grid.build()?;
    let region = a.region.unwrap_or((grid.left(), grid.right()));
    Outcome::ok(&isoperimetric_constant(&grid, region, a.grid.n)?)
}

#[derive(Debug, Args, Serialize)]
pub struct BrunnMinkowskiArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    #[arg(long, value_parser = params::interval)]
    pub a0: (f64, f64),
    #[arg(long, value_parser = params::interval)]
    pub a1: (f64, f64),
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: f64,
}

pub fn brunn_minkowski(a: &BrunnMinkowskiArgs) -> CliResult<Outcome> {
    let grid = a.grid.build()?;
    let r = brunn_minkowski_check(&grid, a.a0, a.a1, a.t, a.k, a.grid.n)?;
    let status = Status::from_pass(r.verdict != BrunnMinkowskiVerdict::Fail);
    Outcome::new(&r, status)
}

#[derive(Debug, Args, Serialize)]
pub struct LocalSobolevArgs {
    #[command(flatten)]
    pub grid: GridSpec,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    /// Support radius of the trial functions.
    #[arg(long)]
    pub r: f64,
    /// Radius at which the volume ratio is measured.
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub big_r: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lower Ricci bound; read from the model when absent.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    /// File receiving the worst trial function.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

pub fn local_sobolev(a: &LocalSobolevArgs) -> CliResult<Outcome> {
    let grid = a.grid.build()?;
    let prm = LocalSobolevParams {
        x: a.x,
        r: a.r,
        big_r: a.big_r,
        n: a.grid.n,
        p: a.p,
        trials: a.trials,
        seed: a.seed,
        k: a.k,
    };
    let r = local_sobolev_check(&grid, &prm)?;
    if let Some(path) = &a.witness {
        io::write_function(&r.witness, path)?;
    }
    let status = Status::from_pass(r.verdict != LocalSobolevVerdict::Fail);
    Outcome::new(&r, status)
}
