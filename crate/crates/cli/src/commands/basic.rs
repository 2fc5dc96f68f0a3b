use clap::Args;
use serde::Serialize;
use soblab_core::constants::{
    bonnet_myers_radius, eucl_constant, eucl_constant_2, sine_power_integral, unit_ball_volume, unit_sphere_volume,
    Dimension, ExponentPair,
};
use soblab_core::sobolev_solver::{alpha_p_value, avr_lower_bound_from_sobolev, bliss_report};
use soblab_core::Extended;

use crate::error::CliResult;
use crate::grid::GridSpec;
use crate::output::{Outcome, Table};
use crate::params;

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Lower Ricci bound, for the Bonnet–Myers radius.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<f64>,
}

#[derive(Serialize)]
struct ConstantsReport {
    #[serde(rename = "N")]
    n: f64,
    p: f64,
    /// Volume of the unit ball in R^N.
    omega_n: f64,
    /// Area of the unit sphere S^{N-1}.
    sigma_n_minus_1: f64,
    /// Area of the unit sphere S^N.
    sigma_n: f64,
    /// `∫_0^π sin^{N-1}`.
    c_n: f64,
    p_star: Option<f64>,
    eucl: Option<f64>,
    eucl_2: Option<f64>,
    bonnet_myers_radius: Option<Extended>,
}

pub fn constants(a: &ConstantsArgs) -> CliResult<Outcome> {
    let n = Dimension::new(a.n)?.value();
    let pair = (a.p < n).then(|| ExponentPair::new(a.p, n)).transpose()?;
    let eucl = pair.map(|_| eucl_constant(n, a.p)).transpose()?;
    let radius = a.k.map(|k| {
        let r = bonnet_myers_radius(k, n);
        if r.is_finite() {
            Extended::Finite(r)
        } else {
            Extended::Infinite
        }
    });
    let report = ConstantsReport {
        n,
        p: a.p,
        omega_n: unit_ball_volume(n)?,
        sigma_n_minus_1: unit_sphere_volume(n)?,
        sigma_n: unit_sphere_volume(n + 1.0)?,
        c_n: sine_power_integral(n)?,
        p_star: pair.map(|p| p.p_star()),
        eucl,
        eucl_2: if a.p == 2.0 && n > 2.0 { Some(eucl_constant_2(n)?) } else { None },
        bonnet_myers_radius: radius,
    };
    Outcome::ok(&report)
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[command(flatten)]
    pub grid: GridSpec,
}

#[derive(Serialize)]
struct ModelReport {
    kind: soblab_core::model_spaces::DomainKind,
    n_nodes: usize,
    left: f64,
    right: f64,
    total_mass: f64,
    nodes: Vec<f64>,
    weight_at_node: Vec<f64>,
    cell_mass: Vec<f64>,
}

pub fn model(a: &ModelArgs) -> CliResult<Outcome> {
    let g = a.grid.build()?;
    let report = ModelReport {
        kind: g.kind(),
        n_nodes: g.len(),
        left: g.left(),
        right: g.right(),
        total_mass: g.total_mass(),
        nodes: g.nodes().to_vec(),
        weight_at_node: g.weight_at_node().to_vec(),
        cell_mass: g.cell_mass().to_vec(),
    };
    let table = Table::from_columns(&[
        ("node", g.nodes()),
        ("weight", g.weight_at_node()),
        ("cell_mass", g.cell_mass()),
    ]);
    Ok(Outcome::ok(&report)?.with_table(table))
}

#[derive(Debug, Args, Serialize)]
pub struct BlissArgs {
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Truncation radius of the cone.
    #[arg(long, default_value_t = 200.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 100_000)]
    pub nodes: usize,
}

pub fn bliss(a: &BlissArgs) -> CliResult<Outcome> {
    Outcome::ok(&bliss_report(a.b, a.n, a.p, a.r_max, a.nodes)?)
}

#[derive(Debug, Args, Serialize)]
pub struct AlphaPArgs {
    /// Minimal density θ_N, a positive number or `inf`.
    #[arg(long, value_parser = params::extended)]
    pub theta: Extended,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Constant of a Euclidean Sobolev inequality; adds the implied lower
    /// bound on the asymptotic volume ratio.
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<f64>,
}

#[derive(Serialize)]
struct AlphaPReport {
    theta: Extended,
    #[serde(rename = "N")]
    n: f64,
    p: f64,
    alpha_p: f64,
    avr_lower_bound: Option<f64>,
}

pub fn alpha_p(a: &AlphaPArgs) -> CliResult<Outcome> {
    let report = AlphaPReport {
        theta: a.theta,
        n: a.n,
        p: a.p,
        alpha_p: alpha_p_value(a.theta, a.n, a.p)?,
        avr_lower_bound: a.a.map(|c| avr_lower_bound_from_sobolev(c, a.n, a.p)).transpose()?,
    };
    Outcome::ok(&report)
}
