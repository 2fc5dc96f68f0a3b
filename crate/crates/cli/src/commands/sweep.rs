use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use soblab_core::constants::eucl_constant;
use soblab_core::sobolev_solver::{alpha_p_value, bliss_report, optimize_aopt, spectral_gap, AoptOptions};
use soblab_core::Extended;

use crate::error::{CliError, CliResult};
use crate::grid::{GridSpec, ModelKind};
use crate::output::{Cell, Outcome, Table};
use crate::params::{self, Range};

/// Quantity evaluated at each point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTarget {
    /// `Eucl(N, p)`; keys `N`, `p`.
    Eucl,
    /// Optimal tight constant; grid keys plus `q`, `restarts`, `max_iter`, `seed`.
    Aopt,
    /// Neumann spectral gap; grid keys.
    SpectralGap,
    /// Bliss quotient on a truncated cone; keys `b`, `N`, `p`, `r_max`, `nodes`.
    Bliss,
    /// `α_p` from a minimal density; keys `theta`, `N`, `p`.
    AlphaP,
}

impl SweepTarget {
    fn keys(self) -> &'static [&'static str] {
        const GRID: [&str; 5] = ["model", "N", "nodes", "r_max", "density"];
        match self {
            SweepTarget::Eucl => &["N", "p"],
            SweepTarget::Aopt => &["model", "N", "nodes", "r_max", "density", "q", "restarts", "max_iter", "seed"],
            SweepTarget::SpectralGap => &GRID,
            SweepTarget::Bliss => &["b", "N", "p", "r_max", "nodes"],
            SweepTarget::AlphaP => &["theta", "N", "p"],
        }
    }

    fn outputs(self) -> &'static [&'static str] {
        match self {
            SweepTarget::Eucl => &["eucl"],
            SweepTarget::Aopt => &["value", "iters"],
            SweepTarget::SpectralGap => &["gap"],
            SweepTarget::Bliss => &["quotient", "eucl"],
            SweepTarget::AlphaP => &["alpha_p"],
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub target: SweepTarget,
    /// Parameter `key=value`; exactly one value must be a range `start:stop:step`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

/// Parameters of one sweep point: numbers plus the few text-valued keys.
#[derive(Debug, Clone, Default)]
struct Point {
    nums: BTreeMap<String, f64>,
    texts: BTreeMap<String, String>,
}

impl Point {
    fn num(&self, key: &str, default: f64) -> f64 {
        self.nums.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.nums.get(key) {
            None => Ok(default),
            Some(&v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            Some(v) => Err(CliError::usage(format!("{key} must be a non-negative integer, got {v}"))),
        }
    }

    fn grid(&self) -> CliResult<GridSpec> {
        let d = GridSpec::default();
        let model = match self.texts.get("model") {
            Some(m) => ModelKind::from_str(m, true).map_err(|e| CliError::usage(format!("model {m:?}: {e}")))?,
            None => d.model,
        };
        Ok(GridSpec {
            model,
            n: self.num("N", d.n),
            nodes: self.count("nodes", d.nodes)?,
            r_max: self.num("r_max", d.r_max),
            density: self.texts.get("density").map(PathBuf::from),
            ..d
        })
    }
}

const TEXT_KEYS: [&str; 2] = ["model", "density"];

/// Splits the `--set` list into fixed values and the single ranged key.
fn parse_sets(target: SweepTarget, sets: &[String]) -> CliResult<(Point, String, Vec<f64>)> {
    let mut base = Point::default();
    let mut ranged: Option<(String, Vec<f64>)> = None;
    for s in sets {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--set expects key=value, got {s:?}")))?;
        let key = key.trim();
        if !target.keys().contains(&key) {
            return Err(CliError::usage(format!(
                "unknown key {key:?} for this target; expected one of {}",
                target.keys().join(", ")
            )));
        }
        if TEXT_KEYS.contains(&key) {
            base.texts.insert(key.to_string(), value.trim().to_string());
        } else if value.contains(':') {
            if ranged.is_some() {
                return Err(CliError::usage("a sweep takes exactly one ranged parameter, got several"));
            }
            ranged = Some((key.to_string(), Range::parse(value)?.values()?));
        } else if key == "theta" {
            let t = params::extended(value).map_err(CliError::usage)?;
            base.nums.insert(key.to_string(), t.to_f64());
        } else {
            let v = value.trim().parse::<f64>().map_err(|e| CliError::parse(format!("value of {key}"), e))?;
            base.nums.insert(key.to_string(), v);
        }
    }
    let (key, values) = ranged.ok_or_else(|| CliError::usage("a sweep needs one ranged parameter key=start:stop:step"))?;
    Ok((base, key, values))
}

fn evaluate(target: SweepTarget, pt: &Point) -> CliResult<Vec<Cell>> {
    Ok(match target {
        SweepTarget::Eucl => vec![Cell::Num(eucl_constant(pt.num("N", 3.0), pt.num("p", 2.0))?)],
        SweepTarget::Aopt => {
            let grid = pt.grid()?.build()?;
            let d = AoptOptions::default();
            let opts = AoptOptions {
                n_restarts: pt.count("restarts", d.n_restarts)?,
                max_iter: pt.count("max_iter", d.max_iter)?,
                seed: pt.count("seed", 0)? as u64,
                ..d
            };
            let q = pt.nums.get("q").copied().ok_or_else(|| CliError::usage("the aopt target needs q"))?;
            let r = optimize_aopt(&grid, q, &opts)?;
            vec![Cell::Num(r.value), Cell::Int(r.iterations)]
        }
        SweepTarget::SpectralGap => vec![Cell::Num(spectral_gap(&pt.grid()?.build()?, true)?.lambda)],
        SweepTarget::Bliss => {
            let r = bliss_report(
                pt.num("b", 1.0),
                pt.num("N", 3.0),
                pt.num("p", 2.0),
                pt.num("r_max", 200.0),
                pt.count("nodes", 100_000)?,
            )?;
            vec![Cell::Num(r.quotient), Cell::Num(r.eucl)]
        }
        SweepTarget::AlphaP => {
            let theta = pt.nums.get("theta").copied().ok_or_else(|| CliError::usage("the alpha-p target needs theta"))?;
            let theta = if theta.is_infinite() { Extended::Infinite } else { Extended::Finite(theta) };
            vec![Cell::Num(alpha_p_value(theta, pt.num("N", 3.0), pt.num("p", 2.0))?)]
        }
    })
}

/// Evaluates the target at every value of the ranged key, in parallel, and
/// returns the rows in range order.
pub fn sweep(a: &SweepArgs) -> CliResult<Outcome> {
    let (base, key, values) = parse_sets(a.target, &a.set)?;
    let rows = values
        .par_iter()
        .map(|&v| {
            let mut pt = base.clone();
            pt.nums.insert(key.clone(), v);
            evaluate(a.target, &pt).map(|cells| (v, cells))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(std::iter::once(key.as_str()).chain(a.target.outputs().iter().copied()));
    let mut json_rows = Vec::new();
    for (v, cells) in rows {
        let mut obj = serde_json::Map::new();
        obj.insert(key.clone(), serde_json::json!(v));
        for (name, c) in a.target.outputs().iter().zip(&cells) {
            let val = match c {
                Cell::Num(x) => serde_json::json!(x),
                Cell::Int(i) => serde_json::json!(i),
                Cell::Text(s) => serde_json::json!(s),
            };
            obj.insert((*name).to_string(), val);
        }
        json_rows.push(serde_json::Value::Object(obj));
        table.rows.push(std::iter::once(Cell::Num(v)).chain(cells).collect());
    }
    let fixed: BTreeMap<_, _> = base.nums.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).chain(
        base.texts.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))),
    ).collect();
    let report = serde_json::json!({ "target": a.target, "ranged": key, "fixed": fixed, "rows": json_rows });
    Ok(Outcome::ok(&report)?.with_table(table))
}
