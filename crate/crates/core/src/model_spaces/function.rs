use std::sync::Arc;

use crate::error::{Error, Result};

use super::grid::WeightedGrid;

/// Node values of a continuous piecewise linear function on a grid.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Arc<WeightedGrid>,
    values: Vec<f64>,
}

/// Serialized as parallel `nodes` and `values` arrays.
impl serde::Serialize for SampledFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SampledFunction", 2)?;
        st.serialize_field("nodes", self.grid.nodes())?;
        st.serialize_field("values", &self.values)?;
        st.end()
    }
}

impl SampledFunction {
    pub fn new(grid: Arc<WeightedGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::input(format!(
                "function has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("function values must be finite"));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<WeightedGrid>, f: F) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<WeightedGrid>, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
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

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SampledFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Value of the piecewise linear interpolant at `t` (clamped to the grid).
    pub fn eval(&self, t: f64) -> f64 {
        let c = self.grid.cell_of(t);
        let x = self.grid.nodes();
        let l = ((t - x[c]) / (x[c + 1] - x[c])).clamp(0.0, 1.0);
        self.values[c] * (1.0 - l) + self.values[c + 1] * l
    }

    /// `∫ u dm`.
    pub fn integral(&self) -> f64 {
        self.grid.integrate_map(&self.values, |v| v)
    }

    /// `∫ u dm / m(X)`.
    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.total_mass()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `(∫ |u|^p dm)^{1/p}` for the piecewise linear interpolant, integrated cell
/// by cell with the grid's Gauss rule.
pub fn lp_norm(u: &SampledFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("Lp norm needs 1 <= p < inf, got {p}")));
    }
    Ok(lp_integral(u.grid(), u.values(), p).powf(1.0 / p))
}

/// `∫ |u|^p dm` without argument checks.
pub(crate) fn lp_integral(grid: &WeightedGrid, values: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        grid.integrate_map(values, |v| v * v)
    } else if p == 1.0 {
        grid.integrate_map(values, f64::abs)
    } else {
        grid.integrate_map(values, |v| v.abs().powf(p))
    }
}

/// `∫ |u'|^p dm`: the slope is constant on every cell, so this is the exact
/// energy of the interpolant.
pub fn dirichlet_energy(u: &SampledFunction, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("Dirichlet energy needs 1 < p < inf, got {p}")));
    }
    Ok(energy(u.grid(), u.values(), p))
}

pub(crate) fn energy(grid: &WeightedGrid, values: &[f64], p: f64) -> f64 {
    let x = grid.nodes();
    let m = grid.cell_mass();
    let mut e = 0.0;
    for c in 0..grid.n_cells() {
        let slope = (values[c + 1] - values[c]) / (x[c + 1] - x[c]);
        e += m[c] * if p == 2.0 { slope * slope } else { slope.abs().powf(p) };
    }
    e
}
