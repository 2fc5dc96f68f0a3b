use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::constants::{unit_ball_volume, unit_sphere_volume};
use crate::error::{Error, Result};
use crate::quadrature::{gauss5, GAUSS5_W, GAUSS5_X};

/// Number of dyadic layers in the graded rule used on cells touching an
/// endpoint where the density vanishes or blows up.
const GRADED_LEVELS: usize = 40;

/// Which geometry a grid discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    /// `[0, radius]` with density `sin^{N-1}/c_N`; `radius = π` is the full
    /// model, smaller radii are the sub-intervals produced by rearrangement.
    SphereModel { n: f64, radius: f64 },
    /// `[0, r_max]` with density `σ_{N-1} t^{N-1}`.
    ConeModel { n: f64, r_max: f64 },
    /// User-supplied density. `unbounded` marks a grid that stands for a
    /// half-line truncated at its last node.
    Custom { unbounded: bool },
}

impl DomainKind {
    /// Dimension parameter for the model spaces, `None` for custom grids.
    pub fn dimension(&self) -> Option<f64> {
        match self {
            DomainKind::SphereModel { n, .. } | DomainKind::ConeModel { n, .. } => Some(*n),
            DomainKind::Custom { .. } => None,
        }
    }
}

/// Density law behind a grid, kept so that masses of arbitrary sub-intervals
/// can be computed after construction.
#[derive(Clone)]
enum WeightLaw {
    Sphere { n: f64 },
    Cone { n: f64, omega: f64, sigma: f64 },
    /// Piecewise linear through the node samples.
    Tabulated,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for WeightLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightLaw::Sphere { n } => write!(f, "Sphere {{ n: {n} }}"),
            WeightLaw::Cone { n, .. } => write!(f, "Cone {{ n: {n} }}"),
            WeightLaw::Tabulated => write!(f, "Tabulated"),
            WeightLaw::Custom(_) => write!(f, "Custom(<fn>)"),
        }
    }
}

/// Quadrature points of each cell, stored as positions `λ ∈ [0,1]` inside the
/// cell together with weights that already include the density.
#[derive(Debug, Clone)]
struct CellQuadrature {
    offsets: Vec<usize>,
    lambda: Vec<f64>,
    weight: Vec<f64>,
}

/// A weighted interval discretized by its nodes.
///
/// Functions on the grid are continuous and piecewise linear between nodes;
/// every integral of such a function against the measure is evaluated cell by
/// cell with a Gauss rule on the density, so norms and energies are those of
/// an honest Sobolev function rather than of a lumped surrogate.
#[derive(Debug, Clone)]
pub struct WeightedGrid {
    nodes: Vec<f64>,
    weight_at_node: Vec<f64>,
    cell_mass: Vec<f64>,
    cumulative: Vec<f64>,
    total_mass: f64,
    kind: DomainKind,
    law: WeightLaw,
    /// Multiplier applied to the raw density (normalization).
    scale: f64,
    graded_left: bool,
    graded_right: bool,
    quad: CellQuadrature,
}

/// Gauss points of `[a, b]` refined geometrically towards one end.
fn graded_points(a: f64, b: f64, toward_left: bool) -> Vec<(f64, f64)> {
    let h = b - a;
    let mut pts = Vec::with_capacity(5 * (GRADED_LEVELS + 1));
    let mut push = |lo: f64, hi: f64| {
        let c = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        for k in 0..5 {
            pts.push((c + r * GAUSS5_X[k], r * GAUSS5_W[k]));
        }
    };
    let mut outer = 1.0;
    for _ in 0..GRADED_LEVELS {
        let inner = 0.5 * outer;
        if toward_left {
            push(a + h * inner, a + h * outer);
        } else {
            push(b - h * outer, b - h * inner);
        }
        outer = inner;
    }
    if toward_left {
        push(a, a + h * outer);
    } else {
        push(b - h * outer, b);
    }
    pts
}

fn check_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.len() < 3 {
        return Err(Error::input(format!("a grid needs at least 3 nodes, got {}", nodes.len())));
    }
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("grid nodes must be finite"));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input("grid nodes must be strictly increasing"));
    }
    Ok(())
}

fn uniform_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    v[n - 1] = b;
    v
}

impl WeightedGrid {
    fn assemble(
        nodes: Vec<f64>,
        kind: DomainKind,
        law: WeightLaw,
        tabulated: Option<Vec<f64>>,
        graded_left: bool,
        graded_right: bool,
    ) -> Result<Self> {
        check_nodes(&nodes)?;
        let n = nodes.len();
        let mut grid = WeightedGrid {
            weight_at_node: tabulated.unwrap_or_default(),
            nodes,
            cell_mass: Vec::new(),
            cumulative: Vec::new(),
            total_mass: 0.0,
            kind,
            law,
            scale: 1.0,
            graded_left,
            graded_right,
            quad: CellQuadrature { offsets: vec![0], lambda: Vec::new(), weight: Vec::new() },
        };
        if grid.weight_at_node.is_empty() {
            grid.weight_at_node = grid.nodes.iter().map(|&x| grid.raw_density(x)).collect();
        }
        if grid.weight_at_node.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::input("density must be finite and non-negative at every node"));
        }
        let mut cell_mass = Vec::with_capacity(n - 1);
        for c in 0..n - 1 {
            let (a, b) = (grid.nodes[c], grid.nodes[c + 1]);
            let pts = if c == 0 && graded_left {
                graded_points(a, b, true)
            } else if c == n - 2 && graded_right {
                graded_points(a, b, false)
            } else {
                let mid = 0.5 * (a + b);
                let r = 0.5 * (b - a);
                (0..5).map(|k| (mid + r * GAUSS5_X[k], r * GAUSS5_W[k])).collect()
            };
            let start = grid.quad.weight.len();
            let mut sum = 0.0;
            for (x, w) in pts {
                let wt = w * grid.raw_density(x);
                if !(wt.is_finite() && wt >= 0.0) {
                    return Err(Error::input(format!("density is not finite and non-negative near {x}")));
                }
                grid.quad.lambda.push((x - a) / (b - a));
                grid.quad.weight.push(wt);
                sum += wt;
            }
            if let WeightLaw::Cone { n: dim, omega, .. } = grid.law {
                // exact primitive; the point weights are rescaled to match it
                let exact = omega * (b.powf(dim) - a.powf(dim));
                if sum > 0.0 {
                    for w in &mut grid.quad.weight[start..] {
                        *w *= exact / sum;
                    }
                }
                sum = exact;
            }
            cell_mass.push(sum);
            grid.quad.offsets.push(grid.quad.weight.len());
        }
        grid.cell_mass = cell_mass;
        grid.refresh_cumulative();
        if !(grid.total_mass > 0.0) {
            return Err(Error::input("grid has zero total mass"));
        }
        Ok(grid)
    }

    fn refresh_cumulative(&mut self) {
        let mut acc = 0.0;
        self.cumulative = Vec::with_capacity(self.nodes.len());
        self.cumulative.push(0.0);
        for m in &self.cell_mass {
            acc += m;
            self.cumulative.push(acc);
        }
        self.total_mass = acc;
    }

    /// Multiply the measure by `factor`.
    fn rescaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        for w in &mut self.weight_at_node {
            *w *= factor;
        }
        for m in &mut self.cell_mass {
            *m *= factor;
        }
        for w in &mut self.quad.weight {
            *w *= factor;
        }
        self.refresh_cumulative();
        self
    }

    /// Unscaled density of the underlying law.
    fn raw_density(&self, t: f64) -> f64 {
        match &self.law {
            WeightLaw::Sphere { n } => t.sin().max(0.0).powf(n - 1.0),
            WeightLaw::Cone { n, sigma, .. } => sigma * t.max(0.0).powf(n - 1.0),
            WeightLaw::Tabulated => self.interpolate_weight(t),
            WeightLaw::Custom(f) => f(t),
        }
    }

    fn interpolate_weight(&self, t: f64) -> f64 {
        let c = self.cell_of(t);
        let (a, b) = (self.nodes[c], self.nodes[c + 1]);
        let l = ((t - a) / (b - a)).clamp(0.0, 1.0);
        self.weight_at_node[c] * (1.0 - l) + self.weight_at_node[c + 1] * l
    }

    /// Density of the measure at `t` (including normalization).
    pub fn density(&self, t: f64) -> f64 {
        match self.law {
            WeightLaw::Tabulated => self.interpolate_weight(t),
            _ => self.scale * self.raw_density(t),
        }
    }

    /// The model space `[0, π]` with density `sin^{N-1}(t)/c_N` on uniform
    /// nodes; `c_N` is the quadrature mass of `sin^{N-1}`, so the total mass
    /// is one up to rounding.
    pub fn sphere_model(n: f64, n_nodes: usize) -> Result<Self> {
        let grid = Self::sphere_raw(n, PI, n_nodes)?;
        let c_n = grid.total_mass;
        Ok(grid.rescaled(1.0 / c_n))
    }

    /// `[0, radius]` with density `sin^{N-1}/c_N`, where `c_N` is the mass of the
    /// full model. This is the target of rearrangements of functions living on
    /// sets of mass below one.
    pub fn sphere_sub_model(n: f64, radius: f64, n_nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius <= PI) {
            return Err(Error::domain(format!("sub-model radius must lie in (0, π], got {radius}")));
        }
        let c_n = sphere_normalizer(n)?;
        Ok(Self::sphere_raw(n, radius, n_nodes)?.rescaled(1.0 / c_n))
    }

    fn sphere_raw(n: f64, radius: f64, n_nodes: usize) -> Result<Self> {
        if !(n.is_finite() && n > 1.0) {
            return Err(Error::domain(format!("sphere model needs N > 1, got {n}")));
        }
        if n_nodes < 16 {
            return Err(Error::input(format!("sphere model needs at least 16 nodes, got {n_nodes}")));
        }
        let full = radius == PI;
        Self::assemble(
            uniform_nodes(0.0, radius, n_nodes),
            DomainKind::SphereModel { n, radius },
            WeightLaw::Sphere { n },
            None,
            true,
            full,
        )
    }

    /// The Euclidean model `[0, r_max]` with density `σ_{N-1} t^{N-1}`; cell
    /// masses are the exact differences `ω_N(x_{i+1}^N - x_i^N)`.
    pub fn cone_model(n: f64, r_max: f64, n_nodes: usize) -> Result<Self> {
        Self::cone_model_on(n, uniform_nodes(0.0, r_max, n_nodes.max(3)), n_nodes)
    }

    /// Cone model on caller-supplied nodes starting at zero.
    pub fn cone_model_with_nodes(n: f64, nodes: Vec<f64>) -> Result<Self> {
        let len = nodes.len();
        Self::cone_model_on(n, nodes, len)
    }

    fn cone_model_on(n: f64, nodes: Vec<f64>, n_nodes: usize) -> Result<Self> {
        if !(n.is_finite() && n >= 1.0) {
            return Err(Error::domain(format!("cone model needs N >= 1, got {n}")));
        }
        if n_nodes < 3 {
            return Err(Error::input(format!("cone model needs at least 3 nodes, got {n_nodes}")));
        }
        if nodes.first() != Some(&0.0) {
            return Err(Error::input("cone model nodes must start at the tip 0"));
        }
        let r_max = *nodes.last().unwrap();
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::domain(format!("cone model needs R_max > 0, got {r_max}")));
        }
        let omega = unit_ball_volume(n)?;
        let sigma = unit_sphere_volume(n)?;
        Self::assemble(
            nodes,
            DomainKind::ConeModel { n, r_max },
            WeightLaw::Cone { n, omega, sigma },
            None,
            true,
            false,
        )
    }

    /// Grid with an arbitrary density given as a function. The two end cells
    /// use graded quadrature so densities vanishing or integrably blowing up
    /// at an endpoint are handled.
    pub fn from_density<F>(nodes: Vec<f64>, density: F, unbounded: bool) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::assemble(
            nodes,
            DomainKind::Custom { unbounded },
            WeightLaw::Custom(Arc::new(density)),
            None,
            true,
            true,
        )
    }

    /// Grid whose density is linear between the given node samples.
    pub fn from_samples(nodes: Vec<f64>, weights: Vec<f64>, unbounded: bool) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::input(format!(
                "{} nodes but {} weight samples",
                nodes.len(),
                weights.len()
            )));
        }
        Self::assemble(nodes, DomainKind::Custom { unbounded }, WeightLaw::Tabulated, Some(weights), false, false)
    }

    /// Constant density `1/(b-a)` on uniform nodes: a probability measure.
    pub fn uniform(a: f64, b: f64, n_nodes: usize) -> Result<Self> {
        if !(b > a) {
            return Err(Error::domain("uniform grid needs a < b"));
        }
        Self::from_samples(uniform_nodes(a, b, n_nodes.max(3)), vec![1.0 / (b - a); n_nodes.max(3)], false)?
            .check_len(n_nodes)
    }

    fn check_len(self, n_nodes: usize) -> Result<Self> {
        if n_nodes < 3 {
            return Err(Error::input(format!("a grid needs at least 3 nodes, got {n_nodes}")));
        }
        Ok(self)
    }

    /// Copy of the grid whose measure is rescaled to total mass one.
    pub fn normalized(&self) -> Self {
        let m = self.total_mass;
        self.clone().rescaled(1.0 / m)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }
    pub fn weight_at_node(&self) -> &[f64] {
        &self.weight_at_node
    }
    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
    pub fn kind(&self) -> DomainKind {
        self.kind
    }
    pub fn dimension(&self) -> Option<f64> {
        self.kind.dimension()
    }
    pub fn left(&self) -> f64 {
        self.nodes[0]
    }
    pub fn right(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }
    pub fn diameter(&self) -> f64 {
        self.right() - self.left()
    }
    pub fn cell_width(&self, c: usize) -> f64 {
        self.nodes[c + 1] - self.nodes[c]
    }

    /// Mass of `[x_0, x_i]` for each node.
    pub fn cumulative_mass(&self) -> &[f64] {
        &self.cumulative
    }

    /// Normalization constant of the full sphere model used by this grid,
    /// i.e. the raw mass of `sin^{N-1}` on `[0, π]`.
    pub fn sphere_normalizer(&self) -> Option<f64> {
        match self.law {
            WeightLaw::Sphere { .. } => Some(1.0 / self.scale),
            _ => None,
        }
    }

    /// Index of the cell containing `t` (clamped to the grid).
    pub fn cell_of(&self, t: f64) -> usize {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&x| x <= t);
        i.saturating_sub(1).min(n - 2)
    }

    /// Quadrature rule of cell `c` as `(λ, weight)` slices.
    pub(crate) fn cell_rule(&self, c: usize) -> (&[f64], &[f64]) {
        let r = self.quad.offsets[c]..self.quad.offsets[c + 1];
        (&self.quad.lambda[r.clone()], &self.quad.weight[r])
    }

    /// Integral of the density over `[lo, hi]` computed directly inside cell
    /// `c` (both ends must lie in that cell).
    pub fn cell_mass_between(&self, c: usize, lo: f64, hi: f64) -> f64 {
        let (a, b) = (self.nodes[c], self.nodes[c + 1]);
        let lo = lo.max(a);
        let hi = hi.min(b);
        if !(hi > lo) {
            return 0.0;
        }
        match &self.law {
            WeightLaw::Cone { n, omega, .. } => self.scale * omega * (hi.powf(*n) - lo.powf(*n)),
            WeightLaw::Tabulated => {
                let (wa, wb) = (self.interpolate_weight(lo), self.interpolate_weight(hi));
                0.5 * (wa + wb) * (hi - lo)
            }
            _ => {
                let graded = (c == 0 && self.graded_left) || (c == self.n_cells() - 1 && self.graded_right);
                if graded {
                    self.cell_primitive(c, hi) - self.cell_primitive(c, lo)
                } else {
                    let f = |t: f64| self.density(t);
                    gauss5(&f, lo, hi)
                }
            }
        }
    }

    /// Mass of `[x_c, s]` for `s` inside cell `c`.
    fn cell_primitive(&self, c: usize, s: f64) -> f64 {
        let (a, b) = (self.nodes[c], self.nodes[c + 1]);
        if s <= a {
            return 0.0;
        }
        if s >= b {
            return self.cell_mass[c];
        }
        let f = |t: f64| self.density(t);
        let graded_sum = |lo: f64, hi: f64, left: bool| -> f64 {
            graded_points(lo, hi, left).into_iter().map(|(x, w)| w * f(x)).sum()
        };
        if matches!(self.law, WeightLaw::Cone { .. } | WeightLaw::Tabulated) {
            self.cell_mass_between(c, a, s)
        } else if c == 0 && self.graded_left {
            graded_sum(a, s, true)
        } else if c == self.n_cells() - 1 && self.graded_right {
            self.cell_mass[c] - graded_sum(s, b, false)
        } else {
            self.cell_mass_between(c, a, s)
        }
    }

    /// Mass of `[x_0, s]`.
    pub fn mass_up_to(&self, s: f64) -> f64 {
        if s <= self.left() {
            return 0.0;
        }
        if s >= self.right() {
            return self.total_mass;
        }
        let c = self.cell_of(s);
        self.cumulative[c] + self.cell_primitive(c, s)
    }

    /// Mass of `[a, b] ∩ grid domain`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.left());
        let b = b.min(self.right());
        if !(b > a) {
            return 0.0;
        }
        let (ca, cb) = (self.cell_of(a), self.cell_of(b));
        if ca == cb {
            return self.cell_mass_between(ca, a, b);
        }
        let head = self.cell_mass[ca] - self.cell_primitive(ca, a);
        let tail = self.cell_primitive(cb, b);
        head + (self.cumulative[cb] - self.cumulative[ca + 1]) + tail
    }

    /// Same nodes and cell masses, so node vectors of one are valid on the other.
    pub(crate) fn same_as(&self, other: &WeightedGrid) -> bool {
        std::ptr::eq(self, other) || (self.nodes == other.nodes && self.cell_mass == other.cell_mass)
    }

    /// `Σ_cells ∫ F(u) dm` for the piecewise linear interpolant of `values`.
    pub(crate) fn integrate_map<F: Fn(f64) -> f64>(&self, values: &[f64], f: F) -> f64 {
        let mut total = 0.0;
        for c in 0..self.n_cells() {
            let (u0, u1) = (values[c], values[c + 1]);
            let (lam, w) = self.cell_rule(c);
            let mut s = 0.0;
            for k in 0..lam.len() {
                s += w[k] * f(u0 + (u1 - u0) * lam[k]);
            }
            total += s;
        }
        total
    }

    /// Load vector `b_i = ∫ F(u) φ_i dm` against the hat functions.
    pub(crate) fn load_vector<F: Fn(f64) -> f64>(&self, values: &[f64], f: F) -> Vec<f64> {
        let mut b = vec![0.0; self.nodes.len()];
        for c in 0..self.n_cells() {
            let (u0, u1) = (values[c], values[c + 1]);
            let (lam, w) = self.cell_rule(c);
            let (mut left, mut right) = (0.0, 0.0);
            for k in 0..lam.len() {
                let v = w[k] * f(u0 + (u1 - u0) * lam[k]);
                left += v * (1.0 - lam[k]);
                right += v * lam[k];
            }
            b[c] += left;
            b[c + 1] += right;
        }
        b
    }

    /// Consistent mass matrix `∫ ρ φ_i φ_j dm` as (diagonal, super-diagonal),
    /// where `ρ` is an optional piecewise linear coefficient.
    pub(crate) fn mass_matrix(&self, coefficient: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes.len();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for c in 0..n - 1 {
            let (lam, w) = self.cell_rule(c);
            let (mut d0, mut d1, mut o) = (0.0, 0.0, 0.0);
            for k in 0..lam.len() {
                let l = lam[k];
                let rho = match coefficient {
                    Some(s) => s[c] * (1.0 - l) + s[c + 1] * l,
                    None => 1.0,
                };
                let wk = w[k] * rho;
                d0 += wk * (1.0 - l) * (1.0 - l);
                d1 += wk * l * l;
                o += wk * l * (1.0 - l);
            }
            diag[c] += d0;
            diag[c + 1] += d1;
            off[c] += o;
        }
        (diag, off)
    }

    /// Product of the stiffness matrix with `x`, assembled from differences
    /// so that nearly constant `x` keeps its relative accuracy.
    pub(crate) fn stiffness_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for c in 0..self.n_cells() {
            let h = self.cell_width(c);
            let flux = self.cell_mass[c] / (h * h) * (x[c] - x[c + 1]);
            y[c] += flux;
            y[c + 1] -= flux;
        }
        y
    }

    /// Stiffness matrix `∫ φ_i' φ_j' dm` as (diagonal, super-diagonal).
    pub(crate) fn stiffness_matrix(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes.len();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for c in 0..n - 1 {
            let h = self.cell_width(c);
            let k = self.cell_mass[c] / (h * h);
            diag[c] += k;
            diag[c + 1] += k;
            off[c] -= k;
        }
        (diag, off)
    }
}

/// Raw mass of `sin^{N-1}` on `[0, π]`, computed with the same graded cell
/// quadrature the sphere model uses.
pub fn sphere_normalizer(n: f64) -> Result<f64> {
    Ok(WeightedGrid::sphere_raw(n, PI, 2049)?.total_mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::sine_power_integral;

    #[test]
    fn sphere_normalization_matches_closed_form() {
        for (n, c) in [(2.0, 2.0), (3.0, PI / 2.0)] {
            let g = WeightedGrid::sphere_model(n, 1024).unwrap();
            assert!((g.total_mass() - 1.0).abs() < 1e-10);
            assert!((g.sphere_normalizer().unwrap() - c).abs() < 1e-10);
        }
        for n in [1.2, 1.5, 2.5, 4.0, 5.5, 9.0] {
            let g = WeightedGrid::sphere_model(n, 64).unwrap();
            let c = sine_power_integral(n).unwrap();
            assert!((g.sphere_normalizer().unwrap() / c - 1.0).abs() < 1e-10, "N = {n}");
        }
    }

    #[test]
    fn sphere_needs_sixteen_nodes() {
        assert!(matches!(WeightedGrid::sphere_model(3.0, 15), Err(Error::Input(_))));
    }

    #[test]
    fn cone_masses_are_exact() {
        let g = WeightedGrid::cone_model(3.0, 1.0, 100).unwrap();
        assert!((g.total_mass() - 4.0 * PI / 3.0).abs() < 1e-13);
        let g = WeightedGrid::cone_model(2.0, 2.0, 17).unwrap();
        assert!((g.total_mass() - 4.0 * PI).abs() < 1e-13);
        let omega = unit_ball_volume(1.5).unwrap();
        let g = WeightedGrid::cone_model(1.5, 3.0, 50).unwrap();
        for c in 0..g.n_cells() {
            let x = g.nodes();
            let exact = omega * (x[c + 1].powf(1.5) - x[c].powf(1.5));
            assert!((g.cell_mass()[c] - exact).abs() <= 1e-15 * exact.max(1.0));
        }
    }

    #[test]
    fn mass_between_is_additive() {
        let g = WeightedGrid::sphere_model(3.5, 40).unwrap();
        let (a, m, b) = (0.013, 1.234_5, 3.1);
        let whole = g.mass_between(a, b);
        let split = g.mass_between(a, m) + g.mass_between(m, b);
        assert!((whole - split).abs() < 1e-14);
        assert!((g.mass_between(0.0, PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_masses_of_singular_cone_cell() {
        let g = WeightedGrid::cone_model(1.3, 1.0, 11).unwrap();
        let omega = unit_ball_volume(1.3).unwrap();
        let s = 0.037;
        assert!((g.mass_up_to(s) - omega * s.powf(1.3)).abs() < 1e-15);
    }

    #[test]
    fn custom_density_with_endpoint_singularity() {
        let nodes = uniform_nodes(0.0, 1.0, 33);
        let g = WeightedGrid::from_density(nodes.clone(), |t: f64| t.powf(0.3) * (1.0 - t).powf(0.6), false).unwrap();
        // Beta(1.3, 1.6) = Γ(1.3)Γ(1.6)/Γ(2.9)
        let beta = 0.897_470_696_306_277_2 * 0.893_515_349_287_690_3 / 1.827_355_080_624_035_95;
        assert!((g.total_mass() / beta - 1.0).abs() < 1e-10, "{}", g.total_mass());
        assert!(WeightedGrid::from_density(nodes, |t: f64| t.powf(-0.5), false).is_err());
        let n = g.normalized();
        assert!((n.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(WeightedGrid::from_samples(vec![0.0, 1.0], vec![1.0, 1.0], false).is_err());
        assert!(WeightedGrid::from_samples(vec![0.0, 1.0, 1.0], vec![1.0; 3], false).is_err());
        assert!(WeightedGrid::from_samples(vec![0.0, 1.0, 2.0], vec![1.0, -1.0, 1.0], false).is_err());
    }
}
