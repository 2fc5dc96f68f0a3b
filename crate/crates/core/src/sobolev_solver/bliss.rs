//! Sobolev ratio of the Bliss extremals `v_b(r) = (1 + b r^{p/(p-1)})^{(p-N)/p}`
//! on the Euclidean model.

use serde::Serialize;

use crate::constants::{eucl_constant, unit_sphere_volume, ExponentPair};
use crate::error::{Error, Result};
use crate::model_spaces::{energy, lp_integral, WeightedGrid};
use crate::quadrature::integrate;

/// Largest admissible share of `∫ v_b^{p*} dm` lying beyond `R_max`.
pub const BLISS_TAIL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct BlissReport {
    pub b: f64,
    pub n: f64,
    pub p: f64,
    pub r_max: f64,
    pub n_nodes: usize,
    /// `‖v_b‖_{L^{p*}} / ‖v_b'‖_{L^p}`.
    pub quotient: f64,
    pub eucl: f64,
    pub relative_gap: f64,
    /// Share of `∫ v_b^{p*}` beyond `R_max`.
    pub tail_fraction_value: f64,
    /// Share of `∫ |v_b'|^p` beyond `R_max`.
    pub tail_fraction_gradient: f64,
}

struct Extremal {
    b: f64,
    n: f64,
    p: f64,
}

impl Extremal {
    fn conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn value(&self, r: f64) -> f64 {
        (1.0 + self.b * r.powf(self.conj())).powf((self.p - self.n) / self.p)
    }

    fn slope(&self, r: f64) -> f64 {
        let (p, n, pc) = (self.p, self.n, self.conj());
        let base = 1.0 + self.b * r.powf(pc);
        (p - n) / p * base.powf((p - n) / p - 1.0) * self.b * pc * r.powf(pc - 1.0)
    }

    /// `∫_R^∞ f(r) σ_{N-1} r^{N-1} dr` through `r = R/s`.
    fn tail<F: Fn(f64) -> f64>(&self, r_max: f64, f: F) -> f64 {
        let sigma = unit_sphere_volume(self.n).unwrap_or(f64::NAN);
        let g = |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let r = r_max / s;
            let v = f(r) * sigma * r.powf(self.n - 1.0) * r_max / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        integrate(g, 0.0, 1.0, 0.0, 1e-12).value
    }
}

/// Ratio `‖v_b‖_{L^{p*}(m_{0,N})} / ‖v_b'‖_{L^p(m_{0,N})}` for the Bliss extremal.
///
/// The node values on `[0, R_max]` are integrated as a piecewise linear
/// function on the Euclidean model grid; the contributions of `(R_max, ∞)`
/// are added from the closed form of `v_b`. `R_max` is rejected when more
/// than `BLISS_TAIL_TOL` of the `L^{p*}` mass lies beyond it.
pub fn bliss_report(b: f64, n: f64, p: f64, r_max: f64, n_nodes: usize) -> Result<BlissReport> {
    let pair = ExponentPair::new(p, n)?;
    let p_star = pair.p_star();
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!("Bliss parameter must be positive, got {b}")));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::domain(format!("R_max must be positive, got {r_max}")));
    }
    let v = Extremal { b, n, p };
    let grid = WeightedGrid::cone_model(n, r_max, n_nodes)?;
    let values: Vec<f64> = grid.nodes().iter().map(|&r| v.value(r)).collect();
    let body_value = lp_integral(&grid, &values, p_star);
    let body_grad = energy(&grid, &values, p);
    let tail_value = v.tail(r_max, |r| v.value(r).powf(p_star));
    let tail_grad = v.tail(r_max, |r| v.slope(r).abs().powf(p));
    let frac_value = tail_value / (body_value + tail_value);
    let frac_grad = tail_grad / (body_grad + tail_grad);
    if !(frac_value <= BLISS_TAIL_TOL) {
        let mut suggested = r_max;
        while v.tail(suggested, |r| v.value(r).powf(p_star)) / (body_value + tail_value) > BLISS_TAIL_TOL
            && suggested < 1e12
        {
            suggested *= 2.0;
        }
        return Err(Error::Truncation {
            detail: format!("{frac_value:e} of the L^{p_star} mass of v_b lies beyond R_max = {r_max}"),
            suggested_r_max: suggested,
        });
    }
    let quotient = (body_value + tail_value).powf(1.0 / p_star) / (body_grad + tail_grad).powf(1.0 / p);
    let eucl = eucl_constant(n, p)?;
    Ok(BlissReport {
        b,
        n,
        p,
        r_max,
        n_nodes,
        quotient,
        eucl,
        relative_gap: (quotient - eucl) / eucl,
        tail_fraction_value: frac_value,
        tail_fraction_gradient: frac_grad,
    })
}

/// Ratio of `v_b` alone; see [`bliss_report`].
pub fn bliss_quotient(b: f64, n: f64, p: f64, r_max: f64, n_nodes: usize) -> Result<f64> {
    Ok(bliss_report(b, n, p, r_max, n_nodes)?.quotient)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_matches_difference_quotient() {
        let v = Extremal { b: 0.7, n: 3.5, p: 1.6 };
        for r in [0.3, 1.0, 4.0] {
            let h = 1e-6;
            let fd = (v.value(r + h) - v.value(r - h)) / (2.0 * h);
            assert!((fd - v.slope(r)).abs() < 1e-8 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn short_domains_are_rejected_with_suggestion() {
        match bliss_report(1.0, 3.0, 2.0, 5.0, 1000) {
            Err(Error::Truncation { suggested_r_max, .. }) => assert!(suggested_r_max > 5.0),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn exponent_range_is_checked() {
        assert!(bliss_quotient(1.0, 3.0, 3.0, 100.0, 100).is_err());
        assert!(bliss_quotient(-1.0, 3.0, 2.0, 100.0, 100).is_err());
    }
}
