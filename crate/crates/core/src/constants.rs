//! Closed-form constants: ball and sphere volumes, sharp Euclidean Sobolev
//! constants, comparison volumes and distortion coefficients.

use std::f64::consts::PI;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quadrature;

/// Dimension parameter `N > 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Dimension(f64);

impl Dimension {
    pub fn new(n: f64) -> Result<Self> {
        if !(n.is_finite() && n > 1.0) {
            return Err(Error::domain(format!("dimension must satisfy N > 1, got {n}")));
        }
        Ok(Dimension(n))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Critical Sobolev exponent `2N/(N-2)`; requires `N > 2`.
    pub fn critical_exponent(self) -> Result<f64> {
        if self.0 <= 2.0 {
            return Err(Error::domain(format!("critical exponent needs N > 2, got {}", self.0)));
        }
        Ok(2.0 * self.0 / (self.0 - 2.0))
    }
}

/// An exponent `p in (1, N)` with its Sobolev conjugate derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPair {
    p: f64,
    n: f64,
}

impl ExponentPair {
    pub fn new(p: f64, n: f64) -> Result<Self> {
        let dim = Dimension::new(n)?;
        if !(p > 1.0 && p < dim.value()) {
            return Err(Error::domain(format!("exponent must satisfy 1 < p < N, got p = {p}, N = {n}")));
        }
        Ok(ExponentPair { p, n })
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn dimension(self) -> f64 {
        self.n
    }

    /// `pN/(N-p)`.
    pub fn p_star(self) -> f64 {
        self.p * self.n / (self.n - self.p)
    }
}

/// Lower Ricci bound `K` and upper dimension bound `N >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureParams {
    pub k: f64,
    pub n: f64,
}

impl CurvatureParams {
    pub fn new(k: f64, n: f64) -> Result<Self> {
        if !k.is_finite() || !(n.is_finite() && n >= 1.0) {
            return Err(Error::domain(format!("need finite K and N >= 1, got K = {k}, N = {n}")));
        }
        Ok(CurvatureParams { k, n })
    }
}

/// A non-negative quantity that may be `+inf` for structural reasons
/// (distortion coefficients past the diameter bound, densities at collapsed
/// points). Serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// Lossy conversion; `Infinite` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => s.serialize_f64(*v),
            Extended::Infinite => s.serialize_str("inf"),
        }
    }
}

const LANCZOS_G: f64 = 671.0 / 128.0;
const LANCZOS_COEF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

fn ln_gamma_lanczos(x: f64) -> f64 {
    let mut y = x;
    let tmp = x + LANCZOS_G;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_092;
    for c in LANCZOS_COEF {
        y += 1.0;
        ser += c / y;
    }
    tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Natural logarithm of `Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma needs a finite x > 0, got {x}")));
    }
    if x <= 60.0 {
        return Ok(gamma(x)?.ln());
    }
    Ok(ln_gamma_lanczos(x))
}

/// `Γ(x)` for `x > 0`.
///
/// The argument is shifted into `[1, 2)` with the functional equation and the
/// Lanczos series is only evaluated there, which keeps the relative error
/// near a few ulps for every `x <= 60`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma needs a finite x > 0, got {x}")));
    }
    if x > 60.0 {
        return Ok(ln_gamma_lanczos(x).exp());
    }
    let mut y = x;
    let mut scale = 1.0;
    if y < 1.0 {
        scale /= y;
        y += 1.0;
    }
    while y >= 2.0 {
        y -= 1.0;
        scale *= y;
    }
    Ok(scale * ln_gamma_lanczos(y).exp())
}

fn check_volume_dimension(n: f64) -> Result<()> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::domain(format!("dimension must satisfy N >= 1, got {n}")));
    }
    Ok(())
}

/// Volume of the unit ball in (possibly fractional) dimension `N`:
/// `π^{N/2}/Γ(N/2+1)`.
pub fn unit_ball_volume(n: f64) -> Result<f64> {
    check_volume_dimension(n)?;
    Ok(PI.powf(0.5 * n) / gamma(0.5 * n + 1.0)?)
}

/// Surface measure of the unit sphere bounding the `N`-ball, `N·ω_N`.
pub fn unit_sphere_volume(n: f64) -> Result<f64> {
    Ok(n * unit_ball_volume(n)?)
}

/// Sharp constant of the Euclidean Sobolev inequality
/// `‖u‖_{p*} <= Eucl(N,p) ‖∇u‖_p`.
pub fn eucl_constant(n: f64, p: f64) -> Result<f64> {
    let pair = ExponentPair::new(p, n)?;
    let (n, p) = (pair.dimension(), pair.p());
    let lead = (n * (p - 1.0) / (n - p)).powf((p - 1.0) / p) / n;
    let denom = n * unit_ball_volume(n)? * gamma(n / p)? * gamma(n + 1.0 - n / p)?;
    // Γ(N+1) overflows only far beyond the dimensions of interest; the log
    // form keeps large N usable anyway.
    let ratio = if n + 1.0 <= 60.0 {
        gamma(n + 1.0)? / denom
    } else {
        (ln_gamma(n + 1.0)? - denom.ln()).exp()
    };
    Ok(lead * ratio.powf(1.0 / n))
}

/// The `p = 2` specialisation `(4/(N(N-2)σ_N^{2/N}))^{1/2}`, with `σ_N` the
/// measure of the unit `N`-sphere.
pub fn eucl_constant_2(n: f64) -> Result<f64> {
    if !(n.is_finite() && n > 2.0) {
        return Err(Error::domain(format!("eucl_constant_2 needs N > 2, got {n}")));
    }
    let sigma_n = unit_sphere_volume(n + 1.0)?;
    Ok((4.0 / (n * (n - 2.0) * sigma_n.powf(2.0 / n))).sqrt())
}

/// `∫_0^π sin^{N-1}(t) dt`, equal to `σ_N/σ_{N-1}`.
pub fn sine_power_integral(n: f64) -> Result<f64> {
    Ok(unit_sphere_volume(n + 1.0)? / unit_sphere_volume(n)?)
}

/// `sin(x)/x` and `sinh(x)/x` with a series near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// Largest radius allowed by the diameter bound for `K > 0`.
pub fn bonnet_myers_radius(k: f64, n: f64) -> f64 {
    if k > 0.0 {
        PI * ((n - 1.0) / k).sqrt()
    } else {
        f64::INFINITY
    }
}

/// Volume of the radius-`r` ball in the comparison model of curvature `K` and
/// dimension `N`: `σ_{N-1} ∫_0^r |s_{K,N}(t)|^{N-1} dt`.
///
/// The profile is normalised so that `s_{K,N}(t) ~ t` at the origin (for
/// instance `sin(ct)/c` with `c = sqrt(K/(N-1))`), which is what makes the
/// ratio to `ω_N r^N` tend to one.
pub fn comparison_volume(k: f64, n: f64, r: f64) -> Result<f64> {
    let params = CurvatureParams::new(k, n)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be finite and >= 0, got {r}")));
    }
    let limit = bonnet_myers_radius(k, n);
    if r > limit * (1.0 + 1e-14) {
        return Err(Error::domain(format!(
            "radius {r} exceeds the diameter bound {limit} for K = {k}, N = {n}"
        )));
    }
    let r = r.min(limit);
    let omega = unit_ball_volume(params.n)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    if k == 0.0 || n == 1.0 {
        return Ok(omega * r.powf(n));
    }
    let c = (k.abs() / (n - 1.0)).sqrt();
    let ratio = |t: f64| if k > 0.0 { sinc(c * t) } else { sinhc(c * t) };
    // Substituting t = r u^{1/N} turns t^{N-1} dt into (r^N/N) du.
    let integrand = |u: f64| ratio(r * u.powf(1.0 / n)).abs().powf(n - 1.0);
    let res = quadrature::integrate(integrand, 0.0, 1.0, 1e-12, 1e-10);
    if !res.converged {
        return Err(Error::domain(format!(
            "comparison volume quadrature did not converge (K = {k}, N = {n}, r = {r})"
        )));
    }
    Ok(omega * r.powf(n) * res.value)
}

/// Distortion coefficient `σ^{(t)}_{K,N}(θ)`.
///
/// When `Kθ² = 0` the value is `t`, which takes precedence over the
/// infinite branch in the corner case `N = 0`.
pub fn distortion_sigma(t: f64, k: f64, n: f64, theta: f64) -> Extended {
    let k_theta2 = k * theta * theta;
    if k_theta2 == 0.0 {
        return Extended::Finite(t);
    }
    if k_theta2 >= n * PI * PI {
        return Extended::Infinite;
    }
    if k_theta2 > 0.0 {
        let a = theta * (k / n).sqrt();
        return Extended::Finite((t * a).sin() / a.sin());
    }
    if n == 0.0 {
        return Extended::Finite(t);
    }
    let a = theta * (-k / n).sqrt();
    Extended::Finite((t * a).sinh() / a.sinh())
}

/// Distortion coefficient `τ^{(t)}_{K,N}(θ) = t^{1/N} σ^{(t)}_{K,N-1}(θ)^{1-1/N}`;
/// for `N = 1` it is `t` when `K <= 0` and infinite otherwise.
pub fn distortion_tau(t: f64, k: f64, n: f64, theta: f64) -> Extended {
    if n == 1.0 {
        return if k <= 0.0 { Extended::Finite(t) } else { Extended::Infinite };
    }
    match distortion_sigma(t, k, n - 1.0, theta) {
        Extended::Infinite => Extended::Infinite,
        Extended::Finite(s) => Extended::Finite(t.powf(1.0 / n) * s.powf(1.0 - 1.0 / n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_trivial_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-15);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-15);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn volumes_small_dimensions() {
        assert!(rel(unit_ball_volume(2.0).unwrap(), PI) < 1e-15);
        assert!(rel(unit_ball_volume(3.0).unwrap(), 4.0 * PI / 3.0) < 1e-15);
        assert!(rel(unit_sphere_volume(2.0).unwrap(), 2.0 * PI) < 1e-15);
        assert!(rel(unit_sphere_volume(3.0).unwrap(), 4.0 * PI) < 1e-15);
        assert!(rel(unit_sphere_volume(4.0).unwrap(), 2.0 * PI * PI) < 1e-15);
    }

    #[test]
    fn eucl_two_forms_agree() {
        for n in [2.5, 3.0, 4.0, 7.0, 10.0] {
            let a = eucl_constant(n, 2.0).unwrap();
            let b = eucl_constant_2(n).unwrap();
            assert!(rel(a, b) < 1e-12, "N = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn eucl_domain_errors() {
        assert!(eucl_constant(3.0, 3.0).is_err());
        assert!(eucl_constant(3.0, 1.0).is_err());
        assert!(eucl_constant_2(2.0).is_err());
    }

    #[test]
    fn comparison_volume_flat_and_sphere() {
        let v = comparison_volume(0.0, 3.0, 2.0).unwrap();
        assert!(rel(v, 32.0 * PI / 3.0) < 1e-14);
        for n in [2.0, 3.0, 5.5] {
            let v = comparison_volume(n - 1.0, n, PI).unwrap();
            assert!(rel(v, unit_sphere_volume(n + 1.0).unwrap()) < 1e-10);
        }
        assert!(comparison_volume(2.0, 3.0, PI + 1e-3).is_err());
    }

    #[test]
    fn sigma_branches() {
        assert_eq!(distortion_sigma(0.5, 0.0, 3.0, 7.0), Extended::Finite(0.5));
        assert!(distortion_sigma(0.3, 4.0, 4.0, PI).is_infinite());
        let v = distortion_sigma(0.3, 2.0, 4.0, 1.0).finite().unwrap();
        let a = 0.5f64.sqrt();
        assert!(rel(v, (0.3 * a).sin() / a.sin()) < 1e-15);
        let v = distortion_sigma(0.3, -2.0, 4.0, 1.0).finite().unwrap();
        assert!(rel(v, (0.3 * a).sinh() / a.sinh()) < 1e-15);
        assert_eq!(distortion_sigma(0.3, -2.0, 0.0, 1.0), Extended::Finite(0.3));
    }

    #[test]
    fn tau_one_dimensional_cases() {
        assert_eq!(distortion_tau(0.4, -1.0, 1.0, 2.0), Extended::Finite(0.4));
        assert!(distortion_tau(0.4, 1.0, 1.0, 2.0).is_infinite());
        let v = distortion_tau(0.4, 0.0, 3.0, 2.0).finite().unwrap();
        assert!(rel(v, 0.4) < 1e-15);
    }

    #[test]
    fn extended_serializes() {
        assert_eq!(serde_json::to_string(&Extended::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Extended::Finite(0.5)).unwrap(), "0.5");
    }
}
