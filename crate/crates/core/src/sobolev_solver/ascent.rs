//! Preconditioned line-search ascent shared by the Sobolev and Yamabe
//! optimizers.

use serde::Serialize;

use crate::linalg::{dot, Tridiagonal};

/// Why an optimization run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Gradient norm fell below the tolerance.
    Converged,
    MaxIterations,
    /// No relative progress above the stall threshold over the stall window.
    Stalled,
    /// The iterates approached a constant, where the quotient is undefined.
    NearConstant,
    /// Backtracking could not find an improving step.
    LineSearchFailed,
}

impl StopReason {
    /// Whether the run met its convergence criterion.
    pub fn is_converged(self) -> bool {
        self == StopReason::Converged
    }
}

/// Step length strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    /// Armijo backtracking refined by quadratic interpolation; the trial
    /// step doubles after each accepted step.
    Armijo { initial: f64, sufficient_decrease: f64 },
    /// Constant step, halved only when it fails to improve.
    Fixed { step: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Armijo { initial: 1.0, sufficient_decrease: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AscentSettings {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub step_rule: StepRule,
    pub stall_window: usize,
    pub stall_rel: f64,
    pub maximize: bool,
}

/// Objective seen by the engine. `evaluate` first maps a raw point back to
/// the constraint set in place and then returns its value, or `None` on
/// points that must be avoided (near-constants).
pub(crate) trait Objective {
    fn evaluate(&self, x: &mut [f64]) -> Option<f64>;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Optional problem-specific move, kept only when it improves the value.
    fn extra_move(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// Iterations between retries of a rejected extra move.
const EXTRA_MOVE_PERIOD: usize = 20;

#[derive(Debug, Clone)]
pub(crate) struct AscentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub trace: Vec<f64>,
    pub stop: StopReason,
}

const MAX_BACKTRACKS: usize = 60;

/// Runs the ascent (or descent) from an admissible `x0`.
///
/// Directions are gradients mapped through `precond⁻¹`, so steps are
/// measured in the `H¹` geometry; the reported gradient norm is the matching
/// dual norm `√(gᵀ P⁻¹ g)`.
pub(crate) fn run<O: Objective>(obj: &O, precond: &Tridiagonal, x0: Vec<f64>, s: &AscentSettings) -> AscentOutcome {
    let sign = if s.maximize { 1.0 } else { -1.0 };
    let mut x = x0;
    let mut f = obj.evaluate(&mut x).expect("start point must be admissible");
    let mut trace = vec![f];
    let (mut alpha, c1, fixed) = match s.step_rule {
        StepRule::Armijo { initial, sufficient_decrease } => (initial, sufficient_decrease, false),
        StepRule::Fixed { step } => (step, 0.0, true),
    };
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;
    let mut stop = StopReason::MaxIterations;
    let mut anchor = f;
    let mut extra_ok = true;

    while iterations < s.max_iter {
        let g = obj.gradient(&x);
        let d = precond.solve(&g);
        let slope = dot(&g, &d);
        grad_norm = slope.max(0.0).sqrt();
        if grad_norm <= s.grad_tol {
            stop = StopReason::Converged;
            break;
        }
        let trial_at = |t: f64| {
            let mut y: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + sign * t * di).collect();
            let v = obj.evaluate(&mut y);
            (y, v)
        };
        // maximizer of the quadratic through f, the slope and the gain at t
        let fitted = |t: f64, gain: f64| {
            let curv = slope * t - gain;
            (curv > 0.0).then(|| slope * t * t / (2.0 * curv))
        };
        let mut accepted = None;
        let mut saw_invalid = false;
        let mut step = alpha;
        for _ in 0..MAX_BACKTRACKS {
            let (trial, value) = trial_at(step);
            let gain = match value {
                Some(ft) => sign * (ft - f),
                None => {
                    saw_invalid = true;
                    step *= 0.5;
                    continue;
                }
            };
            if gain >= c1 * step * slope && (!fixed || gain >= 0.0) {
                accepted = Some((trial, value.unwrap_or(f), step));
                if !fixed {
                    // a long accepted step may straddle the line maximum
                    if let Some(t) = fitted(step, gain).filter(|t| *t < 0.5 * step) {
                        if let (y, Some(fy)) = trial_at(t) {
                            if sign * (fy - f) > gain {
                                accepted = Some((y, fy, t));
                            }
                        }
                    }
                }
                break;
            }
            step = if fixed {
                0.5 * step
            } else {
                fitted(step, gain).unwrap_or(0.5 * step).clamp(0.1 * step, 0.5 * step)
            };
        }
        let Some((xn, fnew, step)) = accepted else {
            stop = if saw_invalid { StopReason::NearConstant } else { StopReason::LineSearchFailed };
            break;
        };
        alpha = if fixed { step } else { 2.0 * step };
        x = xn;
        f = fnew;
        if extra_ok || iterations % EXTRA_MOVE_PERIOD == 0 {
            extra_ok = false;
            if let Some(mut y) = obj.extra_move(&x) {
                if let Some(fy) = obj.evaluate(&mut y) {
                    if sign * (fy - f) > 0.0 {
                        x = y;
                        f = fy;
                        extra_ok = true;
                    }
                }
            }
        }
        trace.push(f);
        iterations += 1;
        if iterations % s.stall_window == 0 {
            if sign * (f - anchor) <= s.stall_rel * f.abs().max(1e-300) {
                stop = StopReason::Stalled;
                break;
            }
            anchor = f;
        }
    }
    AscentOutcome { x, value: f, iterations, grad_norm, trace, stop }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rayleigh quotient `xᵀBx/xᵀx` with a diagonal B, on the unit sphere.
    struct Rayleigh(Vec<f64>);

    impl Rayleigh {
        fn value(&self, x: &[f64]) -> f64 {
            x.iter().zip(&self.0).map(|(x, b)| b * x * x).sum::<f64>() / dot(x, x)
        }
    }

    impl Objective for Rayleigh {
        fn evaluate(&self, x: &mut [f64]) -> Option<f64> {
            let n = dot(x, x).sqrt();
            x.iter_mut().for_each(|v| *v /= n);
            Some(self.value(x))
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            let r = self.value(x);
            let n = dot(x, x);
            x.iter().zip(&self.0).map(|(x, b)| 2.0 * (b - r) * x / n).collect()
        }
    }

    fn identity(n: usize) -> Tridiagonal {
        Tridiagonal::new(vec![1.0; n], vec![0.0; n - 1])
    }

    fn settings(maximize: bool) -> AscentSettings {
        AscentSettings {
            max_iter: 2000,
            grad_tol: 1e-6,
            step_rule: StepRule::default(),
            stall_window: 100,
            stall_rel: 0.0,
            maximize,
        }
    }

    #[test]
    fn finds_extreme_eigenvalues_monotonically() {
        let b = vec![1.0, 2.0, 3.0, 5.0];
        let obj = Rayleigh(b);
        let x0 = vec![0.5; 4];
        let up = run(&obj, &identity(4), x0.clone(), &settings(true));
        assert_eq!(up.stop, StopReason::Converged);
        assert!((up.value - 5.0).abs() < 1e-12);
        assert!(up.trace.windows(2).all(|w| w[1] >= w[0]));
        let down = run(&obj, &identity(4), x0, &settings(false));
        assert!((down.value - 1.0).abs() < 1e-12);
        assert!(down.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let obj = Rayleigh(vec![1.0, 1.0 + 1e-3]);
        let mut s = settings(true);
        s.max_iter = 1;
        s.step_rule = StepRule::Fixed { step: 1e-6 };
        let out = run(&obj, &identity(2), vec![0.8, 0.6], &s);
        assert_eq!(out.stop, StopReason::MaxIterations);
        assert_eq!(out.iterations, 1);
    }
}
