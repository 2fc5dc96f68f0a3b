//! Parsing of numeric lists, ranges and extended reals from the command line.

use soblab_core::Extended;

use crate::error::{CliError, CliResult};

/// Parses a real or `inf`.
pub fn extended(text: &str) -> Result<Extended, String> {
    match text.trim() {
        "inf" | "+inf" | "infinity" => Ok(Extended::Infinite),
        t => t.parse::<f64>().map(Extended::Finite).map_err(|e| format!("{t:?}: {e}")),
    }
}

/// Parses `lo,hi`.
pub fn interval(text: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok((
            a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?,
            b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?,
        )),
        _ => Err(format!("expected lo,hi, got {text:?}")),
    }
}

/// Inclusive arithmetic range `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn parse(text: &str) -> CliResult<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, s] = parts.as_slice() else {
            return Err(CliError::usage(format!("range must be start:stop:step, got {text:?}")));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| CliError::parse(format!("range bound {t:?}"), e));
        let r = Range { start: num(a)?, stop: num(b)?, step: num(s)? };
        if !(r.step > 0.0 && r.step.is_finite() && r.start.is_finite() && r.stop.is_finite()) {
            return Err(CliError::usage(format!("range step must be positive and bounds finite in {text:?}")));
        }
        Ok(r)
    }

    /// The values `start + k·step` up to `stop`, which is included when it
    /// is hit up to rounding. An empty range is an error.
    pub fn values(&self) -> CliResult<Vec<f64>> {
        if self.stop < self.start {
            return Err(CliError::usage(format!("range {}:{}:{} is empty", self.start, self.stop, self.step)));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| self.start + k as f64 * self.step).collect())
    }
}

/// Comma list of reals, or `a:b:k` for `k` log-spaced values from `a` to `b`.
pub fn radii(text: &str) -> CliResult<Vec<f64>> {
    if let [a, b, k] = text.split(':').collect::<Vec<_>>().as_slice() {
        let lo: f64 = a.trim().parse().map_err(|e| CliError::parse("radius", e))?;
        let hi: f64 = b.trim().parse().map_err(|e| CliError::parse("radius", e))?;
        let k: usize = k.trim().parse().map_err(|e| CliError::parse("radius count", e))?;
        if !(lo > 0.0 && hi > lo && k >= 2) {
            return Err(CliError::usage(format!("log-spaced radii need 0 < a < b and k >= 2, got {text:?}")));
        }
        let ratio = (hi / lo).ln() / (k - 1) as f64;
        return Ok((0..k).map(|i| lo * (ratio * i as f64).exp()).collect());
    }
    list(text)
}

pub fn list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::parse(format!("number {t:?}"), e)))
        .collect()
}
