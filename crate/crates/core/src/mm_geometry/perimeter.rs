use serde::Serialize;

use crate::constants::Dimension;
use crate::error::{Error, Result};
use crate::model_spaces::{SampledFunction, WeightedGrid};

use super::discrete::DiscreteMMS;

/// Boundary points of `{u > t}` inside the open domain.
///
/// Every boundary point must be a transversal crossing; a cell where `u ≡ t`
/// or a node where `u` touches `t` without crossing makes `t` non-regular.
/// Domain endpoints never count as boundary.
pub fn superlevel_boundary(u: &SampledFunction, t: f64) -> Result<Vec<f64>> {
    if !t.is_finite() {
        return Err(Error::domain(format!("level must be finite, got {t}")));
    }
    let x = u.grid().nodes();
    let v = u.values();
    let sign = |a: f64| (a - t).partial_cmp(&0.0).map_or(0, |o| o as i32);
    let s: Vec<i32> = v.iter().map(|&a| sign(a)).collect();
    let last = s.len() - 1;
    let mut points = Vec::new();
    for c in 0..last {
        if s[c] == 0 && s[c + 1] == 0 {
            return Err(Error::input(format!("level {t} is attained on the plateau [{}, {}]", x[c], x[c + 1])));
        }
        if s[c] * s[c + 1] < 0 {
            let l = (t - v[c]) / (v[c + 1] - v[c]);
            points.push(x[c] + l * (x[c + 1] - x[c]));
        }
    }
    for i in 1..last {
        if s[i] == 0 {
            if s[i - 1] * s[i + 1] < 0 {
                points.push(x[i]);
            } else {
                return Err(Error::input(format!("u touches level {t} at {} without crossing it", x[i])));
            }
        }
    }
    points.sort_by(f64::total_cmp);
    Ok(points)
}

/// Perimeter of `{u > t}`: the density summed over its boundary points.
pub fn perimeter_superlevel(u: &SampledFunction, t: f64) -> Result<f64> {
    let grid = u.grid();
    Ok(superlevel_boundary(u, t)?.iter().map(|&s| grid.density(s)).sum())
}

/// Difference quotients `(m(E^δ) − m(E))/δ` of a point set's enlargements.
#[derive(Debug, Clone, Serialize)]
pub struct MinkowskiReport {
    pub deltas: Vec<f64>,
    pub estimates: Vec<f64>,
    /// Smallest estimate, standing in for the lower limit.
    pub content: f64,
}

/// Outer Minkowski content of `set` with `E^δ = {y : d(y, E) < δ}`.
pub fn minkowski_content(space: &DiscreteMMS, set: &[usize], deltas: &[f64]) -> Result<MinkowskiReport> {
    if set.is_empty() {
        return Err(Error::input("Minkowski content needs a nonempty set"));
    }
    if let Some(i) = set.iter().find(|&&i| i >= space.len()) {
        return Err(Error::input(format!("point {i} is not in the space")));
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::input("enlargement radii must be positive and finite"));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::input("enlargement radii must be strictly decreasing"));
    }
    let dist_to_set: Vec<f64> =
        (0..space.len()).map(|j| set.iter().map(|&i| space.distance(i, j)).fold(f64::INFINITY, f64::min)).collect();
    let base: f64 = dist_to_set.iter().zip(space.mass()).filter(|(d, _)| **d == 0.0).map(|(_, m)| m).sum();
    let estimates: Vec<f64> = deltas
        .iter()
        .map(|&delta| {
            let grown: f64 = dist_to_set.iter().zip(space.mass()).filter(|(d, _)| **d < delta).map(|(_, m)| m).sum();
            (grown - base) / delta
        })
        .collect();
    let content = estimates.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(MinkowskiReport { deltas: deltas.to_vec(), estimates, content })
}

/// Candidate endpoints used by the single-interval scan.
const SCAN_POINTS: usize = 401;
/// Candidate endpoints used by the two-interval scan.
const PAIR_SCAN_POINTS: usize = 41;

#[derive(Debug, Clone, Serialize)]
pub struct IsoperimetricReport {
    pub region: (f64, f64),
    pub n: f64,
    /// Smallest `Per(E)/m(E)^{(N-1)/N}` over single intervals `E`.
    pub single_interval: f64,
    pub single_minimizer: (f64, f64),
    /// Smallest ratio over unions of two disjoint intervals on a coarser set
    /// of endpoints; a heuristic upper bound.
    pub two_interval: Option<f64>,
    pub two_minimizer: Option<[(f64, f64); 2]>,
    /// The smaller of the two scans.
    pub c_isop: f64,
}

/// Up to `k` points of `[a, b]`: both ends plus evenly chosen grid nodes.
fn candidates(grid: &WeightedGrid, a: f64, b: f64, k: usize) -> Vec<f64> {
    let inner: Vec<f64> = grid.nodes().iter().cloned().filter(|&t| t > a && t < b).collect();
    let mut pts = vec![a];
    if inner.len() + 2 <= k {
        pts.extend(&inner);
    } else {
        let m = k - 2;
        pts.extend((0..m).map(|i| inner[(i * (inner.len() - 1)) / (m - 1).max(1)]));
        pts.dedup();
    }
    pts.push(b);
    pts
}

/// Empirical isoperimetric constant of a region: the infimum of
/// `Per(E)/m(E)^{(N-1)/N}` over intervals `E` inside it, plus a coarser scan
/// over unions of two intervals.
pub fn isoperimetric_constant(grid: &WeightedGrid, region: (f64, f64), n: f64) -> Result<IsoperimetricReport> {
    let n = Dimension::new(n)?.value();
    let (a, b) = region;
    if !(a < b && a >= grid.left() && b <= grid.right()) {
        return Err(Error::input(format!(
            "region [{a}, {b}] must be a nondegenerate sub-interval of [{}, {}]",
            grid.left(),
            grid.right()
        )));
    }
    let expo = (n - 1.0) / n;
    let boundary = |s: f64| if s > grid.left() && s < grid.right() { grid.density(s) } else { 0.0 };

    let pts = candidates(grid, a, b, SCAN_POINTS);
    let cum: Vec<f64> = pts.iter().map(|&s| grid.mass_up_to(s)).collect();
    let per: Vec<f64> = pts.iter().map(|&s| boundary(s)).collect();
    let mut best = (f64::INFINITY, (a, b));
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let m = cum[j] - cum[i];
            if m > 0.0 {
                let ratio = (per[i] + per[j]) / m.powf(expo);
                if ratio < best.0 {
                    best = (ratio, (pts[i], pts[j]));
                }
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::input(format!("no interval of positive mass inside [{a}, {b}]")));
    }

    let pts = candidates(grid, a, b, PAIR_SCAN_POINTS);
    let cum: Vec<f64> = pts.iter().map(|&s| grid.mass_up_to(s)).collect();
    let per: Vec<f64> = pts.iter().map(|&s| boundary(s)).collect();
    let k = pts.len();
    let mut pair: Option<(f64, [(f64, f64); 2])> = None;
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                for h in l + 1..k {
                    let m = cum[j] - cum[i] + cum[h] - cum[l];
                    if m > 0.0 {
                        let ratio = (per[i] + per[j] + per[l] + per[h]) / m.powf(expo);
                        if pair.is_none_or(|p| ratio < p.0) {
                            pair = Some((ratio, [(pts[i], pts[j]), (pts[l], pts[h])]));
                        }
                    }
                }
            }
        }
    }
    let two = pair.map(|p| p.0);
    Ok(IsoperimetricReport {
        region,
        n,
        single_interval: best.0,
        single_minimizer: best.1,
        two_interval: two,
        two_minimizer: pair.map(|p| p.1),
        c_isop: two.map_or(best.0, |t| t.min(best.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn plateaus_and_touching_levels_are_rejected() {
        let g = Arc::new(WeightedGrid::uniform(0.0, 4.0, 5).unwrap());
        let u = SampledFunction::new(g.clone(), vec![0.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(perimeter_superlevel(&u, 1.0).is_err());
        let u = SampledFunction::new(g.clone(), vec![0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        assert!(perimeter_superlevel(&u, 2.0).is_err());
        assert_eq!(superlevel_boundary(&u, 1.0).unwrap(), vec![1.0, 3.0]);
        assert_eq!(superlevel_boundary(&u, 0.5).unwrap(), vec![0.5, 3.5]);
    }

    #[test]
    fn minkowski_preconditions() {
        let s = DiscreteMMS::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).unwrap();
        assert!(minkowski_content(&s, &[], &[1.0]).is_err());
        assert!(minkowski_content(&s, &[0], &[0.5, 1.0]).is_err());
        assert!(minkowski_content(&s, &[5], &[1.0]).is_err());
        let r = minkowski_content(&s, &[0], &[2.0, 0.5]).unwrap();
        assert_eq!(r.estimates, vec![0.5, 0.0]);
        assert_eq!(r.content, 0.0);
    }

    #[test]
    fn candidate_sets_keep_region_ends() {
        let g = WeightedGrid::uniform(0.0, 1.0, 1001).unwrap();
        let c = candidates(&g, 0.1, 0.9, 41);
        assert_eq!(c.len(), 41);
        assert_eq!((c[0], c[40]), (0.1, 0.9));
        assert!(c.windows(2).all(|w| w[1] > w[0]));
    }
}
