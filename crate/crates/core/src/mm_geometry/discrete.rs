use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_spaces::WeightedGrid;

/// Allowed violation of the triangle inequality.
pub const TRIANGLE_SLACK: f64 = 1e-9;
/// Above this many points the cubic triangle check runs only on request.
pub const TRIANGLE_CHECK_LIMIT: usize = 2000;

/// A finite metric measure space: a distance matrix and point masses.
#[derive(Debug, Clone)]
pub struct DiscreteMMS {
    n_points: usize,
    /// Row-major `n × n` distances.
    distance: Vec<f64>,
    mass: Vec<f64>,
    total_mass: f64,
}

#[derive(Serialize)]
struct MatrixForm<'a> {
    distance: Vec<&'a [f64]>,
    mass: &'a [f64],
}

impl Serialize for DiscreteMMS {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixForm { distance: self.distance.chunks(self.n_points.max(1)).collect(), mass: &self.mass }.serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonForm {
    Matrix { distance: Vec<Vec<f64>>, mass: Vec<f64> },
    Edges { n: usize, edges: Vec<(usize, usize, f64)>, mass: Vec<f64> },
}

impl DiscreteMMS {
    /// Builds a space from a full distance matrix. The triangle inequality is
    /// checked for up to [`TRIANGLE_CHECK_LIMIT`] points.
    pub fn from_matrix(distance: Vec<Vec<f64>>, mass: Vec<f64>) -> Result<Self> {
        let check = distance.len() <= TRIANGLE_CHECK_LIMIT;
        Self::from_matrix_with(distance, mass, check)
    }

    /// As [`DiscreteMMS::from_matrix`], with the triangle check chosen explicitly.
    pub fn from_matrix_with(distance: Vec<Vec<f64>>, mass: Vec<f64>, check_triangle: bool) -> Result<Self> {
        let n = distance.len();
        if n == 0 {
            return Err(Error::input("metric measure space needs at least one point"));
        }
        if distance.iter().any(|row| row.len() != n) {
            return Err(Error::input("distance matrix must be square"));
        }
        let flat: Vec<f64> = distance.into_iter().flatten().collect();
        let space = Self::assemble(n, flat, mass)?;
        space.validate_metric(check_triangle)?;
        Ok(space)
    }

    /// Builds a space from weighted edges; missing distances are completed by
    /// shortest paths. The result is a metric by construction.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], mass: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("metric measure space needs at least one point"));
        }
        let mut d = vec![f64::INFINITY; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::input(format!("edge ({i}, {j}) refers to a point outside 0..{n}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::input(format!("edge ({i}, {j}) has invalid length {w}")));
            }
            if i != j {
                d[i * n + j] = d[i * n + j].min(w);
                d[j * n + i] = d[j * n + i].min(w);
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if dik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let via = dik + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        if d.iter().any(|v| v.is_infinite()) {
            return Err(Error::input("edge graph is disconnected, some distances stay undefined"));
        }
        Self::assemble(n, d, mass)
    }

    /// Nodes of a grid with the interval distance and lumped masses: each
    /// node receives half the mass of each adjacent cell.
    pub fn from_grid(grid: &WeightedGrid) -> Result<Self> {
        let x = grid.nodes();
        let n = x.len();
        let mut mass = vec![0.0; n];
        for (c, m) in grid.cell_mass().iter().enumerate() {
            mass[c] += 0.5 * m;
            mass[c + 1] += 0.5 * m;
        }
        let mut d = Vec::with_capacity(n * n);
        for a in x {
            d.extend(x.iter().map(|b| (a - b).abs()));
        }
        Self::assemble(n, d, mass)
    }

    /// Parses `{"distance": [[..]], "mass": [..]}` or
    /// `{"n": k, "edges": [[i, j, d], ..], "mass": [..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let form: JsonForm =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("metric measure space JSON: {e}")))?;
        match form {
            JsonForm::Matrix { distance, mass } => Self::from_matrix(distance, mass),
            JsonForm::Edges { n, edges, mass } => Self::from_edges(n, &edges, mass),
        }
    }

    fn assemble(n: usize, distance: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != n {
            return Err(Error::input(format!("{} masses given for {n} points", mass.len())));
        }
        if let Some(m) = mass.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::input(format!("point masses must be positive and finite, found {m}")));
        }
        let total_mass = mass.iter().sum();
        Ok(DiscreteMMS { n_points: n, distance, mass, total_mass })
    }

    fn validate_metric(&self, check_triangle: bool) -> Result<()> {
        let n = self.n_points;
        for i in 0..n {
            if self.distance(i, i) != 0.0 {
                return Err(Error::input(format!("distance from point {i} to itself is not zero")));
            }
            for j in 0..n {
                let d = self.distance(i, j);
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::input(format!("distance ({i}, {j}) = {d} is not a non-negative number")));
                }
                if d != self.distance(j, i) {
                    return Err(Error::input(format!("distance matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        if check_triangle {
            for k in 0..n {
                for i in 0..n {
                    let dik = self.distance(i, k);
                    for j in 0..n {
                        if self.distance(i, j) > dik + self.distance(k, j) + TRIANGLE_SLACK {
                            return Err(Error::input(format!(
                                "triangle inequality fails for points ({i}, {k}, {j})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance[i * self.n_points + j]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.distance.iter().cloned().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_matrices() {
        let ok = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(DiscreteMMS::from_matrix(ok.clone(), vec![1.0, 2.0]).is_ok());
        assert!(DiscreteMMS::from_matrix(ok.clone(), vec![1.0, 0.0]).is_err());
        assert!(DiscreteMMS::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]], vec![1.0; 2]).is_err());
        assert!(DiscreteMMS::from_matrix(vec![vec![1.0, 1.0], vec![1.0, 0.0]], vec![1.0; 2]).is_err());
        let broken = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        assert!(DiscreteMMS::from_matrix(broken.clone(), vec![1.0; 3]).is_err());
        assert!(DiscreteMMS::from_matrix_with(broken, vec![1.0; 3], false).is_ok());
    }

    #[test]
    fn edges_complete_by_shortest_paths() {
        let s = DiscreteMMS::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 7.0)], vec![1.0; 3]).unwrap();
        assert_eq!(s.distance(0, 2), 3.0);
        assert!(DiscreteMMS::from_edges(3, &[(0, 1, 1.0)], vec![1.0; 3]).is_err());
    }

    #[test]
    fn json_forms_round_trip() {
        let s = DiscreteMMS::from_json(r#"{"n": 3, "edges": [[0,1,1.0],[1,2,1.5]], "mass": [1,1,2]}"#).unwrap();
        assert_eq!(s.total_mass(), 4.0);
        let text = serde_json::to_string(&s).unwrap();
        let back = DiscreteMMS::from_json(&text).unwrap();
        assert_eq!(back.distance(0, 2), 2.5);
        assert!(DiscreteMMS::from_json("{\"mass\": [1]}").is_err());
    }
}
