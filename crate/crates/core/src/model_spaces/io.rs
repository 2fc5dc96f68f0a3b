//! Reading and writing sampled functions and tabulated densities.
//!
//! Functions use either a two-column CSV `node,value` or JSON
//! `{"nodes": [...], "values": [...]}`; the nodes in a file must coincide
//! with the grid nodes to 1e-12.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::function::SampledFunction;
use super::grid::WeightedGrid;

const NODE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Serialize, Deserialize)]
struct NodeValues {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

/// Parses two-column CSV text; a non-numeric first row is treated as a header.
pub fn parse_two_columns(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!("row {}: expected 2 columns, found {}", i + 1, rec.len())));
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if i == 0 => continue,
            _ => return Err(Error::Parse(format!("row {}: non-numeric entry", i + 1))),
        }
    }
    Ok((xs, ys))
}

fn match_nodes(grid: &WeightedGrid, nodes: &[f64]) -> Result<()> {
    if nodes.len() != grid.len() {
        return Err(Error::input(format!(
            "file has {} nodes but the grid has {}",
            nodes.len(),
            grid.len()
        )));
    }
    for (i, (a, b)) in nodes.iter().zip(grid.nodes()).enumerate() {
        if (a - b).abs() > NODE_TOLERANCE * b.abs().max(1.0) {
            return Err(Error::input(format!("node {i} is {a}, grid node is {b}")));
        }
    }
    Ok(())
}

/// Function from CSV text `node,value` on the given grid.
pub fn function_from_csv(grid: Arc<WeightedGrid>, text: &str) -> Result<SampledFunction> {
    let (nodes, values) = parse_two_columns(text)?;
    match_nodes(&grid, &nodes)?;
    SampledFunction::new(grid, values)
}

/// Function from JSON text `{"nodes": [...], "values": [...]}`.
pub fn function_from_json(grid: Arc<WeightedGrid>, text: &str) -> Result<SampledFunction> {
    let nv: NodeValues = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if nv.nodes.len() != nv.values.len() {
        return Err(Error::input("nodes and values have different lengths"));
    }
    match_nodes(&grid, &nv.nodes)?;
    SampledFunction::new(grid, nv.values)
}

/// Reads a function file, choosing the format from the extension
/// (`.json` is JSON, anything else CSV).
pub fn read_function(grid: Arc<WeightedGrid>, path: &Path) -> Result<SampledFunction> {
    let text = std::fs::read_to_string(path)?;
    if is_json(path) {
        function_from_json(grid, &text)
    } else {
        function_from_csv(grid, &text)
    }
}

/// Reads only the node column of a function file.
pub fn read_nodes(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    if is_json(path) {
        let nv: NodeValues = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(nv.nodes)
    } else {
        Ok(parse_two_columns(&text)?.0)
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn function_to_csv(u: &SampledFunction) -> String {
    let mut out = String::from("node,value\n");
    for (x, v) in u.grid().nodes().iter().zip(u.values()) {
        out.push_str(&format!("{x:e},{v:e}\n"));
    }
    out
}

pub fn function_to_json(u: &SampledFunction) -> String {
    let nv = NodeValues { nodes: u.grid().nodes().to_vec(), values: u.values().to_vec() };
    serde_json::to_string(&nv).expect("finite floats serialize")
}

/// Writes a function, choosing the format from the extension.
pub fn write_function(u: &SampledFunction, path: &Path) -> Result<()> {
    let text = if is_json(path) { function_to_json(u) } else { function_to_csv(u) };
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a tabulated density `node,weight` (CSV or JSON with `values`).
pub fn read_density_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    if is_json(path) {
        let nv: NodeValues = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok((nv.nodes, nv.values))
    } else {
        parse_two_columns(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<WeightedGrid> {
        Arc::new(WeightedGrid::sphere_model(3.0, 33).unwrap())
    }

    #[test]
    fn csv_round_trip() {
        let u = SampledFunction::from_fn(grid(), |t| t.cos() + 0.1).unwrap();
        let back = function_from_csv(grid(), &function_to_csv(&u)).unwrap();
        assert_eq!(back.values(), u.values());
    }

    #[test]
    fn json_round_trip() {
        let u = SampledFunction::from_fn(grid(), |t| t * t).unwrap();
        let back = function_from_json(grid(), &function_to_json(&u)).unwrap();
        assert_eq!(back.values(), u.values());
    }

    #[test]
    fn mismatched_nodes_rejected() {
        let g = grid();
        let mut text = String::from("node,value\n");
        for (i, x) in g.nodes().iter().enumerate() {
            let x = if i == 5 { x + 1e-9 } else { *x };
            text.push_str(&format!("{x:e},1\n"));
        }
        assert!(matches!(function_from_csv(g, &text), Err(Error::Input(_))));
    }

    #[test]
    fn garbage_is_a_parse_error() {
        assert!(matches!(function_from_csv(grid(), "node,value\n1,abc\n"), Err(Error::Parse(_))));
        assert!(matches!(function_from_json(grid(), "{"), Err(Error::Parse(_))));
    }
}
