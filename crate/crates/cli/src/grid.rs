use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use soblab_core::model_spaces::{io, SampledFunction, WeightedGrid};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `[0, π]` with normalized weight `sin^{N-1}`.
    Sphere,
    /// `[0, r_max]` with weight `σ_{N-1} t^{N-1}`.
    Cone,
    /// `[0, r_max]` with constant weight `1/r_max`.
    Uniform,
    /// Tabulated `node,weight` file given by `--density`.
    Custom,
}

/// How to build the weighted interval a command works on.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    #[arg(long, value_enum, default_value_t = ModelKind::Sphere)]
    pub model: ModelKind,
    /// Dimension parameter N.
    #[arg(long = "N", default_value_t = 3.0)]
    #[serde(rename = "N")]
    pub n: f64,
    #[arg(long, default_value_t = 1024)]
    pub nodes: usize,
    /// Right end of cone and uniform models.
    #[arg(long, default_value_t = 1.0)]
    pub r_max: f64,
    /// Density table for the custom model (CSV `node,weight` or JSON).
    #[arg(long)]
    pub density: Option<PathBuf>,
    /// Rescale the measure to total mass one.
    #[arg(long)]
    pub normalize: bool,
    /// Mark a custom grid as a truncated half-line.
    #[arg(long)]
    pub unbounded: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            model: ModelKind::Sphere,
            n: 3.0,
            nodes: 1024,
            r_max: 1.0,
            density: None,
            normalize: false,
            unbounded: false,
        }
    }
}

impl GridSpec {
    /// Builds the grid; relative density paths are taken from `base`.
    pub fn build_in(&self, base: Option<&Path>) -> CliResult<WeightedGrid> {
        let grid = match self.model {
            ModelKind::Sphere => WeightedGrid::sphere_model(self.n, self.nodes)?,
            ModelKind::Cone => WeightedGrid::cone_model(self.n, self.r_max, self.nodes)?,
            ModelKind::Uniform => WeightedGrid::uniform(0.0, self.r_max, self.nodes)?,
            ModelKind::Custom => {
                let path = self
                    .density
                    .as_ref()
                    .ok_or_else(|| CliError::usage("the custom model needs --density"))?;
                let (nodes, weights) = io::read_density_table(&resolve(base, path))?;
                WeightedGrid::from_samples(nodes, weights, self.unbounded)?
            }
        };
        Ok(if self.normalize { grid.normalized() } else { grid })
    }

    pub fn build(&self) -> CliResult<WeightedGrid> {
        self.build_in(None)
    }
}

pub fn resolve(base: Option<&Path>, path: &Path) -> PathBuf {
    match base {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Reads a function file whose nodes must match the grid.
pub fn read_function(grid: &Arc<WeightedGrid>, path: &Path) -> CliResult<SampledFunction> {
    Ok(io::read_function(grid.clone(), path)?)
}
