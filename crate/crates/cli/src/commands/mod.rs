mod analysis;
mod basic;
mod functions;
mod geometry;
mod solver;
mod sweep;

use clap::Subcommand;
use serde::Serialize;

use crate::error::CliResult;
use crate::output::Outcome;

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Ball and sphere volumes, Eucl(N, p) and related constants.
    Constants(basic::ConstantsArgs),
    /// Build a weighted grid and print its nodes, weights and cell masses.
    Model(basic::ModelArgs),
    /// Monotone rearrangement of a function file, with a Pólya–Szegő check.
    Rearrange(functions::RearrangeArgs),
    /// Sobolev ratio (‖u‖²_q − ‖u‖²_2)/‖u'‖²_2 of a function file.
    Quotient(functions::QuotientArgs),
    /// First non-trivial Neumann eigenvalue of the grid.
    SpectralGap(solver::SpectralGapArgs),
    /// Lower bound for the optimal tight Sobolev constant by multi-start ascent.
    Aopt(solver::AoptArgs),
    /// Sobolev quotient of the Bliss extremal on a truncated cone.
    Bliss(basic::BlissArgs),
    /// Leading constant α_p of the loose Sobolev inequality from min θ.
    AlphaP(basic::AlphaPArgs),
    /// Second-order expansion of the Sobolev ratio around constants.
    Linearize(functions::LinearizeArgs),
    /// Search for violations of a tight Sobolev inequality with a given A.
    TightCheck(solver::TightCheckArgs),
    /// Volume ratios θ_{N,r} about a point of a grid or a discrete space.
    Density(geometry::DensityArgs),
    /// Asymptotic volume ratio of an unbounded model.
    Avr(geometry::AvrArgs),
    /// Empirical isoperimetric constant of a region.
    Isop(geometry::IsopArgs),
    /// Brunn–Minkowski inequality with distortion coefficients for two intervals.
    BrunnMinkowski(geometry::BrunnMinkowskiArgs),
    /// Almost-Euclidean Sobolev inequality on a small ball.
    LocalSobolev(geometry::LocalSobolevArgs),
    /// Classify a sequence of functions: limit, constant limit or concentration.
    ConcentrationScan(analysis::ConcentrationArgs),
    /// Generalized Yamabe constant of a potential on a grid.
    Yamabe(analysis::YamabeArgs),
    /// Evaluate a quantity over one ranged parameter and emit CSV.
    Sweep(sweep::SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Model(_) => "model",
            Command::Rearrange(_) => "rearrange",
            Command::Quotient(_) => "quotient",
            Command::SpectralGap(_) => "spectral-gap",
            Command::Aopt(_) => "aopt",
            Command::Bliss(_) => "bliss",
            Command::AlphaP(_) => "alpha-p",
            Command::Linearize(_) => "linearize",
            Command::TightCheck(_) => "tight-check",
            Command::Density(_) => "density",
            Command::Avr(_) => "avr",
            Command::Isop(_) => "isop",
            Command::BrunnMinkowski(_) => "brunn-minkowski",
            Command::LocalSobolev(_) => "local-sobolev",
            Command::ConcentrationScan(_) => "concentration-scan",
            Command::Yamabe(_) => "yamabe",
            Command::Sweep(_) => "sweep",
        }
    }

    pub fn run(&self) -> CliResult<Outcome> {
        match self {
            Command::Constants(a) => basic::constants(a),
            Command::Model(a) => basic::model(a),
            Command::Rearrange(a) => functions::rearrange(a),
            Command::Quotient(a) => functions::quotient(a),
            Command::SpectralGap(a) => solver::spectral_gap(a),
            Command::Aopt(a) => solver::aopt(a),
            Command::Bliss(a) => basic::bliss(a),
            Command::AlphaP(a) => basic::alpha_p(a),
            Command::Linearize(a) => functions::linearize(a),
            Command::TightCheck(a) => solver::tight_check(a),
            Command::Density(a) => geometry::density(a),
            Command::Avr(a) => geometry::avr(a),
            Command::Isop(a) => geometry::isop(a),
            Command::BrunnMinkowski(a) => geometry::brunn_minkowski(a),
            Command::LocalSobolev(a) => geometry::local_sobolev(a),
            Command::ConcentrationScan(a) => analysis::concentration_scan(a),
            Command::Yamabe(a) => analysis::yamabe(a),
            Command::Sweep(a) => sweep::sweep(a),
        }
    }
}
