//! Ball masses and volume densities, perimeters and isoperimetric constants,
//! Brunn–Minkowski and local Sobolev checks on finite metric measure spaces
//! and weighted intervals.

mod brunn;
mod density;
mod discrete;
mod local_sobolev;
mod perimeter;

pub use brunn::{brunn_minkowski_check, BrunnMinkowskiReport, BrunnMinkowskiVerdict, BRUNN_MINKOWSKI_SLACK};
pub use density::{
    avr_estimate, ball_mass, bishop_gromov_ratios, density_profile, AvrEstimate, BallMass, DensityProfile,
    DIVERGENCE_SLOPE, MONOTONE_TOL,
};
pub use discrete::{DiscreteMMS, TRIANGLE_CHECK_LIMIT, TRIANGLE_SLACK};
pub use local_sobolev::{
    local_sobolev_check, local_sobolev_ratio, LocalSobolevParams, LocalSobolevReport, LocalSobolevVerdict,
};
pub use perimeter::{
    isoperimetric_constant, minkowski_content, perimeter_superlevel, superlevel_boundary, IsoperimetricReport,
    MinkowskiReport,
};
