//! Sobolev ratios, spectral gaps, optimization of the tight Sobolev
//! constant and checks of the Euclidean and linearized inequalities.

pub(crate) mod ascent;
mod bliss;
mod checks;
mod optimize;
mod quotient;
mod spectral;

pub use ascent::{StepRule, StopReason};
pub use checks::{
    alpha_p_value, avr_lower_bound_from_sobolev, linearization_check, tight_sobolev_check, LinearizationReport,
    TightCheckReport, TIGHT_CHECK_SLACK,
};
pub use bliss::{bliss_quotient, bliss_report, BlissReport, BLISS_TAIL_TOL};
pub use optimize::{optimize_aopt, AoptOptions, QuotientReport, RestartSummary, StartKind, NEAR_CONSTANT_ENERGY};
pub use quotient::{sobolev_quotient, MASS_TOL, MIN_ENERGY};
pub(crate) use quotient::{check_unit_mass, numerator};
pub(crate) use spectral::pencil;
pub use spectral::{spectral_gap, SpectralGapResult};
