//! Probabilistic Serial assignment with exact arithmetic, strategic
//! best responses, two-agent equilibria, best-response dynamics and
//! manipulability experiments.
//!
//! Most code is generic over [`Scalar`]; exact results use [`Rational`].

pub mod best_response;
pub mod error;
pub mod experiments;
pub mod format;
pub mod model;
pub mod nash;
pub mod ps;
pub mod relations;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{
    check_utility_consistency, Assignment, ComparisonOutcome, ConsistencyViolation, PreferenceList,
    Profile, UtilityProfile,
};
pub use ps::{run_ps, EatingTrace, Stage};
pub use relations::{dl_compare, eu_compare, eu_value, sd_compare};
pub use scalar::{rat, Rational, Scalar};

pub type RationalAssignment = Assignment<Rational>;
pub type F64Assignment = Assignment<f64>;
pub type F32Assignment = Assignment<f32>;
pub type RationalUtilities = UtilityProfile<Rational>;
pub type F64Utilities = UtilityProfile<f64>;
pub type RationalTrace = EatingTrace<Rational>;
pub type F64Trace = EatingTrace<f64>;
