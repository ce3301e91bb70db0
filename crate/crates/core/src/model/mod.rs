//! Bundle data, its JSON form, and the identity checkers.

mod bundle;
mod check;
pub mod json;
mod report;

pub use bundle::{CVBundleData, DEFAULT_JET_DEGREE};
pub use check::{check_harmonic, check_integrable, check_real, full_report};
pub use json::{load, to_json};
pub use report::{CheckReport, IdentityCheck};
