//! Subfield codes of perfect nonlinear functions over odd-characteristic
//! finite fields: exact enumeration, closed-form weight distributions,
//! MacWilliams duals, power-moment identities and distance bounds.

pub mod code;
pub mod error;
pub mod field;
pub mod pn;
pub mod quadform;
pub mod report;
pub mod theory;

pub use code::{CodeParams, SubfieldCode, WeightDistribution};
pub use error::{Error, Result};
pub use field::{make_field, Elem, FieldCtx};
pub use pn::{build_pn, Family, PnFunction, PnParams};
pub use report::{emit_report, run_experiment, ExperimentConfig, Report};
