//! Whitney decompositions, Triebel-Lizorkin and refined-localization norms,
//! and Hardy-type functionals on `R^n \ R^l`.

pub mod decomposition;
pub mod discretize;
pub mod error;
pub mod geometry;
pub mod hardy;
pub mod profile;
pub mod spaces;
pub mod whitney;

pub use error::{Error, Result};
pub use geometry::{
    classify_criticality, CriticalityClass, MultiIndex, PlaneSplit, SmoothnessParams,
};
