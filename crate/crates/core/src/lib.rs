//! Toolkit for predicting mutual performance interference of applications
//! co-located on a shared physical machine.
//!
//! Co-located applications contend for shared, non-sliceable resources —
//! the last-level cache, main memory, and the hypervisor's virtual network.
//! This crate models an application as its per-resource access rates,
//! normalizes those rates to scores against a calibration machine, and
//! predicts the interference level of a co-location from accumulated access
//! and access-burden similarity. It also regenerates the regression model
//! from an interference dataset, and bundles a configurable synthetic
//! stressor for producing such datasets.
//!
//! Module map:
//! - [`resource`], [`profile`], [`colocation`]: the definitional math —
//!   access aggregation, score normalization, slowdown, interference level,
//!   similarity factors.
//! - [`model`]: the three-term prediction model and its default
//!   coefficients.
//! - [`regression`]: no-intercept least squares plus the diagnostic battery
//!   (significance tests, residual checks).
//! - [`stressor`]: the synthetic application template with software-counted
//!   activity.
//! - [`dataset`]: co-execution orchestration, the deterministic contention
//!   oracle, and dataset generation.
//! - [`io`]: the JSON/CSV file formats shared with the CLI.

pub mod colocation;
pub mod dataset;
pub mod error;
pub mod io;
pub mod model;
pub mod profile;
pub mod regression;
pub mod resource;
pub mod stressor;

mod serde_util;

pub use colocation::{
    accumulated_access, interference_level, similarity_factor, CoLocation, SlowdownObservation,
};
pub use error::{Error, Result};
pub use model::{features, prediction_error, FeatureRow, InterferenceModel};
pub use profile::{application_access, ApplicationProfile, ScoredProfile};
pub use resource::{normalize, CalibrationMaxima, ResourceKind, ResourceVector, Rounding, Units};
