//! Controlled experiments on resampling methods for imbalanced binary
//! classification.
//!
//! The crate generates Gaussian-mixture datasets with independently
//! controlled imbalance ratio, class separability and minority cluster
//! structure, applies the usual resampling methods inside stratified
//! cross-validation, and measures how their benefit over no resampling moves
//! with each data characteristic.

pub mod data;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod learners;
pub mod output;
pub mod profile;
pub mod resample;
pub mod selector;
pub mod stats;
pub mod synth;

pub use data::{class_counts, derive_stream, imbalance_ratio, subsample_class, ClassCounts, Dataset, RngSeed};
pub use error::{Error, Result};
