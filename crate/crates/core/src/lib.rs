//! Classifier-independent performance ceilings for binary classification datasets.
//!
//! Everything is computed from the pattern table: the count of positive and negative samples
//! for every distinct feature vector. No model is trained.

pub mod bounds;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod features;
pub mod oracle;
pub mod overlap;
pub mod splits;

pub use error::{Error, Result};
pub use num_rational::Ratio;
