//! Document-classification benchmarking toolkit.
//!
//! Bag-of-words preprocessing, eight text classifiers behind one fit/score
//! contract, hyperparameter search, and a seeded evaluation harness with
//! paired signed-rank tests and false-discovery-rate adjustment.

pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod models;
pub mod neural;
pub mod seed;
pub mod stats;
pub mod textprep;
pub mod tuning;

pub use error::{Error, Result};
