//! Bayes-optimal multilabel prediction with partial abstention.
//!
//! A multilabel classifier over `m` labels normally commits to a full binary
//! vector. This crate lets it abstain on individual labels instead: given the
//! per-label relevance probabilities of an instance, the minimizers in
//! [`hamming`], [`rank`] and [`fmeasure`] return the prediction that is
//! optimal in expectation for the corresponding loss extended by an additive
//! abstention penalty.
//!
//! The [`oracle`] module provides brute-force counterparts that enumerate
//! every candidate prediction at small `m`; they are the ground truth the
//! fast minimizers are tested against. [`trainer`], [`data`] and [`sweep`]
//! supply the experiment harness: binary-relevance logistic regression,
//! dataset handling and cross-validated cost sweeps.
//!
//! With the default `parallel` feature, batch operations, the brute-force
//! enumerations and the sweep harness distribute work with rayon; disabling
//! the feature compiles a sequential fallback with identical results.

pub mod data;
pub mod error;
pub mod fmeasure;
pub mod hamming;
pub mod loss;
pub mod oracle;
mod par;
pub mod penalty;
pub mod rank;
pub mod sweep;
pub mod trainer;
pub mod types;

pub use error::{Error, Result};
pub use penalty::PenaltySpec;
pub use types::{
    GroundTruth, LabelPrediction, LossKind, MarginalVector, PartialLabeling, PartialRanking,
};
