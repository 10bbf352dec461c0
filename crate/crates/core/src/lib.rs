//! Toolkit for quantifying out-of-distribution generalisation of text-line
//! recognisers.
//!
//! The crate measures how far apart two domains are (character n-gram KL
//! divergence for text, autoencoder reconstruction error for images),
//! evaluates recognition error and calibration from prediction logs, and
//! analyses the resulting metrics table with factor analysis and a
//! label-free OOD error regressor. [`synthgen`] renders deterministic
//! synthetic domains so the whole pipeline can be exercised without real
//! datasets.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below pin the common instantiations.

pub mod analysis;
pub mod corpus;
pub mod errmetrics;
pub mod heatmap;
pub mod linalg;
mod scalar;
pub mod synthgen;
pub mod textdiv;
pub mod visdiv;

pub use scalar::Scalar;

/// Double-precision matrix, used by the analysis code.
pub type Matrix64 = linalg::Matrix<f64>;
/// Image type used by the autoencoder pipeline.
pub type Image32 = corpus::GrayImage<f32>;
pub type Image64 = corpus::GrayImage<f64>;
/// Autoencoder parameters as stored on disk.
pub type AeParams32 = visdiv::AeParams<f32>;
pub type AeParams64 = visdiv::AeParams<f64>;
pub type MetricsTable64 = analysis::MetricsTable<f64>;
pub type PredictionRecord64 = errmetrics::PredictionRecord<f64>;
