//! Concert planning toolkit: ticket-price regression and city-class
//! location classification built from scratch.
//!
//! The pipeline runs impute → dummies → log → min-max → (PCA) → model, with
//! k-means city classes, six model families, hyperparameter search and a
//! benchmark report. Fitted pipelines travel as a single JSON [`bundle`]
//! that the CLI and HTTP service load.

pub mod bundle;
pub mod cli;
pub mod city_cluster;
pub mod data_model;
pub mod error;
pub mod evaluation;
pub mod forest;
pub mod kernel_machines;
pub mod linear_models;
pub mod mlp;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod service;
pub mod tuning;

pub use error::{Error, Result};
