//! Cross-survey predictive knowledge transfer at desk scale.
//!
//! Two harmonized survey datasets share demographic and ideological features
//! but differ in which outcome questions they carry. This crate provides the
//! full workflow for moving predictive knowledge between them:
//!
//! - [`data`]: schema-validated ingestion, recoding, min-max normalization,
//!   case-wise deletion, schema alignment, seeded splits, and descriptive
//!   statistics.
//! - [`synth`]: a synthetic-data generator calibrated to published summary
//!   tables, with a brute-force Bayes-accuracy oracle so every downstream
//!   claim is checkable without licensed microdata.
//! - [`linear`]: OLS with classical inference and the coefficient-consistency
//!   comparison used as the transfer baseline.
//! - [`nn`]: a from-scratch multi-head feed-forward network with per-layer
//!   freeze flags, exact backpropagation, and deterministic seeded training.
//! - [`pipeline`]: pre-train on the source survey, freeze-and-fine-tune on
//!   the target, evaluate on held-out rows, and impute missing outcomes.
//! - [`metrics`]: confusion-matrix and regression metric primitives.
//!
//! Data-parallel inner loops (generation, Monte Carlo oracle sampling, batch
//! forward evaluation, gradient accumulation) run through [`exec`], which
//! keeps results bit-identical between the rayon-backed parallel path
//! (feature `parallel`, on by default) and the sequential fallback.

pub mod data;
pub mod error;
pub mod exec;
pub mod linear;
pub mod matrix;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
