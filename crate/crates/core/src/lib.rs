//! Exact and randomized permanents of dense real and complex matrices,
//! together with certified log-space upper bounds on `|perm A|` expressed
//! through the operator norm and the row parameters `h₂`, `h∞`.
//!
//! Exact permanents come from [`permanent`] (Ryser, Glynn enumeration and a
//! direct expansion that serve as oracles for one another). [`glynn`] holds
//! the Monte Carlo estimator and the sampling diagnostics for `‖AX‖₁`.
//! [`bounds`] evaluates every bound for a matrix, and [`experiments`] drives
//! the soundness, concentration and tightness runs used by the CLI.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod glynn;
pub mod io;
pub mod linalg;
pub mod permanent;
pub mod rng;

pub use bounds::{bound_report, BoundOptions, BoundReport, LogBound};
pub use ensemble::{gen_ensemble, EnsembleKind, EnsembleParams};
pub use error::{Error, Result};
pub use glynn::{estimate_perm, glynn_value, EstimateReport, SampleVector};
pub use linalg::{op_norm, row_stats, Field, Matrix, RowStats, Scalar};
pub use permanent::{perm_glynn_exact, perm_naive, perm_ryser, PermValue};
