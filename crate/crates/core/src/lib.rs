//! Product depth for temporal point processes observed up to their first
//! `k` events.
//!
//! The crate fits the depth's parameters from a sample of realizations,
//! evaluates the depth and its marginal and conditional components, compares
//! against a Mahalanobis baseline, simulates homogeneous and state-dependent
//! Poisson sequences, and checks the depth's structural properties on
//! randomized inputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod depth;
pub mod error;
pub mod estimation;
pub mod io;
pub mod simulate;

pub use analysis::{Method, PropertyReport, RankTable};
pub use depth::{DepthBreakdown, DepthParams, EventSequence, MahalanobisModel};
pub use error::{DepthError, IoError};
pub use estimation::{fit_mahalanobis, fit_params, MahalanobisFit, SampleSet};
pub use simulate::{ProcessKind, SimConfig};
