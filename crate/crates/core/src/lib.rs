//! Ultradiffusion models of how the response to a piece of information
//! (votes, comments, downloads) relaxes over time.
//!
//! The pipeline runs from raw event traces to fitted relaxation parameters:
//!
//! - [`trace`]: parse `story_id,timestamp` traces and build cumulative
//!   popularity curves.
//! - [`ultrametric`]: the ultrametric state space induced by a trace, and the
//!   unit-spaced chain behind the closed forms.
//! - [`generator`]: master-equation rate matrices `ε = e^{-μ d}`.
//! - [`spectral`]: closed-form spectra, autocorrelations, survival curves and
//!   tree relaxation.
//! - [`dynamics`]: numerical integration and eigendecomposition used as
//!   independent checks on the closed forms.
//! - [`fitting`]: the saturating exponential fit, parameter inference and
//!   synthetic data.
//! - [`baselines`]: Poisson and power-law reference processes.
//! - [`cli`] and [`oracle_suite`]: the batch driver behind the binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod generator;
pub mod oracle_suite;
pub mod spectral;
pub mod trace;
pub mod tsv;
pub mod ultrametric;

pub use error::{Error, Result};
