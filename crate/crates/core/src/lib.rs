//! Hilbert-Schmidt separability probabilities of real two-qubit states.
//!
//! Two independent routes are provided:
//!
//! * exact quadrature of closed-form diagonal-entry-parameterized separability
//!   functions (DESFs) against the Hilbert-Schmidt Jacobian in the diagonal
//!   log-ratio `ξ` ([`sepfun`], [`quadrature`]);
//! * Monte Carlo and quasi-Monte Carlo sampling of the Hilbert-Schmidt
//!   ensemble in Bloore coordinates ([`sampling`], [`estimator`]).
//!
//! State algebra (partial transpose, principal minors, positivity and the
//! Peres-Horodecki test) lives in [`qstate`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod error;
pub mod estimator;
pub mod qstate;
pub mod quadrature;
pub mod sampling;
pub mod sepfun;

pub use error::{Error, Result};

pub use qstate::{BlooreCoords, DensityMatrix, Sym4, Xi};
pub use quadrature::QuadratureResult;
pub use sampling::{Engine, PointSource, SampleBatch, SequenceSpec};

pub use sepfun::{DesfCurve, JacobianSpec};
pub use estimator::{DesfHistogram, EstimateOptions, EstimateResult, Event, MinorDesf, MinorSelector};

/// Absolute tolerance used for positivity and determinant-sign tests.
pub const DEFAULT_TOL: f64 = 1e-12;
