//! Radial sampling, limit laws and validation tools for the eigenvalues of
//! products of Ginibre matrices and of truncated Haar unitary matrices.
//!
//! The squared moduli of the eigenvalues of such products are distributed
//! as independent products of Gamma or Beta variables, one per eigenvalue
//! index, with uniform independent angles. [`ensembles`] samples that
//! representation directly; [`oracle`] builds the matrices and runs a dense
//! eigensolver so the two can be compared.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensembles;
pub mod error;
pub mod export;
pub mod kernel;
pub mod limits;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod special;
pub mod stats;

pub use ensembles::{EnsembleKind, EnsembleSpec, LogRadialSample, ScalingRule};
pub use error::{Error, Result};
pub use kernel::{KernelSpec, RadialWeight};
pub use limits::{LimitProfile, QProfile, Regime};
pub use rng::RandomStream;
pub use stats::{EmpiricalMeasure, KsReport};
