//! Entanglement and optical-nonclassicality measures for multimode bosonic
//! states, in both the Gaussian (covariance-matrix) and truncated Fock
//! representations, together with the bounds that relate them.
//!
//! Conventions used throughout:
//!
//! * quadratures are ordered `(X1, P1, ..., Xn, Pn)`;
//! * `a = (X + iP)/sqrt(2)`, so the vacuum covariance matrix is the identity;
//! * entropies are in nats.
//!
//! The crate is organised by representation:
//!
//! * [`symplectic`]: covariance matrices, symplectic spectra, partial transposition;
//! * [`gaussian`]: Gaussian states, operations and closed-form measures;
//! * [`fock`]: truncated Fock-space states, beam splitter, Schmidt-based measures;
//! * [`bounds`]: the bound evaluators and the `N_A*` root solvers;
//! * [`experiments`]: sweeps, audits and CSV/JSON emitters.

// Negated comparisons like `!(x >= 0.0)` are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod gaussian;
pub mod registry;
pub mod symplectic;

pub use error::{Error, Result};
pub use symplectic::{Bipartition, CovarianceMatrix};

/// Library version, echoed into experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
