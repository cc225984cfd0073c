//! Spectral Galerkin solver for the elliptic-regularized stationary Burgers system
//!
//! ```text
//!     u . grad u + (-Delta)^m u = lambda F,   F = (sin y, sin x),   on the 2D torus
//! ```
//!
//! Fields are stored as real sine amplitudes on the half-lattice
//! `{k1 > 0} U {k1 = 0, k2 > 0}` with `|k1|, |k2| <= N`, which makes the
//! reality and odd-parity conditions hold by construction.
//!
//! Modules:
//! - [`spectral`]: fields, the Galerkin nonlinearity, symmetries, norms.
//! - [`tridiag`]: tridiagonal blocks of the rotation operator, their inverses and bounds.
//! - [`linearization`]: the linearized pair `(A, B)` and its lambda-scaling table.
//! - [`solver`]: fixed-point construction of the two solutions and Newton polishing.
//! - [`continuation`]: path following in lambda, pitchfork detection, branch switching.
//! - [`verify`]: randomized property suite used by the `verify` command.

// `!(x >= 0.0)` is how the parameter checks reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod error;
pub mod linearization;
pub mod solver;
pub mod spectral;
pub mod stats;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use spectral::{GridParams, LaplacianVariant, NormKind, SineField, VectorField};
