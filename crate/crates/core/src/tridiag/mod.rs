//! Tridiagonal blocks of `lambda sin y d_x + (-Delta)^m` and bounds on their inverses.
//!
//! `sin y d_x` maps `sin(lx + jy)` into `sin(lx + (j +- 1)y)`, so the operator
//! leaves each `H^l = span{sin(lx + jy)}` invariant and is tridiagonal there.

mod block;
mod certify;
mod operator;
mod sequences;

pub use block::{
    build_block, full_operator_norms, geometric_decay_ratio, operator_block, operator_norms,
    OperatorNorms, TridiagonalBlock, PIVOT_TOL,
};
pub use certify::{
    certify_bounds, CertOptions, CertPoint, CertRow, CertSummary, CertificationReport, Exponents,
    ParityPattern, SlopeFit,
};
pub use operator::LinearizedOperator;
pub use sequences::{bound_sequences, BoundSequences};
