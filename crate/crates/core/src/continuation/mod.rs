//! Path following in lambda, pitchfork detection and branch switching.
//!
//! Stability convention: a root is stable when every eigenvalue of `-dG/du`
//! has negative real part, `G` being the Galerkin residual. This is linear
//! stability for the gradient-like flow `u_t = -G(u)`.

mod branch;
mod diagram;
mod pitchfork;
mod switch;

pub use crate::solver::jacobian;
pub use branch::{
    continue_branch, correct, extend_branch, leading_eigenvalue, make_point, spectrum, Branch,
    BranchId, BranchPoint, BranchStatus, StepOptions,
};
pub use diagram::{
    bifurcation_diagram, diagram_csv, diagram_svg, emit_diagram, Diagram, RunManifest, CSV_HEADER,
};
pub use pitchfork::{detect_pitchfork, null_vector, Pitchfork, PitchforkSignature, BRACKET_WIDTH};
pub use switch::{branch_label, switch_branch, SwitchOptions, SwitchReport};
