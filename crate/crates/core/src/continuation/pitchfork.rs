use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::branch::{correct, spectrum, Branch, BranchPoint, StepOptions};
use crate::error::{Error, Result};
use crate::solver::jacobian;
use crate::spectral::{apply_symmetry, GridParams, Symmetry, VectorField};

pub const BRACKET_WIDTH: f64 = 1e-4;

/// What the eigenvalue crossing looks like at the detected point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PitchforkSignature {
    /// Leading eigenvalue of `-J` at the lower bracket end.
    pub critical_eigenvalue: [f64; 2],
    /// Real part of the next eigenvalue (after the critical one and its conjugate).
    pub next_eigenvalue_real: f64,
    /// `|next| - |critical|`: how far the rest of the spectrum stays from zero.
    pub margin: f64,
    /// `max |S v + v|` for the unit critical eigenvector.
    pub s_antisymmetry_defect: f64,
    /// `max |S v - v|`
    pub s_symmetry_defect: f64,
    /// `max |S u - u|` for the root at the bifurcation.
    pub base_s_defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pitchfork {
    pub lambda0: f64,
    pub bracket: (f64, f64),
    /// Root at the lower bracket end (still stable).
    pub point: BranchPoint,
    /// Unit eigenvector of `J` for the eigenvalue closest to zero, in `[u1; u2]` coordinates.
    pub eigenvector: Vec<f64>,
    pub signature: PitchforkSignature,
}

/// Eigenvector of `j` for the eigenvalue nearest zero, by inverse iteration.
///
/// Normalized to unit Euclidean length with its largest entry positive.
pub fn null_vector(j: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = j.nrows();
    let scale = j.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut lu = j.clone().lu();
    if !lu.is_invertible() {
        // exactly singular: nudge off the eigenvalue
        let mut shifted = j.clone();
        for i in 0..n {
            shifted[(i, i)] += 1e-14 * scale;
        }
        lu = shifted.lu();
    }
    let mut x = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 17) as f64 / 17.0);
    x /= x.norm();
    for _ in 0..30 {
        let y = lu
            .solve(&x)
            .ok_or(Error::SingularJacobian { lambda: f64::NAN })?;
        let norm = y.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::SingularJacobian { lambda: f64::NAN });
        }
        x = y / norm;
    }
    let imax = x.iamax();
    if x[imax] < 0.0 {
        x = -x;
    }
    Ok(x)
}

/// Locates the first crossing of the leading eigenvalue from negative to
/// nonnegative along `branch` and refines it by bisection in lambda.
pub fn detect_pitchfork(
    branch: &Branch,
    base: &GridParams,
    opts: StepOptions,
) -> Result<Pitchfork> {
    let idx = branch
        .points
        .windows(2)
        .position(|w| w[0].leading_eig_real < 0.0 && w[1].leading_eig_real >= 0.0)
        .ok_or(Error::NoBifurcation)?;
    let mut lo = branch.points[idx].clone();
    let mut hi = branch.points[idx + 1].clone();
    while hi.lambda - lo.lambda > BRACKET_WIDTH {
        let mid = 0.5 * (lo.lambda + hi.lambda);
        let t = (mid - lo.lambda) / (hi.lambda - lo.lambda);
        let guess = lo.u.axpy(t, &hi.u.axpy(-1.0, &lo.u));
        let pt = correct(&guess, &base.with_lambda(mid), opts.newton)?;
        if pt.leading_eig_real < 0.0 {
            lo = pt;
        } else {
            hi = pt;
        }
    }
    let lambda0 = 0.5 * (lo.lambda + hi.lambda);
    let p_lo = base.with_lambda(lo.lambda);
    let j = jacobian(&lo.u, &p_lo);
    let v = null_vector(&j)?;
    let vf = VectorField::from_vec(p_lo, v.as_slice())?;
    let sv = apply_symmetry(&vf, Symmetry::S);
    let ev = spectrum(&j)?;
    let crit = ev[0];
    let skip = if crit.im != 0.0 { 2 } else { 1 };
    let next = ev.get(skip).map(|c| c.re).unwrap_or(f64::NEG_INFINITY);
    let signature = PitchforkSignature {
        critical_eigenvalue: [crit.re, crit.im],
        next_eigenvalue_real: next,
        margin: next.abs() - crit.norm(),
        s_antisymmetry_defect: sv
            .axpy(1.0, &vf)
            .to_vec()
            .iter()
            .fold(0.0, |m, x| m.max(x.abs())),
        s_symmetry_defect: sv.max_abs_diff(&vf),
        base_s_defect: apply_symmetry(&lo.u, Symmetry::S).max_abs_diff(&lo.u),
    };
    Ok(Pitchfork {
        lambda0,
        bracket: (lo.lambda, hi.lambda),
        point: lo,
        eigenvector: v.as_slice().to_vec(),
        signature,
    })
}
