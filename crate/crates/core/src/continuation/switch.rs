//! Leaving the symmetric branch at a pitchfork.
//!
//! Close to the bifurcation the new branches satisfy `lambda - lambda0 ~ delta^2`,
//! so stepping in lambda is ill-posed there. Instead `(u, lambda)` is solved at
//! a prescribed amplitude `<u - u_sym, v> = delta` along the critical
//! eigenvector `v`, `delta` is grown geometrically until the branch has moved
//! away from `lambda0`, and natural continuation in lambda takes over.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::branch::{
    correct, extend_branch, make_point, Branch, BranchId, BranchPoint, BranchStatus, StepOptions,
};
use super::pitchfork::Pitchfork;
use crate::error::{Error, Result};
use crate::solver::{jacobian, residual};
use crate::spectral::{apply_symmetry, make_force, GridParams, Symmetry, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchOptions {
    /// Initial amplitude; `None` means `1e-3 lambda0`.
    pub delta: Option<f64>,
    /// Retries with doubled amplitude when the corrector lands on the symmetric branch.
    pub retries: usize,
    pub growth: f64,
    /// Leave the amplitude phase once `|lambda - lambda0|` exceeds this.
    pub departure: f64,
    pub max_amplitude_steps: usize,
    pub step: StepOptions,
}

impl Default for SwitchOptions {
    fn default() -> Self {
        SwitchOptions {
            delta: None,
            retries: 3,
            growth: 2.0,
            departure: 0.05,
            max_amplitude_steps: 40,
            step: StepOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    pub delta: f64,
    /// Largest `| ||u+|| - ||u-|| |` (l1) over matching points.
    pub max_norm_diff: f64,
    /// Largest `max |S u+ - u-|` over matching points.
    pub max_symmetry_diff: f64,
}

/// Asymmetry below which a root counts as lying on the symmetric branch.
fn on_symmetric_branch(u: &VectorField) -> bool {
    let scale = u.to_vec().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    apply_symmetry(u, Symmetry::S).max_abs_diff(u) <= 1e-8 * scale
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Newton on `G(u, lambda) = 0`, `<u - base, v> = delta`.
fn bordered_solve(
    guess: &VectorField,
    lambda_guess: f64,
    base: &[f64],
    v: &[f64],
    delta: f64,
    params: &GridParams,
    step: &StepOptions,
) -> Result<(VectorField, f64)> {
    let dim = v.len();
    let force = make_force(params).to_vec();
    let mut u = guess.clone();
    let mut lambda = lambda_guess;
    for _ in 0..=2 * step.newton.max_steps {
        let p = params.with_lambda(lambda);
        let g = residual(&u, &p);
        let uv = u.to_vec();
        let c = dot(&uv, v) - dot(base, v) - delta;
        let tol = step.newton.tolerance(&p);
        if g.l1() <= tol && c.abs() <= 1e-12 * delta.abs().max(1.0) {
            return Ok((u, lambda));
        }
        let j = jacobian(&u, &p);
        let mut m = DMatrix::zeros(dim + 1, dim + 1);
        m.view_mut((0, 0), (dim, dim)).copy_from(&j);
        for i in 0..dim {
            m[(i, dim)] = -force[i];
            m[(dim, i)] = v[i];
        }
        let mut rhs = DVector::from_vec(g.to_vec());
        rhs = rhs.push(c);
        let dz = m
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularJacobian { lambda })?;
        if dz.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularJacobian { lambda });
        }
        let next: Vec<f64> = uv.iter().zip(dz.iter()).map(|(x, d)| x - d).collect();
        u = VectorField::from_vec(p, &next)?;
        lambda -= dz[dim];
    }
    Err(Error::NewtonFailure {
        steps: 2 * step.newton.max_steps,
        residual: residual(&u, &params.with_lambda(lambda)).l1(),
    })
}

/// Amplitude phase: returns the points and the amplitudes used.
fn amplitude_phase(
    pf: &Pitchfork,
    base_params: &GridParams,
    direction: f64,
    deltas: Option<&[f64]>,
    delta0: f64,
    opts: &SwitchOptions,
) -> Result<(Vec<BranchPoint>, Vec<f64>)> {
    let base = pf.point.u.to_vec();
    let v: Vec<f64> = pf.eigenvector.iter().map(|x| direction * x).collect();
    let vf = VectorField::from_vec(pf.point.u.params, &v)?;
    let mut points = Vec::new();
    let mut used = Vec::new();
    let mut u = pf.point.u.clone();
    let mut lambda = pf.point.lambda;
    let mut prev_delta = 0.0;
    let mut k = 0;
    loop {
        let delta = match deltas {
            Some(d) => match d.get(k) {
                Some(x) => *x,
                None => break,
            },
            None => delta0 * opts.growth.powi(k as i32),
        };
        let guess = u.axpy(delta - prev_delta, &vf);
        let (un, ln) = bordered_solve(&guess, lambda, &base, &v, delta, base_params, &opts.step)?;
        let pt = make_point(
            un.clone().with_params(base_params.with_lambda(ln)),
            &base_params.with_lambda(ln),
        )?;
        if k == 0 && on_symmetric_branch(&pt.u) {
            return Err(Error::BranchSwitch(format!(
                "amplitude {delta:e} returned to the symmetric branch"
            )));
        }
        u = un;
        lambda = ln;
        prev_delta = delta;
        used.push(delta);
        points.push(pt);
        k += 1;
        if deltas.is_none()
            && ((lambda - pf.lambda0).abs() >= opts.departure || k >= opts.max_amplitude_steps)
        {
            break;
        }
    }
    Ok((points, used))
}

/// Sign of `c1_(0,1) - c2_(1,0)`: positive when the first component's shear dominates.
pub fn branch_label(u: &VectorField) -> BranchId {
    if u.u1.get(0, 1) - u.u2.get(1, 0) >= 0.0 {
        BranchId::PitchforkPlus
    } else {
        BranchId::PitchforkMinus
    }
}

/// Follows the points through the given lambdas with the same corrector.
fn follow_schedule(
    id: BranchId,
    mut points: Vec<BranchPoint>,
    base: &GridParams,
    lambdas: &[f64],
    opts: &StepOptions,
) -> Result<Branch> {
    for &lambda in lambdas {
        let n = points.len();
        let guess = if n >= 2 && opts.secant {
            let (a, b) = (&points[n - 2], &points[n - 1]);
            let t = (lambda - b.lambda) / (b.lambda - a.lambda);
            b.u.axpy(t, &b.u.axpy(-1.0, &a.u))
        } else {
            points[n - 1].u.clone()
        };
        points.push(correct(&guess, &base.with_lambda(lambda), opts.newton)?);
    }
    Ok(Branch {
        id,
        points,
        status: BranchStatus::Complete,
    })
}

/// Builds both bifurcating branches from a detected pitchfork, continued to `lambda_end`.
///
/// The branch through `+v` is followed adaptively; the one through `-v` is
/// computed independently on the same amplitude and lambda schedule so the
/// two can be compared point by point. Returns `(PITCHFORK_PLUS, PITCHFORK_MINUS, report)`.
pub fn switch_branch(
    pf: &Pitchfork,
    base: &GridParams,
    lambda_end: f64,
    opts: SwitchOptions,
) -> Result<(Branch, Branch, SwitchReport)> {
    let mut delta = opts.delta.unwrap_or(1e-3 * pf.lambda0);
    let mut attempt = 0;
    let (first_pts, deltas) = loop {
        match amplitude_phase(pf, base, 1.0, None, delta, &opts) {
            Ok(r) => break r,
            Err(Error::BranchSwitch(msg)) => {
                attempt += 1;
                if attempt > opts.retries {
                    return Err(Error::BranchSwitch(format!(
                        "{msg}; gave up after {} retries",
                        opts.retries
                    )));
                }
                delta *= 2.0;
            }
            Err(e) => return Err(e),
        }
    };
    let n_amp = first_pts.len();
    let first = extend_branch(
        BranchId::PitchforkPlus,
        first_pts,
        base,
        lambda_end,
        opts.step,
    )?;
    let (second_pts, _) = amplitude_phase(pf, base, -1.0, Some(&deltas), delta, &opts)?;
    let schedule: Vec<f64> = first.points[n_amp..].iter().map(|p| p.lambda).collect();
    let mut second = follow_schedule(
        BranchId::PitchforkMinus,
        second_pts,
        base,
        &schedule,
        &opts.step,
    )?;
    let mut first = first;
    second.status = first.status.clone();

    let (mut max_norm_diff, mut max_symmetry_diff) = (0.0f64, 0.0f64);
    for (a, b) in first.points.iter().zip(&second.points) {
        max_norm_diff = max_norm_diff.max((a.norm_l1 - b.norm_l1).abs());
        max_symmetry_diff =
            max_symmetry_diff.max(apply_symmetry(&a.u, Symmetry::S).max_abs_diff(&b.u));
    }
    if branch_label(&first.last().u) == BranchId::PitchforkMinus {
        std::mem::swap(&mut first, &mut second);
    }
    first.id = BranchId::PitchforkPlus;
    second.id = BranchId::PitchforkMinus;
    Ok((
        first,
        second,
        SwitchReport {
            delta,
            max_norm_diff,
            max_symmetry_diff,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SineField;

    #[test]
    fn label_follows_the_dominant_shear() {
        let p = GridParams::new(2, 6.0, 1.0).unwrap();
        let u = VectorField::new(
            SineField::from_modes(2, &[((0, 1), 3.0)]),
            SineField::from_modes(2, &[((1, 0), 1.0)]),
            p,
        )
        .unwrap();
        assert_eq!(branch_label(&u), BranchId::PitchforkPlus);
        assert_eq!(
            branch_label(&apply_symmetry(&u, Symmetry::S)),
            BranchId::PitchforkMinus
        );
        assert!(!on_symmetric_branch(&u));
        assert!(on_symmetric_branch(
            &u.axpy(1.0, &apply_symmetry(&u, Symmetry::S))
        ));
    }
}
