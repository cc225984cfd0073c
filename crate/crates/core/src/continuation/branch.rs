use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{jacobian, newton_refine, residual, NewtonOptions};
use crate::spectral::{GridParams, NormKind, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BranchId {
    Symmetric,
    PitchforkPlus,
    PitchforkMinus,
}

impl BranchId {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchId::Symmetric => "SYMMETRIC",
            BranchId::PitchforkPlus => "PITCHFORK_PLUS",
            BranchId::PitchforkMinus => "PITCHFORK_MINUS",
        }
    }
}

/// A root on a branch together with its linear stability.
///
/// `leading_eig_real` is the largest real part in the spectrum of
/// `-dG/du`, where `G` is the Galerkin residual; the root is stable for the
/// flow `u_t = -G(u)` iff it is negative.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchPoint {
    pub lambda: f64,
    pub u: VectorField,
    pub norm_l1: f64,
    pub norm_l1_1: f64,
    pub leading_eig_real: f64,
    pub stable: bool,
    pub residual_l1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BranchStatus {
    Complete,
    /// The step fell below the minimum; the branch ends at the last accepted point.
    StepUnderflow {
        lambda: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub id: BranchId,
    pub points: Vec<BranchPoint>,
    pub status: BranchStatus,
}

impl Branch {
    pub fn last(&self) -> &BranchPoint {
        self.points.last().expect("branches are never empty")
    }

    /// Whether lambda is strictly monotone along the points.
    pub fn is_monotone(&self) -> bool {
        let d: Vec<f64> = self
            .points
            .windows(2)
            .map(|w| w[1].lambda - w[0].lambda)
            .collect();
        d.iter().all(|x| *x > 0.0) || d.iter().all(|x| *x < 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Consecutive accepted steps after which the step doubles.
    pub grow_after: usize,
    /// Extrapolate from the last two points instead of reusing the last one.
    pub secant: bool,
    /// Corrector settings; `max_steps` is kept small so that a poor predictor
    /// triggers a step reduction instead of a long Newton run.
    pub newton: NewtonOptions,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            initial_step: 0.1,
            min_step: 1e-8,
            max_step: 1.0,
            grow_after: 5,
            secant: true,
            newton: NewtonOptions {
                tol: None,
                max_steps: 12,
                // never flags; finite so the options survive a JSON round trip
                singular_threshold: f64::MAX,
            },
        }
    }
}

/// Eigenvalues of `-J`, sorted by decreasing real part.
///
/// nalgebra's Schur iteration stalls on these Jacobians (their diagonal spans
/// many decades), so the dense eigensolve goes through faer.
pub fn spectrum(j: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = j.nrows();
    let m = faer::Mat::<f64>::from_fn(n, n, |r, c| -j[(r, c)]);
    let ev = m
        .eigenvalues()
        .map_err(|e| Error::InvalidInput(format!("eigenvalue solve failed: {e:?}")))?;
    let mut ev: Vec<Complex<f64>> = ev.into_iter().map(|z| Complex::new(z.re, z.im)).collect();
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(ev)
}

pub fn leading_eigenvalue(u: &VectorField, params: &GridParams) -> Result<Complex<f64>> {
    Ok(spectrum(&jacobian(u, params))?[0])
}

/// Evaluates norms and stability of a root.
pub fn make_point(u: VectorField, params: &GridParams) -> Result<BranchPoint> {
    let lead = leading_eigenvalue(&u, params)?;
    Ok(BranchPoint {
        lambda: params.lambda,
        norm_l1: u.l1(),
        norm_l1_1: u.norm(NormKind::L1_1)?,
        leading_eig_real: lead.re,
        stable: lead.re < 0.0,
        residual_l1: residual(&u, params).l1(),
        u,
    })
}

/// Corrects `guess` at `params` and evaluates the point.
pub fn correct(
    guess: &VectorField,
    params: &GridParams,
    newton: NewtonOptions,
) -> Result<BranchPoint> {
    let r = newton_refine(guess, params, newton)?;
    make_point(r.u, params)
}

fn predict(points: &[BranchPoint], lambda: f64, secant: bool) -> VectorField {
    let last = &points[points.len() - 1];
    match points.len() {
        n if n >= 2 && secant => {
            let prev = &points[n - 2];
            let t = (lambda - last.lambda) / (last.lambda - prev.lambda);
            last.u.axpy(t, &last.u.axpy(-1.0, &prev.u))
        }
        _ => last.u.clone(),
    }
}

/// Natural-parameter continuation from the given points (at least one) to `lambda_end`.
pub fn extend_branch(
    id: BranchId,
    seed: Vec<BranchPoint>,
    base: &GridParams,
    lambda_end: f64,
    opts: StepOptions,
) -> Result<Branch> {
    if seed.is_empty() {
        return Err(Error::InvalidInput(
            "continuation needs a starting point".into(),
        ));
    }
    let mut points = seed;
    let start = points.last().unwrap().lambda;
    let dir = if lambda_end >= start { 1.0 } else { -1.0 };
    let mut h = opts.initial_step.min(opts.max_step);
    let mut successes = 0;
    let mut status = BranchStatus::Complete;
    while dir * (lambda_end - points.last().unwrap().lambda) > 1e-12 {
        let here = points.last().unwrap().lambda;
        let lambda = if dir * (lambda_end - here) <= h {
            lambda_end
        } else {
            here + dir * h
        };
        let params = base.with_lambda(lambda);
        let guess = predict(&points, lambda, opts.secant);
        match correct(&guess, &params, opts.newton) {
            Ok(pt) => {
                points.push(pt);
                successes += 1;
                if successes >= opts.grow_after {
                    h = (2.0 * h).min(opts.max_step);
                    successes = 0;
                }
            }
            Err(Error::NewtonFailure { .. } | Error::SingularJacobian { .. }) => {
                h *= 0.5;
                successes = 0;
                if h < opts.min_step {
                    status = BranchStatus::StepUnderflow { lambda: here };
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Branch { id, points, status })
}

/// Follows the branch through `start` (default: the trivial root at `lambda = 0`)
/// up to `lambda_end`.
pub fn continue_branch(
    params: &GridParams,
    start: Option<VectorField>,
    lambda_end: f64,
    opts: StepOptions,
) -> Result<Branch> {
    params.validate()?;
    let (u0, p0) = match start {
        Some(u) => (u, *params),
        None => {
            let p0 = params.with_lambda(0.0);
            (VectorField::zeros(p0), p0)
        }
    };
    let first = correct(&u0, &p0, opts.newton)?;
    extend_branch(BranchId::Symmetric, vec![first], params, lambda_end, opts)
}
