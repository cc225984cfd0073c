//! Construction of the two solutions around `lambda (sin y, 0)` and its image
//! under `S`.
//!
//! Writing `u = lambda (sin y, 0) + (A, B) + (a, b)`, the Galerkin system reduces to
//!
//! ```text
//! L b = -N2(w),    L a = -lambda cos y b - N1(w),    w = (A + a, B + b),
//! ```
//!
//! with `L = lambda sin y d_x + (-Delta)^m` and `N = w . grad w`. The
//! iteration below runs this map on the fixed lattice of `params`, so the
//! linearization is computed once and never re-truncated.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearization::{cos_y_product, solve_linearization, LinearizationPair};
use crate::spectral::{
    apply_symmetry, bilinear, dominant_part, make_force, nonlinear_term, GridParams, NormKind,
    Part, SineField, Symmetry, VectorField,
};
use crate::stats::loglog_slope;
use crate::tridiag::LinearizedOperator;

fn laplacian(params: &GridParams, f: &SineField) -> SineField {
    let mut out = f.clone();
    for (c, (k1, k2)) in out.coeffs_mut().iter_mut().zip(f.lattice().modes()) {
        *c *= params.laplacian(k1, k2);
    }
    out
}

/// `u . grad u + (-Delta)^m u - lambda F`.
pub fn residual(u: &VectorField, params: &GridParams) -> VectorField {
    let nl = nonlinear_term(u);
    let f = make_force(params);
    VectorField {
        u1: nl
            .u1
            .axpy(1.0, &laplacian(params, &u.u1))
            .axpy(-params.lambda, &f.u1),
        u2: nl
            .u2
            .axpy(1.0, &laplacian(params, &u.u2))
            .axpy(-params.lambda, &f.u2),
        params: *params,
    }
}

/// Dense `d residual / d u` in the stacked `[u1; u2]` coordinates:
/// `J v = B(u, v) + B(v, u) + (-Delta)^m v`.
pub fn jacobian(u: &VectorField, params: &GridParams) -> DMatrix<f64> {
    let lat = u.lattice();
    let len = lat.len();
    let dim = 2 * len;
    let mut j = DMatrix::zeros(dim, dim);
    let mut e = VectorField::zeros(*params);
    for col in 0..dim {
        let (comp, i) = (col / len, col % len);
        let (k1, k2) = lat.mode(i);
        let slot = if comp == 0 { &mut e.u1 } else { &mut e.u2 };
        slot.coeffs_mut()[i] = 1.0;
        let jv = bilinear(u, &e).axpy(1.0, &bilinear(&e, u));
        let slot = if comp == 0 { &mut e.u1 } else { &mut e.u2 };
        slot.coeffs_mut()[i] = 0.0;
        let mut column = j.column_mut(col);
        for (r, v) in jv.u1.coeffs().iter().chain(jv.u2.coeffs()).enumerate() {
            column[r] = *v;
        }
        column[col] += params.laplacian(k1, k2);
    }
    j
}

/// The three a-priori norms of a remainder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AprioriNorms {
    pub norm_b_l1_1: f64,
    pub norm_pr_a_l1_1: f64,
    pub norm_pd_a_l1_1: f64,
}

impl AprioriNorms {
    fn of(a: &SineField, b: &SineField) -> Result<Self> {
        Ok(AprioriNorms {
            norm_b_l1_1: b.norm(NormKind::L1_1)?,
            norm_pr_a_l1_1: a.project(Part::R).norm(NormKind::L1_1)?,
            norm_pd_a_l1_1: a.project(Part::D).norm(NormKind::L1_1)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    /// `||a_(n+1) - a_n||_{l1_1} + ||b_(n+1) - b_n||_{l1_1}`
    pub diff_l1_1: f64,
    /// `||P_R da||_{l1_1} + ||db||_{l1_1} + lambda^(-2/m) ||P_D da||_{l1_1}`
    pub weighted_diff: f64,
    pub apriori: AprioriNorms,
    /// `weighted_diff(n) / weighted_diff(n-1)`
    pub contraction_ratio: Option<f64>,
    /// `max |P_D b|`, zero in exact arithmetic.
    pub pd_b_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum IterationStatus {
    Converged,
    Diverged(String),
    MaxIterations,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub max_iter: usize,
    /// Stopping threshold on `diff_l1_1`; `None` means `1e-10 lambda^(1 - 1/m)`.
    pub tol: Option<f64>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            max_iter: 100,
            tol: None,
        }
    }
}

impl FixedPointOptions {
    pub fn tolerance(&self, params: &GridParams) -> f64 {
        self.tol
            .unwrap_or_else(|| 1e-10 * params.lambda.powf(1.0 - 1.0 / params.m))
    }
}

/// `(a, b)` with `P_D b = 0` expected.
#[derive(Clone, Debug, PartialEq)]
pub struct RemainderPair {
    pub a: SineField,
    pub b: SineField,
    pub params: GridParams,
}

impl RemainderPair {
    pub fn as_field(&self) -> VectorField {
        VectorField {
            u1: self.a.clone(),
            u2: self.b.clone(),
            params: self.params,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FixedPointResult {
    pub linearization: LinearizationPair,
    pub remainder: RemainderPair,
    pub trace: Vec<IterationRecord>,
    pub status: IterationStatus,
}

impl FixedPointResult {
    pub fn converged(&self) -> bool {
        self.status == IterationStatus::Converged
    }

    /// `lambda (sin y, 0) + (A, B) + (a, b)`.
    pub fn solution(&self) -> VectorField {
        let p = self.linearization.params;
        dominant_part(&p)
            .axpy(1.0, &self.linearization.as_field())
            .axpy(1.0, &self.remainder.as_field())
    }
}

/// One application of the fixed-point map.
fn step(
    op: &LinearizedOperator,
    lin: &LinearizationPair,
    a: &SineField,
    b: &SineField,
) -> Result<(SineField, SineField)> {
    let lam = lin.params.lambda;
    let w = VectorField {
        u1: lin.a.axpy(1.0, a),
        u2: lin.b.axpy(1.0, b),
        params: lin.params,
    };
    let nl = nonlinear_term(&w);
    let b_next = op.solve(&nl.u2.scaled(-1.0))?;
    let rhs_a = cos_y_product(&b_next).scaled(-lam).axpy(-1.0, &nl.u1);
    let a_next = op.solve(&rhs_a)?;
    Ok((a_next, b_next))
}

/// The residual of `lambda (sin y, 0) + (A, B) + (a, b)` expressed through
/// the fixed-point map `T`: with `(a', b') = T(a, b)`,
/// `(L(a - a') - lambda cos y (b' - b), L(b - b'))`.
pub fn fixed_point_defect(lin: &LinearizationPair, r: &RemainderPair) -> Result<VectorField> {
    let op = LinearizedOperator::new(&lin.params)?;
    let (a1, b1) = step(&op, lin, &r.a, &r.b)?;
    let lam = lin.params.lambda;
    let u1 = op
        .apply(&r.a.axpy(-1.0, &a1))?
        .axpy(-lam, &cos_y_product(&b1.axpy(-1.0, &r.b)));
    let u2 = op.apply(&r.b.axpy(-1.0, &b1))?;
    Ok(VectorField {
        u1,
        u2,
        params: lin.params,
    })
}

/// Number of consecutive increases of the weighted difference that counts as divergence.
const DIVERGENCE_RUN: usize = 5;

/// Runs the fixed-point map from `(a, b) = (0, 0)`.
///
/// Divergence (five consecutive increases of the weighted difference, or a
/// non-finite value) and hitting `max_iter` are reported through `status`,
/// not as errors.
pub fn fixed_point_iterate(
    params: &GridParams,
    opts: FixedPointOptions,
) -> Result<FixedPointResult> {
    params.validate()?;
    let lin = solve_linearization(params)?;
    let zero = SineField::zeros(params.n);
    let mut a = zero.clone();
    let mut b = zero;
    if params.lambda == 0.0 {
        let record = IterationRecord {
            n: 1,
            diff_l1_1: 0.0,
            weighted_diff: 0.0,
            apriori: AprioriNorms::default(),
            contraction_ratio: None,
            pd_b_max: 0.0,
        };
        return Ok(FixedPointResult {
            linearization: lin,
            remainder: RemainderPair {
                a,
                b,
                params: *params,
            },
            trace: vec![record],
            status: IterationStatus::Converged,
        });
    }
    let op = LinearizedOperator::new(params)?;
    let tol = opts.tolerance(params);
    let weight = params.lambda.powf(-2.0 / params.m);
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut rises = 0;
    let mut status = IterationStatus::MaxIterations;
    for n in 1..=opts.max_iter {
        let (a_next, b_next) = step(&op, &lin, &a, &b)?;
        let da = a_next.axpy(-1.0, &a);
        let db = b_next.axpy(-1.0, &b);
        let db11 = db.norm(NormKind::L1_1)?;
        let da_r = da.project(Part::R).norm(NormKind::L1_1)?;
        let da_d = da.project(Part::D).norm(NormKind::L1_1)?;
        let diff = da_r + da_d + db11;
        let weighted = da_r + db11 + weight * da_d;
        let prev = trace.last().map(|r| r.weighted_diff);
        let ratio = prev.filter(|p| *p > 0.0).map(|p| weighted / p);
        a = a_next;
        b = b_next;
        trace.push(IterationRecord {
            n,
            diff_l1_1: diff,
            weighted_diff: weighted,
            apriori: AprioriNorms::of(&a, &b)?,
            contraction_ratio: ratio,
            pd_b_max: b.project(Part::D).max_abs(),
        });
        if !weighted.is_finite() || !diff.is_finite() {
            status = IterationStatus::Diverged(format!("non-finite difference at step {n}"));
            break;
        }
        if diff < tol {
            status = IterationStatus::Converged;
            break;
        }
        rises = if prev.is_some_and(|p| weighted > p) {
            rises + 1
        } else {
            0
        };
        if rises >= DIVERGENCE_RUN {
            status = IterationStatus::Diverged(format!(
                "difference grew over {DIVERGENCE_RUN} consecutive steps (step {n}, weighted diff {weighted:e})"
            ));
            break;
        }
    }
    Ok(FixedPointResult {
        linearization: lin,
        remainder: RemainderPair {
            a,
            b,
            params: *params,
        },
        trace,
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    pub lambda: f64,
    pub m: f64,
    pub norms: AprioriNorms,
    /// The norms divided by `lambda^(-1+4/m)`, `lambda^(-1+9/2m)`, `lambda^(2/m)`.
    pub normalized: [f64; 3],
    pub pr_a_l1: f64,
    /// `||P_R a||_{l1} <= 1`
    pub pr_a_l1_ok: bool,
    /// `||(a, b)||_{l1_1}` against `lambda^(1 - 1/m)`.
    pub remainder_l1_1: f64,
    pub standing_assumption_ok: bool,
    /// `m > 9/2`, below which the estimates are not expected to close.
    pub m_admissible: bool,
}

pub fn apriori_exponents(m: f64) -> [f64; 3] {
    [-1.0 + 4.0 / m, -1.0 + 9.0 / (2.0 * m), 2.0 / m]
}

pub fn apriori_monitor(r: &RemainderPair) -> Result<AprioriReport> {
    let p = r.params;
    let norms = AprioriNorms::of(&r.a, &r.b)?;
    let e = apriori_exponents(p.m);
    let scale = |x: f64, k: usize| {
        if p.lambda > 0.0 {
            x / p.lambda.powf(e[k])
        } else {
            0.0
        }
    };
    let pr_a_l1 = r.a.project(Part::R).norm(NormKind::L1)?;
    let remainder_l1_1 = r.a.norm(NormKind::L1_1)? + r.b.norm(NormKind::L1_1)?;
    Ok(AprioriReport {
        lambda: p.lambda,
        m: p.m,
        norms,
        normalized: [
            scale(norms.norm_b_l1_1, 0),
            scale(norms.norm_pr_a_l1_1, 1),
            scale(norms.norm_pd_a_l1_1, 2),
        ],
        pr_a_l1,
        pr_a_l1_ok: pr_a_l1 <= 1.0,
        remainder_l1_1,
        standing_assumption_ok: remainder_l1_1 <= p.lambda.powf(1.0 - 1.0 / p.m),
        m_admissible: p.m > 4.5,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriSweep {
    pub lambdas: Vec<f64>,
    pub reports: Vec<AprioriReport>,
    /// Fitted exponents of `||b||`, `||P_R a||`, `||P_D a||` (all `l1_1`).
    pub fitted: [f64; 3],
    pub predicted: [f64; 3],
    pub tolerance: f64,
    pub pass: bool,
}

/// Runs the iteration at each lambda and fits the a-priori exponents.
pub fn apriori_sweep(
    params_list: &[GridParams],
    opts: FixedPointOptions,
    tolerance: f64,
) -> Result<AprioriSweep> {
    if params_list.len() < 2 {
        return Err(Error::InvalidInput(
            "an a-priori sweep needs at least two lambdas".into(),
        ));
    }
    let m = params_list[0].m;
    let mut reports = Vec::with_capacity(params_list.len());
    for p in params_list {
        let fp = fixed_point_iterate(p, opts)?;
        if !fp.converged() {
            return Err(Error::Divergence(format!(
                "lambda = {}: {:?}",
                p.lambda, fp.status
            )));
        }
        reports.push(apriori_monitor(&fp.remainder)?);
    }
    let lambdas: Vec<f64> = reports.iter().map(|r| r.lambda).collect();
    let fit = |f: fn(&AprioriNorms) -> f64| {
        let ys: Vec<f64> = reports.iter().map(|r| f(&r.norms)).collect();
        loglog_slope(&lambdas, &ys).unwrap_or(f64::NAN)
    };
    let fitted = [
        fit(|n| n.norm_b_l1_1),
        fit(|n| n.norm_pr_a_l1_1),
        fit(|n| n.norm_pd_a_l1_1),
    ];
    let predicted = apriori_exponents(m);
    let pass = fitted
        .iter()
        .zip(&predicted)
        .all(|(f, p)| *f <= p + tolerance);
    Ok(AprioriSweep {
        lambdas,
        reports,
        fitted,
        predicted,
        tolerance,
        pass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Target `||residual||_{l1}`; `None` means `1e-10 max(1, lambda)`.
    pub tol: Option<f64>,
    pub max_steps: usize,
    /// Estimates of `||J^{-1}||` above this raise the near-singular flag.
    pub singular_threshold: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: None,
            max_steps: 50,
            singular_threshold: 1e3,
        }
    }
}

impl NewtonOptions {
    pub fn tolerance(&self, params: &GridParams) -> f64 {
        self.tol.unwrap_or_else(|| 1e-10 * params.lambda.max(1.0))
    }
}

#[derive(Clone, Debug)]
pub struct NewtonResult {
    pub u: VectorField,
    pub steps: usize,
    /// l1 residual before each step and after the last.
    pub residuals: Vec<f64>,
    /// Lower estimate of `||J^{-1}||_2` at the returned point.
    pub inverse_norm_estimate: f64,
    pub near_singular: bool,
}

/// Lower estimate of `||J^{-1}||_2` by a few steps of inverse iteration.
fn inverse_norm_estimate(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, dim: usize) -> f64 {
    // deterministic start vector with energy in every coordinate
    let mut x = DVector::from_fn(dim, |i, _| 1.0 + ((i * 7919) % 13) as f64 / 13.0);
    x /= x.norm();
    let mut est: f64 = 0.0;
    for _ in 0..8 {
        let Some(y) = lu.solve(&x) else {
            return f64::INFINITY;
        };
        let g = y.norm();
        if !g.is_finite() || g == 0.0 {
            return f64::INFINITY;
        }
        est = est.max(g);
        x = y / g;
    }
    est
}

pub fn newton_refine(
    u0: &VectorField,
    params: &GridParams,
    opts: NewtonOptions,
) -> Result<NewtonResult> {
    params.validate()?;
    let tol = opts.tolerance(params);
    let mut u = u0.clone().with_params(*params);
    let mut residuals = Vec::new();
    for steps in 0..=opts.max_steps {
        let r = residual(&u, params);
        let rn = r.l1();
        residuals.push(rn);
        let j = jacobian(&u, params);
        let lu = j.lu();
        if rn <= tol {
            let est = inverse_norm_estimate(&lu, u.dim());
            return Ok(NewtonResult {
                u,
                steps,
                residuals,
                inverse_norm_estimate: est,
                near_singular: est > opts.singular_threshold,
            });
        }
        if !rn.is_finite() || steps == opts.max_steps {
            break;
        }
        let rhs = DVector::from_vec(r.to_vec());
        let delta = lu.solve(&rhs).ok_or(Error::SingularJacobian {
            lambda: params.lambda,
        })?;
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularJacobian {
                lambda: params.lambda,
            });
        }
        let next: Vec<f64> = u
            .to_vec()
            .iter()
            .zip(delta.iter())
            .map(|(x, d)| x - d)
            .collect();
        u = VectorField::from_vec(*params, &next)?;
    }
    Err(Error::NewtonFailure {
        steps: opts.max_steps,
        residual: *residuals.last().unwrap_or(&f64::NAN),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub fixed_point: FixedPointOptions,
    pub newton: NewtonOptions,
}

#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub u1: VectorField,
    pub u2: VectorField,
    pub residual_l1: [f64; 2],
    pub newton_steps: [usize; 2],
    /// `||u1 - u2||_{l1}`
    pub separation: f64,
    /// Set when the two roots are not separated by `lambda / 2`: below the
    /// bifurcation both starting points refine to the same symmetric root.
    pub merged: bool,
    pub fixed_point: FixedPointResult,
}

/// Refines the fixed-point output into `u1` and its `S`-image into `u2`.
pub fn assemble_from(fp: FixedPointResult, opts: NewtonOptions) -> Result<SolutionPair> {
    let params = fp.linearization.params;
    let r1 = newton_refine(&fp.solution(), &params, opts)?;
    let r2 = newton_refine(&apply_symmetry(&r1.u, Symmetry::S), &params, opts)?;
    let separation = r1.u.axpy(-1.0, &r2.u).l1();
    let merged = params.lambda > 0.0 && separation < params.lambda / 2.0;
    Ok(SolutionPair {
        residual_l1: [*r1.residuals.last().unwrap(), *r2.residuals.last().unwrap()],
        newton_steps: [r1.steps, r2.steps],
        u1: r1.u,
        u2: r2.u,
        separation,
        merged,
        fixed_point: fp,
    })
}

/// Fixed-point construction followed by Newton refinement of both solutions.
pub fn assemble_solutions(params: &GridParams, opts: SolveOptions) -> Result<SolutionPair> {
    let fp = fixed_point_iterate(params, opts.fixed_point)?;
    if let IterationStatus::Diverged(reason) = &fp.status {
        return Err(Error::Divergence(reason.clone()));
    }
    if fp.status == IterationStatus::MaxIterations {
        return Err(Error::Divergence(format!(
            "no convergence within {} steps",
            opts.fixed_point.max_iter
        )));
    }
    assemble_from(fp, opts.newton)
}

/// `||u - lambda (sin y, 0)||_{l-infinity}`
pub fn remainder_linf(u: &VectorField) -> Result<f64> {
    u.axpy(-1.0, &dominant_part(&u.params)).norm(NormKind::LInf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, m: f64, lambda: f64) -> GridParams {
        GridParams::new(n, m, lambda).unwrap()
    }

    #[test]
    fn residual_of_shear_flow() {
        let params = p(6, 6.0, 3.0);
        let r = residual(&dominant_part(&params), &params);
        assert_eq!(r.u1, SineField::zeros(6));
        assert_eq!(r.u2, SineField::from_modes(6, &[((1, 0), -3.0)]));
        let z = p(4, 2.0, 0.0);
        assert_eq!(residual(&VectorField::zeros(z), &z).l1(), 0.0);
    }

    #[test]
    fn jacobian_at_zero_is_laplacian() {
        let params = p(3, 2.0, 5.0);
        let j = jacobian(&VectorField::zeros(params), &params);
        let lat = crate::spectral::Lattice::new(3);
        for r in 0..j.nrows() {
            for c in 0..j.ncols() {
                let (k1, k2) = lat.mode(r % lat.len());
                let want = if r == c {
                    params.laplacian(k1, k2)
                } else {
                    0.0
                };
                assert_eq!(j[(r, c)], want);
            }
        }
    }

    #[test]
    fn zero_lambda_fixed_point() {
        let fp = fixed_point_iterate(&p(8, 6.0, 0.0), FixedPointOptions::default()).unwrap();
        assert!(fp.converged());
        assert_eq!(fp.trace.len(), 1);
        assert_eq!(fp.remainder.as_field().l1(), 0.0);
        let rep = apriori_monitor(&fp.remainder).unwrap();
        assert_eq!(rep.norms, AprioriNorms::default());
    }

    #[test]
    fn newton_keeps_an_exact_root() {
        let params = p(4, 6.0, 0.0);
        let u = VectorField::zeros(params);
        let res = newton_refine(&u, &params, NewtonOptions::default()).unwrap();
        assert_eq!(res.steps, 0);
        assert_eq!(res.u, u);
    }

    #[test]
    fn small_lambda_merges() {
        let pair = assemble_solutions(&p(8, 6.0, 1.0), SolveOptions::default()).unwrap();
        assert!(pair.merged);
    }
}
