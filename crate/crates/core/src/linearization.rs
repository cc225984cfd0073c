//! The linearized pair `(A, B)`:
//!
//! ```text
//! lambda sin y d_x A + (-Delta)^m A = -lambda cos y B
//! lambda sin y d_x B + (-Delta)^m B =  lambda sin x
//! ```
//!
//! Both right-hand sides live in `H^1` (x-frequency one), and so do `A` and `B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    apply_symmetry, nonlinear_term, sp_defect, GridParams, NormKind, SineField, Symmetry,
    VectorField,
};
use crate::stats::{decades, loglog_slope};
use crate::tridiag::LinearizedOperator;

/// `cos y * f`, each `sin(k.x)` going to `(sin((k1, k2+1).x) + sin((k1, k2-1).x)) / 2`;
/// modes leaving the lattice are dropped.
pub fn cos_y_product(f: &SineField) -> SineField {
    let mut out = SineField::zeros(f.n());
    for (k1, k2, c) in f.nonzero_modes() {
        out.add(k1, k2 + 1, 0.5 * c);
        out.add(k1, k2 - 1, 0.5 * c);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationPair {
    pub a: SineField,
    pub b: SineField,
    pub params: GridParams,
    /// l1 residuals of the `A` and `B` equations.
    pub residual_a: f64,
    pub residual_b: f64,
}

impl LinearizationPair {
    /// `(A, B)` as a vector field.
    pub fn as_field(&self) -> VectorField {
        VectorField {
            u1: self.a.clone(),
            u2: self.b.clone(),
            params: self.params,
        }
    }
}

pub fn sin_x(n: usize) -> SineField {
    SineField::from_modes(n, &[((1, 0), 1.0)])
}

pub fn solve_linearization(params: &GridParams) -> Result<LinearizationPair> {
    params.validate()?;
    let n = params.n;
    if params.lambda == 0.0 {
        let z = SineField::zeros(n);
        return Ok(LinearizationPair {
            a: z.clone(),
            b: z,
            params: *params,
            residual_a: 0.0,
            residual_b: 0.0,
        });
    }
    if n < 2 {
        return Err(Error::InvalidParams(
            "the linearization needs N >= 2".into(),
        ));
    }
    let op = LinearizedOperator::new(params)?;
    let lam = params.lambda;
    let rhs_b = sin_x(n).scaled(lam);
    let b = op.solve(&rhs_b)?;
    let rhs_a = cos_y_product(&b).scaled(-lam);
    let a = op.solve(&rhs_a)?;
    let residual_b = op.apply(&b)?.axpy(-1.0, &rhs_b).norm(NormKind::L1)?;
    let residual_a = op.apply(&a)?.axpy(-1.0, &rhs_a).norm(NormKind::L1)?;
    Ok(LinearizationPair {
        a,
        b,
        params: *params,
        residual_a,
        residual_b,
    })
}

/// Whether `(A, B)` lies in the space fixed by `S'` and constrained by `d_x u1 = d_y u2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `max |S'(A,B) - (A,B)|`
    pub sprime_defect: f64,
    /// `max_k |k1 A_k - k2 B_k|`
    pub sp_defect: f64,
    /// Largest amplitude of the pair, for scale.
    pub scale: f64,
}

pub fn symmetry_report(pair: &LinearizationPair) -> SymmetryReport {
    let u = pair.as_field();
    SymmetryReport {
        sprime_defect: apply_symmetry(&u, Symmetry::SPrime).max_abs_diff(&u),
        sp_defect: sp_defect(&u),
        scale: pair.a.max_abs().max(pair.b.max_abs()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub norm_name: String,
    pub predicted_exponent: f64,
    pub fitted_exponent: f64,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    /// `fitted <= predicted + tolerance`: the predictions are upper bounds.
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub m: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub tolerance: f64,
    pub rows: Vec<ScalingRow>,
    pub max_residual: f64,
}

impl ScalingReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&ScalingRow> {
        self.rows.iter().find(|r| r.norm_name == name)
    }
}

pub const SCALING_TOLERANCE: f64 = 0.05;

/// Fits the lambda-exponents of the norms of `(A, B)` and of the advection
/// terms `(A,B).grad A`, `(A,B).grad B`.
///
/// Needs at least four lambdas spanning three decades at a common `(m, N)`.
pub fn scaling_table(params_list: &[GridParams]) -> Result<ScalingReport> {
    if params_list.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 lambda values, got {}",
            params_list.len()
        )));
    }
    let first = params_list[0];
    if params_list
        .iter()
        .any(|p| p.m != first.m || p.n != first.n || p.variant != first.variant)
    {
        return Err(Error::InvalidInput(
            "scaling table needs a common (m, N, variant)".into(),
        ));
    }
    let lambdas: Vec<f64> = params_list.iter().map(|p| p.lambda).collect();
    if lambdas.iter().any(|l| !(*l > 0.0)) || decades(&lambdas) < 3.0 - 1e-9 {
        return Err(Error::InvalidInput(
            "lambdas must be positive and span at least 3 decades".into(),
        ));
    }
    let m = first.m;
    let specs: [(&str, f64); 9] = [
        ("B_l1", 1.0 / (2.0 * m)),
        ("A_l1", 1.0 / m),
        ("B_l1_1", 1.0 / m),
        ("A_l1_1", 3.0 / (2.0 * m)),
        ("B_linf", 0.0),
        ("A_linf", 1.0 / (2.0 * m)),
        ("AB_grad_A_l1", 5.0 / (2.0 * m)),
        ("AB_grad_B_l1", 2.0 / m),
        ("AB_grad_A_linf", 2.0 / m),
    ];
    let mut values = vec![Vec::with_capacity(lambdas.len()); specs.len()];
    let mut max_residual: f64 = 0.0;
    for p in params_list {
        let pair = solve_linearization(p)?;
        max_residual = max_residual.max((pair.residual_a + pair.residual_b) / p.lambda);
        let adv = nonlinear_term(&pair.as_field());
        let row = [
            pair.b.norm(NormKind::L1)?,
            pair.a.norm(NormKind::L1)?,
            pair.b.norm(NormKind::L1_1)?,
            pair.a.norm(NormKind::L1_1)?,
            pair.b.norm(NormKind::LInf)?,
            pair.a.norm(NormKind::LInf)?,
            adv.u1.norm(NormKind::L1)?,
            adv.u2.norm(NormKind::L1)?,
            adv.u1.norm(NormKind::LInf)?,
        ];
        for (v, x) in values.iter_mut().zip(row) {
            v.push(x);
        }
    }
    let rows = specs
        .iter()
        .zip(values)
        .map(|(&(name, predicted), vals)| {
            let fitted = loglog_slope(&lambdas, &vals).unwrap_or(f64::NAN);
            ScalingRow {
                norm_name: name.to_string(),
                predicted_exponent: predicted,
                fitted_exponent: fitted,
                lambdas: lambdas.clone(),
                values: vals,
                pass: fitted <= predicted + SCALING_TOLERANCE,
            }
        })
        .collect();
    Ok(ScalingReport {
        m,
        n: first.n,
        tolerance: SCALING_TOLERANCE,
        rows,
        max_residual,
    })
}
