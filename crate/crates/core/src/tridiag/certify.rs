use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::block::{build_block, OperatorNorms};
use super::sequences::bound_sequences;
use crate::error::{Error, Result};
use crate::spectral::GridParams;
use crate::stats::loglog_slope;

/// One `(params, l)` grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertPoint {
    pub params: GridParams,
    pub l: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertOptions {
    /// Allowed deviation of a fitted exponent from its prediction.
    pub slope_tolerance: f64,
    /// Allowed relative change of the norms from `N` to `2N`.
    pub n_tolerance: f64,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions {
            slope_tolerance: 0.05,
            n_tolerance: 0.01,
        }
    }
}

/// Count of inverse entries above `1/(l lambda)`, by (row, column) parity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityPattern {
    pub even_even: usize,
    pub even_odd: usize,
    pub odd_even: usize,
    pub odd_odd: usize,
}

impl ParityPattern {
    pub fn total(&self) -> usize {
        self.even_even + self.even_odd + self.odd_even + self.odd_odd
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertRow {
    pub l: usize,
    pub m: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub max_entry: f64,
    pub bound: f64,
    pub l1_norm: f64,
    pub grad_norm: f64,
    pub sequences_pass: bool,
    /// Entries exceeding the refined bound `1/(l lambda)`.
    pub refined_exceedances: ParityPattern,
    /// Relative change of `(l1_norm, grad_norm)` when `N` is doubled.
    pub doubled_n_rel_diff: [f64; 2],
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub l1_to_linf: f64,
    pub l1_to_l1: f64,
    pub gradient: f64,
}

impl Exponents {
    pub fn predicted(m: f64) -> Self {
        Exponents {
            l1_to_linf: -1.0,
            l1_to_l1: -1.0 + 1.0 / (2.0 * m),
            gradient: -1.0 + 1.0 / m,
        }
    }

    fn max_deviation(&self, other: &Exponents) -> f64 {
        (self.l1_to_linf - other.l1_to_linf)
            .abs()
            .max((self.l1_to_l1 - other.l1_to_l1).abs())
            .max((self.gradient - other.gradient).abs())
    }
}

/// Exponent fit over the lambdas of one `(m, l, N)` group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub m: f64,
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub fitted: Exponents,
    pub expected: Exponents,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertSummary {
    pub fitted_slopes: Vec<SlopeFit>,
    pub tolerance: f64,
    pub hard_violations: usize,
    pub max_doubled_n_rel_diff: f64,
    pub refined_bound_exceedances: usize,
    pub warnings: Vec<String>,
    /// True iff every hard inequality (entry bound, sequence bounds) holds.
    pub overall_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub rows: Vec<CertRow>,
    pub summary: CertSummary,
}

impl CertificationReport {
    /// First row failing a hard inequality.
    pub fn first_violation(&self) -> Option<&CertRow> {
        self.rows.iter().find(|r| !r.pass)
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn certify_point(pt: &CertPoint) -> Result<CertRow> {
    let p = pt.params;
    let inv = build_block(pt.l as i64, &p)?.inverse_columns()?;
    let norms = OperatorNorms::of_matrix(&inv, pt.l);
    let big = pt.l as f64 * p.lambda;
    let bound = 2f64.powf(2.0 * p.m) / big;
    let refined = 1.0 / big;
    let mut pattern = ParityPattern::default();
    for ((r, c), v) in (0..inv.ncols())
        .flat_map(|c| (0..inv.nrows()).map(move |r| (r, c)))
        .zip(inv.iter())
    {
        if v.abs() > refined {
            match (r % 2, c % 2) {
                (0, 0) => pattern.even_even += 1,
                (0, _) => pattern.even_odd += 1,
                (_, 0) => pattern.odd_even += 1,
                _ => pattern.odd_odd += 1,
            }
        }
    }
    let doubled = build_block(pt.l as i64, &p.with_n(2 * p.n))?.inverse_columns()?;
    let dn = OperatorNorms::of_matrix(&doubled, pt.l);
    let sequences_pass = match bound_sequences(pt.l, &p) {
        Ok(_) => true,
        Err(Error::Certification(_)) => false,
        Err(e) => return Err(e),
    };
    let entry_pass = norms.l1_to_linf <= bound;
    Ok(CertRow {
        l: pt.l,
        m: p.m,
        lambda: p.lambda,
        n: p.n,
        max_entry: norms.l1_to_linf,
        bound,
        l1_norm: norms.l1_to_l1,
        grad_norm: norms.l1_to_l1_1,
        sequences_pass,
        refined_exceedances: pattern,
        doubled_n_rel_diff: [
            rel_diff(norms.l1_to_l1, dn.l1_to_l1),
            rel_diff(norms.l1_to_l1_1, dn.l1_to_l1_1),
        ],
        pass: entry_pass && sequences_pass,
    })
}

/// Certifies the inverse bounds of the rotation blocks over a grid.
///
/// Grid points are processed in parallel; rows come back in input order and
/// every reduction runs sequentially over them, so the report is deterministic.
pub fn certify_bounds(points: &[CertPoint], opts: CertOptions) -> Result<CertificationReport> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty certification grid".into()));
    }
    for pt in points {
        pt.params.validate()?;
        if !(pt.params.lambda > 1.0) || pt.l < 1 || pt.l > pt.params.n {
            return Err(Error::InvalidParams(format!(
                "certification needs lambda > 1 and 1 <= l <= N (got l = {}, lambda = {}, N = {})",
                pt.l, pt.params.lambda, pt.params.n
            )));
        }
    }
    let rows = points
        .par_iter()
        .map(certify_point)
        .collect::<Result<Vec<_>>>()?;

    type Key = (u64, usize, usize, u8);
    let mut groups: BTreeMap<Key, Vec<usize>> = BTreeMap::new();
    for (i, pt) in points.iter().enumerate() {
        let key = (
            pt.params.m.to_bits(),
            pt.l,
            pt.params.n,
            pt.params.variant as u8,
        );
        groups.entry(key).or_default().push(i);
    }
    let mut keys: Vec<Key> = groups.keys().copied().collect();
    keys.sort_by(|a, b| {
        f64::from_bits(a.0)
            .total_cmp(&f64::from_bits(b.0))
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });

    let mut warnings = Vec::new();
    let mut fitted_slopes = Vec::new();
    for key in keys {
        let idx = &groups[&key];
        let mut members: Vec<&CertRow> = idx.iter().map(|&i| &rows[i]).collect();
        members.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        members.dedup_by(|a, b| a.lambda == b.lambda);
        if members.len() < 2 {
            continue;
        }
        let lambdas: Vec<f64> = members.iter().map(|r| r.lambda).collect();
        let fit = |f: fn(&CertRow) -> f64| {
            let ys: Vec<f64> = members.iter().map(|r| f(r)).collect();
            loglog_slope(&lambdas, &ys).unwrap_or(f64::NAN)
        };
        let fitted = Exponents {
            l1_to_linf: fit(|r| r.max_entry),
            l1_to_l1: fit(|r| r.l1_norm),
            gradient: fit(|r| r.grad_norm),
        };
        let m = f64::from_bits(key.0);
        let expected = Exponents::predicted(m);
        let within_tolerance = expected.max_deviation(&fitted) <= opts.slope_tolerance;
        if !within_tolerance {
            warnings.push(format!(
                "m = {m}, l = {}, N = {}: fitted exponents ({:.4}, {:.4}, {:.4}) vs predicted ({:.4}, {:.4}, {:.4})",
                key.1,
                key.2,
                fitted.l1_to_linf,
                fitted.l1_to_l1,
                fitted.gradient,
                expected.l1_to_linf,
                expected.l1_to_l1,
                expected.gradient
            ));
        }
        fitted_slopes.push(SlopeFit {
            m,
            l: key.1,
            n: key.2,
            lambdas,
            fitted,
            expected,
            within_tolerance,
        });
    }

    let max_doubled_n_rel_diff = rows
        .iter()
        .flat_map(|r| r.doubled_n_rel_diff)
        .fold(0.0, f64::max);
    if max_doubled_n_rel_diff > opts.n_tolerance {
        warnings.push(format!(
            "norms change by up to {:.3e} relative when N is doubled",
            max_doubled_n_rel_diff
        ));
    }
    let hard_violations = rows.iter().filter(|r| !r.pass).count();
    let summary = CertSummary {
        fitted_slopes,
        tolerance: opts.slope_tolerance,
        hard_violations,
        max_doubled_n_rel_diff,
        refined_bound_exceedances: rows.iter().map(|r| r.refined_exceedances.total()).sum(),
        warnings,
        overall_pass: hard_violations == 0,
    };
    Ok(CertificationReport { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(n: usize, m: f64, lambda: f64, l: usize) -> CertPoint {
        CertPoint {
            params: GridParams::new(n, m, lambda).unwrap(),
            l,
        }
    }

    #[test]
    fn small_grid_passes() {
        let grid: Vec<CertPoint> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&lam| pt(16, 2.0, lam, 1))
            .collect();
        let report = certify_bounds(&grid, CertOptions::default()).unwrap();
        assert!(report.summary.overall_pass);
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.summary.fitted_slopes.len(), 1);
        assert!((report.summary.fitted_slopes[0].fitted.l1_to_linf + 1.0).abs() < 0.05);
        assert!(report.first_violation().is_none());
    }

    #[test]
    fn rejects_small_lambda_and_empty_grid() {
        assert!(certify_bounds(&[pt(8, 2.0, 1.0, 1)], CertOptions::default()).is_err());
        assert!(certify_bounds(&[pt(8, 2.0, 10.0, 0)], CertOptions::default()).is_err());
        assert!(certify_bounds(&[], CertOptions::default()).is_err());
    }

    #[test]
    fn report_is_deterministic() {
        let grid: Vec<CertPoint> = [4.0, 2.0]
            .iter()
            .flat_map(|&m| [1e3, 1e2].map(|lam| pt(12, m, lam, 2)))
            .collect();
        let a =
            serde_json::to_string(&certify_bounds(&grid, CertOptions::default()).unwrap()).unwrap();
        let b =
            serde_json::to_string(&certify_bounds(&grid, CertOptions::default()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
