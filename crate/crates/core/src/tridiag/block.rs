use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::GridParams;

/// Relative pivot threshold of the elimination sweep, applied to the scale
/// `max(|d_i|, |sub|, |sup|)` of the pivot's own row.
pub const PIVOT_TOL: f64 = 1e-13;

/// A tridiagonal matrix with constant off-diagonals.
///
/// Row `i` corresponds to the mode `(l, first_j + i)`; `sub` multiplies the
/// unknown one row above (`x[i-1]`) and `sup` the one below (`x[i+1]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalBlock {
    pub l: usize,
    pub first_j: i32,
    pub diag: Vec<f64>,
    pub sub: f64,
    pub sup: f64,
}

fn check_l(l: i64, params: &GridParams) -> Result<usize> {
    if l < 0 || l as usize > params.n {
        return Err(Error::BlockIndex { l, n: params.n });
    }
    Ok(l as usize)
}

/// The block of `L` on `H^l` acting on `(c_(l,0), ..., c_(l,N))`: diagonal
/// `d_j = l^(2m) + j^(2m)` (or `(l^2 + j^2)^m`), sub-diagonal `+l lambda`,
/// super-diagonal `-l lambda`. For `l = 0` the block is `diag(j^(2m))`, `j = 1..=N`.
pub fn build_block(l: i64, params: &GridParams) -> Result<TridiagonalBlock> {
    let l = check_l(l, params)?;
    let n = params.n as i32;
    let first_j = if l == 0 { 1 } else { 0 };
    let diag = (first_j..=n)
        .map(|j| params.laplacian(l as i32, j))
        .collect();
    let off = if l == 0 {
        0.0
    } else {
        l as f64 * params.lambda
    };
    Ok(TridiagonalBlock {
        l,
        first_j,
        diag,
        sub: off,
        sup: -off,
    })
}

/// The block of `lambda sin y d_x + (-Delta)^m` on the sine amplitudes
/// `c_(l,j)`, `j = -N..=N`, in lattice storage order (`j = 1..=N` for `l = 0`).
///
/// `sin y cos(lx + jy)` splits into `sin(lx + (j+1)y)` and `-sin(lx + (j-1)y)`
/// with weight 1/2 each, so the off-diagonals are `+-l lambda / 2`.
pub fn operator_block(l: i64, params: &GridParams) -> Result<TridiagonalBlock> {
    let l = check_l(l, params)?;
    let n = params.n as i32;
    let first_j = if l == 0 { 1 } else { -n };
    let diag = (first_j..=n)
        .map(|j| params.laplacian(l as i32, j))
        .collect();
    let off = if l == 0 {
        0.0
    } else {
        0.5 * l as f64 * params.lambda
    };
    Ok(TridiagonalBlock {
        l,
        first_j,
        diag,
        sub: off,
        sup: -off,
    })
}

impl TridiagonalBlock {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Thomas elimination. The pivots are `d_j - sub*sup / p_(j-1)`, which
    /// stay above `d_j` for the rotation blocks since `sub*sup <= 0`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.size();
        if rhs.len() != n {
            return Err(Error::InvalidInput(format!(
                "rhs has length {}, block has size {n}",
                rhs.len()
            )));
        }
        let off = self.sub.abs().max(self.sup.abs());
        let mut upper = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut prev_u = 0.0;
        let mut prev_y = 0.0;
        for i in 0..n {
            let (p, r) = if i == 0 {
                (self.diag[0], rhs[0])
            } else {
                (self.diag[i] - self.sub * prev_u, rhs[i] - self.sub * prev_y)
            };
            let threshold = PIVOT_TOL * self.diag[i].abs().max(off);
            if !(p.abs() > threshold) {
                return Err(Error::Conditioning {
                    row: i,
                    pivot: p,
                    threshold,
                });
            }
            upper[i] = self.sup / p;
            y[i] = r / p;
            prev_u = upper[i];
            prev_y = y[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= upper[i] * y[i + 1];
        }
        Ok(y)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        assert_eq!(x.len(), n, "vector length does not match block size");
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub * x[i - 1];
                }
                if i + 1 < n {
                    v += self.sup * x[i + 1];
                }
                v
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |i, j| match j as isize - i as isize {
            0 => self.diag[i],
            -1 => self.sub,
            1 => self.sup,
            _ => 0.0,
        })
    }

    /// The inverse, column `j` being the solution against `e_j`.
    pub fn inverse_columns(&self) -> Result<DMatrix<f64>> {
        let n = self.size();
        let mut inv = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e)?;
            inv.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        Ok(inv)
    }
}

/// Norms of an inverse block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorms {
    /// Largest absolute column sum.
    pub l1_to_l1: f64,
    /// Largest absolute entry.
    pub l1_to_linf: f64,
    /// Largest column sum weighted by `l + k` on row `k` (the gradient norm).
    pub l1_to_l1_1: f64,
}

impl OperatorNorms {
    /// Norms of a matrix acting on block `l`, rows indexed by `k = 0, 1, ...`.
    pub fn of_matrix(a: &DMatrix<f64>, l: usize) -> Self {
        let mut out = OperatorNorms {
            l1_to_l1: 0.0,
            l1_to_linf: 0.0,
            l1_to_l1_1: 0.0,
        };
        for col in a.column_iter() {
            let (mut sum, mut grad) = (0.0, 0.0);
            for (k, v) in col.iter().enumerate() {
                let v = v.abs();
                sum += v;
                grad += (l + k) as f64 * v;
                out.l1_to_linf = out.l1_to_linf.max(v);
            }
            out.l1_to_l1 = out.l1_to_l1.max(sum);
            out.l1_to_l1_1 = out.l1_to_l1_1.max(grad);
        }
        out
    }

    /// Componentwise maximum.
    pub fn max(self, other: OperatorNorms) -> OperatorNorms {
        OperatorNorms {
            l1_to_l1: self.l1_to_l1.max(other.l1_to_l1),
            l1_to_linf: self.l1_to_linf.max(other.l1_to_linf),
            l1_to_l1_1: self.l1_to_l1_1.max(other.l1_to_l1_1),
        }
    }
}

/// Norms of the inverse of one block.
pub fn operator_norms(block: &TridiagonalBlock) -> Result<OperatorNorms> {
    Ok(OperatorNorms::of_matrix(&block.inverse_columns()?, block.l))
}

/// Norms of the inverse of the whole operator on `H^1 + ... + H^N`: the
/// maximum over its blocks.
pub fn full_operator_norms(params: &GridParams) -> Result<OperatorNorms> {
    let mut acc = OperatorNorms {
        l1_to_l1: 0.0,
        l1_to_linf: 0.0,
        l1_to_l1_1: 0.0,
    };
    for l in 1..=params.n {
        acc = acc.max(operator_norms(&build_block(l as i64, params)?)?);
    }
    Ok(acc)
}

/// Largest ratio `|x_(r+1)| / |x_r|` along the columns of `inv`, over rows
/// past `ceil(2^((2m+1)/2m) (l lambda)^(1/2m))` and below the diagonal.
pub fn geometric_decay_ratio(inv: &DMatrix<f64>, l: usize, m: f64, lambda: f64) -> f64 {
    let start = (2f64.powf((2.0 * m + 1.0) / (2.0 * m)) * (l as f64 * lambda).powf(1.0 / (2.0 * m)))
        .ceil() as usize;
    let n = inv.nrows();
    let mut worst: f64 = 0.0;
    for c in 0..inv.ncols() {
        for r in start.max(c + 1)..n.saturating_sub(1) {
            let (a, b) = (inv[(r, c)].abs(), inv[(r + 1, c)].abs());
            if a > 1e-300 {
                worst = worst.max(b / a);
            }
        }
    }
    worst
}
