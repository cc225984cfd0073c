use serde::{Deserialize, Serialize};

use super::lattice::{Lattice, Mode};
use super::params::{int_pow, GridParams};
use crate::error::{Error, Result};

/// Norms over the full exponential coefficient set `{a_k, a_{-k}}`.
///
/// A sine amplitude `c` contributes `|c|` to `L1`, `(|k1|+|k2|) |c|` to `L1_1`
/// and `|c|/2` per exponential entry to the supremum norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    L1,
    L1_1,
    LInf,
    /// `sup (|k1|+|k2|)^p |a_k|`
    LInfP(f64),
    /// `sup k2^(2m) |a_(0,k2)|`, only defined for x-independent fields. Carries `m`.
    LInf2M(f64),
}

/// Which projection: `R` keeps `k1 != 0`, `D` keeps the x-independent modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    R,
    D,
}

/// One scalar field as sine amplitudes on the half-lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SineField {
    lattice: Lattice,
    coeffs: Vec<f64>,
}

impl SineField {
    pub fn zeros(n: usize) -> Self {
        let lattice = Lattice::new(n);
        SineField {
            lattice,
            coeffs: vec![0.0; lattice.len()],
        }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        let lattice = Lattice::new(n);
        if coeffs.len() != lattice.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients for N = {n}, got {}",
                lattice.len(),
                coeffs.len()
            )));
        }
        Ok(SineField { lattice, coeffs })
    }

    /// Field from `(mode, amplitude)` pairs; modes in the negative half are folded.
    pub fn from_modes(n: usize, modes: &[(Mode, f64)]) -> Self {
        let mut f = SineField::zeros(n);
        for &((k1, k2), c) in modes {
            f.add(k1, k2, c);
        }
        f
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Signed amplitude at any `k`: `c_k` on the half-lattice, `-c_{-k}` on the
    /// other half, zero outside the truncation. Equals `2i a_k`.
    pub fn get(&self, k1: i32, k2: i32) -> f64 {
        match self.lattice.locate(k1, k2) {
            Some((i, s)) => s * self.coeffs[i],
            None => 0.0,
        }
    }

    /// Sets the signed amplitude at `k`. Returns `false` when `k` is outside the lattice.
    pub fn set(&mut self, k1: i32, k2: i32, value: f64) -> bool {
        match self.lattice.locate(k1, k2) {
            Some((i, s)) => {
                self.coeffs[i] = s * value;
                true
            }
            None => false,
        }
    }

    /// Adds `value sin(k1 x + k2 y)`; dropped when `k` is zero or outside the lattice.
    #[inline]
    pub fn add(&mut self, k1: i32, k2: i32, value: f64) {
        if let Some((i, s)) = self.lattice.locate(k1, k2) {
            self.coeffs[i] += s * value;
        }
    }

    /// Nonzero amplitudes as `(k1, k2, c)`.
    pub fn nonzero_modes(&self) -> Vec<(i32, i32, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, &c)| {
                let (k1, k2) = self.lattice.mode(i);
                (k1, k2, c)
            })
            .collect()
    }

    pub fn scaled(&self, alpha: f64) -> SineField {
        SineField {
            lattice: self.lattice,
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
        }
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &SineField) -> SineField {
        assert_eq!(self.lattice, other.lattice, "fields on different lattices");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + alpha * b)
            .collect();
        SineField {
            lattice: self.lattice,
            coeffs,
        }
    }

    pub fn project(&self, part: Part) -> SineField {
        let d = self.lattice.block_range(0);
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| match (part, d.contains(&i)) {
                (Part::D, true) | (Part::R, false) => c,
                _ => 0.0,
            })
            .collect();
        SineField {
            lattice: self.lattice,
            coeffs,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        let modes = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.lattice.mode(i), c.abs()));
        let value = match kind {
            NormKind::L1 => self.coeffs.iter().map(|c| c.abs()).sum(),
            NormKind::L1_1 => modes
                .map(|((k1, k2), c)| (k1.abs() + k2.abs()) as f64 * c)
                .sum(),
            NormKind::LInf => 0.5 * self.max_abs(),
            NormKind::LInfP(p) => modes
                .map(|((k1, k2), c)| int_pow(k1.abs() + k2.abs(), p) * 0.5 * c)
                .fold(0.0, f64::max),
            NormKind::LInf2M(m) => {
                let d = self.lattice.block_range(0);
                if self.coeffs[d.end..].iter().any(|c| *c != 0.0) {
                    return Err(Error::NormDomain { norm: "l^inf_2m" });
                }
                modes
                    .take(d.end)
                    .map(|((_, k2), c)| int_pow(k2.abs(), 2.0 * m) * 0.5 * c)
                    .fold(0.0, f64::max)
            }
        };
        Ok(value)
    }

    /// Per-block coefficient vectors of the `H^l` decomposition.
    pub fn block_split(&self) -> Vec<HBlock> {
        let n = self.n() as i32;
        (0..=self.n())
            .map(|l| {
                let li = l as i32;
                if l == 0 {
                    HBlock {
                        l,
                        plus: (1..=n).map(|j| self.get(0, j)).collect(),
                        minus: Vec::new(),
                    }
                } else {
                    HBlock {
                        l,
                        plus: (0..=n).map(|j| self.get(li, j)).collect(),
                        minus: (1..=n).map(|j| self.get(-li, j)).collect(),
                    }
                }
            })
            .collect()
    }

    /// Inverse of [`SineField::block_split`].
    pub fn block_assemble(n: usize, blocks: &[HBlock]) -> Result<SineField> {
        if blocks.len() != n + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} blocks, got {}",
                n + 1,
                blocks.len()
            )));
        }
        let mut f = SineField::zeros(n);
        for (l, b) in blocks.iter().enumerate() {
            let li = l as i32;
            let (plus_len, minus_len) = if l == 0 { (n, 0) } else { (n + 1, n) };
            if b.l != l || b.plus.len() != plus_len || b.minus.len() != minus_len {
                return Err(Error::InvalidInput(format!("malformed block {l}")));
            }
            let j0 = if l == 0 { 1 } else { 0 };
            for (j, &c) in b.plus.iter().enumerate() {
                f.set(li, j as i32 + j0, c);
            }
            for (j, &c) in b.minus.iter().enumerate() {
                f.set(-li, j as i32 + 1, c);
            }
        }
        Ok(f)
    }
}

/// Coefficients of one invariant subspace `H^l`.
///
/// `plus[j]` is the amplitude of `sin(l x + j y)` (`j = 0..=N`, or `1..=N` for
/// `l = 0`); `minus[j-1]` that of `sin(-l x + j y)` for `j = 1..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct HBlock {
    pub l: usize,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

/// The pair `(u1, u2)` with its grid parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub u1: SineField,
    pub u2: SineField,
    pub params: GridParams,
}

impl VectorField {
    pub fn zeros(params: GridParams) -> Self {
        VectorField {
            u1: SineField::zeros(params.n),
            u2: SineField::zeros(params.n),
            params,
        }
    }

    pub fn new(u1: SineField, u2: SineField, params: GridParams) -> Result<Self> {
        if u1.n() != params.n || u2.n() != params.n {
            return Err(Error::InvalidInput(
                "components must share the lattice bound N".into(),
            ));
        }
        Ok(VectorField { u1, u2, params })
    }

    /// Unpacks a stacked `[u1; u2]` coefficient vector.
    pub fn from_vec(params: GridParams, v: &[f64]) -> Result<Self> {
        let len = Lattice::new(params.n).len();
        if v.len() != 2 * len {
            return Err(Error::InvalidInput(format!(
                "expected {} unknowns, got {}",
                2 * len,
                v.len()
            )));
        }
        Ok(VectorField {
            u1: SineField::from_coeffs(params.n, v[..len].to_vec())?,
            u2: SineField::from_coeffs(params.n, v[len..].to_vec())?,
            params,
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.u1.coeffs().len());
        v.extend_from_slice(self.u1.coeffs());
        v.extend_from_slice(self.u2.coeffs());
        v
    }

    pub fn lattice(&self) -> Lattice {
        self.u1.lattice()
    }

    pub fn dim(&self) -> usize {
        2 * self.lattice().len()
    }

    pub fn with_params(mut self, params: GridParams) -> Self {
        assert_eq!(params.n, self.params.n);
        self.params = params;
        self
    }

    pub fn scaled(&self, alpha: f64) -> VectorField {
        VectorField {
            u1: self.u1.scaled(alpha),
            u2: self.u2.scaled(alpha),
            params: self.params,
        }
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &VectorField) -> VectorField {
        VectorField {
            u1: self.u1.axpy(alpha, &other.u1),
            u2: self.u2.axpy(alpha, &other.u2),
            params: self.params,
        }
    }

    pub fn project(&self, part: Part) -> VectorField {
        VectorField {
            u1: self.u1.project(part),
            u2: self.u2.project(part),
            params: self.params,
        }
    }

    /// Sum of the component norms; for the supremum norms, the larger of the two.
    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        let (a, b) = (self.u1.norm(kind)?, self.u2.norm(kind)?);
        Ok(match kind {
            NormKind::L1 | NormKind::L1_1 => a + b,
            _ => a.max(b),
        })
    }

    pub fn l1(&self) -> f64 {
        self.u1.norm(NormKind::L1).unwrap_or(f64::NAN)
            + self.u2.norm(NormKind::L1).unwrap_or(f64::NAN)
    }

    pub fn max_abs_diff(&self, other: &VectorField) -> f64 {
        self.to_vec()
            .iter()
            .zip(other.to_vec())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
