use rayon::prelude::*;

use super::block::{operator_block, TridiagonalBlock};
use crate::error::{Error, Result};
use crate::spectral::{GridParams, SineField};

/// `L = lambda sin y d_x + (-Delta)^m` on one scalar field, block-diagonal in `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedOperator {
    params: GridParams,
    blocks: Vec<TridiagonalBlock>,
}

impl LinearizedOperator {
    pub fn new(params: &GridParams) -> Result<Self> {
        params.validate()?;
        let blocks = (0..=params.n)
            .map(|l| operator_block(l as i64, params))
            .collect::<Result<_>>()?;
        Ok(LinearizedOperator {
            params: *params,
            blocks,
        })
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn blocks(&self) -> &[TridiagonalBlock] {
        &self.blocks
    }

    fn check(&self, f: &SineField) -> Result<()> {
        if f.n() != self.params.n {
            return Err(Error::InvalidInput(format!(
                "field has N = {}, operator has N = {}",
                f.n(),
                self.params.n
            )));
        }
        Ok(())
    }

    pub fn apply(&self, f: &SineField) -> Result<SineField> {
        self.check(f)?;
        let lat = f.lattice();
        let mut out = Vec::with_capacity(lat.len());
        for (l, b) in self.blocks.iter().enumerate() {
            out.extend(b.apply(&f.coeffs()[lat.block_range(l)]));
        }
        SineField::from_coeffs(self.params.n, out)
    }

    /// `L^{-1} f`, the blocks solved in parallel.
    pub fn solve(&self, f: &SineField) -> Result<SineField> {
        self.check(f)?;
        let lat = f.lattice();
        let parts = self
            .blocks
            .par_iter()
            .enumerate()
            .map(|(l, b)| b.solve(&f.coeffs()[lat.block_range(l)]))
            .collect::<Result<Vec<_>>>()?;
        SineField::from_coeffs(self.params.n, parts.concat())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_of_sin_x() {
        // lambda sin y d_x sin x = lambda sin y cos x = lambda/2 (sin(x+y) - sin(x-y))
        let p = GridParams::new(3, 2.0, 4.0).unwrap();
        let op = LinearizedOperator::new(&p).unwrap();
        let f = SineField::from_modes(3, &[((1, 0), 1.0)]);
        let want = SineField::from_modes(3, &[((1, 0), 1.0), ((1, 1), 2.0), ((1, -1), -2.0)]);
        assert_eq!(op.apply(&f).unwrap(), want);
    }

    #[test]
    fn solve_inverts_apply() {
        let p = GridParams::new(5, 3.0, 50.0).unwrap();
        let op = LinearizedOperator::new(&p).unwrap();
        let f = SineField::from_coeffs(
            5,
            (0..60)
                .map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0)
                .collect(),
        )
        .unwrap();
        let back = op.apply(&op.solve(&f).unwrap()).unwrap();
        assert!(back.axpy(-1.0, &f).max_abs() < 1e-10);
    }
}
