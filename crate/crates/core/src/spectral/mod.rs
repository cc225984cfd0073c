//! Coefficient-space representation of odd vector fields on the torus.
//!
//! A scalar field is `sum_k c_k sin(k1 x + k2 y)` over the half-lattice. The
//! equivalent exponential coefficients are `a_k = -(i/2) c_k`, `a_{-k} = (i/2) c_k`,
//! and every norm is taken over that full exponential index set.

mod field;
mod io;
mod lattice;
mod nonlinear;
mod params;
mod symmetry;

pub use field::{HBlock, NormKind, Part, SineField, VectorField};
pub use io::{FieldDocument, FieldHeader, FieldRecord};
pub use lattice::{Lattice, Mode};
pub use nonlinear::{bilinear, convolve, nonlinear_term};
pub use params::{GridParams, LaplacianVariant};
pub use symmetry::{apply_symmetry, sp_defect, sp_symmetric, Symmetry};

/// The external force `F = (sin y, sin x)` on the lattice of `params`.
pub fn make_force(params: &GridParams) -> VectorField {
    let mut f = VectorField::zeros(*params);
    f.u1.set(0, 1, 1.0);
    f.u2.set(1, 0, 1.0);
    f
}

/// `lambda * (sin y, 0)`, the dominant part of the first solution.
pub fn dominant_part(params: &GridParams) -> VectorField {
    let mut f = VectorField::zeros(*params);
    f.u1.set(0, 1, params.lambda);
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn force_has_two_modes() {
        for n in [1, 8] {
            let p = GridParams::new(n, 6.0, 1.0).unwrap();
            let f = make_force(&p);
            assert_eq!(f.u1.get(0, 1), 1.0);
            assert_eq!(f.u2.get(1, 0), 1.0);
            // exponential coefficients: a_{(0,-1)} = +i/2 * c, i.e. signed amplitude -1
            assert_eq!(f.u1.get(0, -1), -1.0);
            assert_eq!(f.u2.get(-1, 0), -1.0);
            let nonzero =
                f.u1.coeffs()
                    .iter()
                    .chain(f.u2.coeffs())
                    .filter(|c| **c != 0.0)
                    .count();
            assert_eq!(nonzero, 2);
            assert_eq!(f.u1.norm(NormKind::L1).unwrap(), 1.0);
            assert_eq!(f.u2.norm(NormKind::L1).unwrap(), 1.0);
        }
    }
}
