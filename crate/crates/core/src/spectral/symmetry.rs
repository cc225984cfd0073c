use serde::{Deserialize, Serialize};

use super::field::{SineField, VectorField};

/// The two symmetries that act as maps on fields.
///
/// The derivative relation `u1_x = u2_y` is a constraint rather than a map and
/// is exposed through [`sp_defect`] / [`sp_symmetric`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// Swap of the components together with `x <-> y`.
    S,
    /// `(u1, u2)(x, y) -> (-u1, u2)(pi - x, y - pi)`: `k1 -> -k1` with a
    /// parity-dependent sign, `-1` on component 1 when `k1`, `k2` have equal parity.
    SPrime,
}

fn remap(src: &SineField, f: impl Fn(i32, i32) -> f64) -> SineField {
    let mut out = SineField::zeros(src.n());
    for (i, (k1, k2)) in src.lattice().modes().enumerate() {
        out.coeffs_mut()[i] = f(k1, k2);
    }
    out
}

fn parity_sign(k1: i32, k2: i32) -> f64 {
    if (k1 + k2).rem_euclid(2) == 0 {
        -1.0
    } else {
        1.0
    }
}

pub fn apply_symmetry(u: &VectorField, which: Symmetry) -> VectorField {
    let (u1, u2) = match which {
        Symmetry::S => (
            remap(&u.u2, |k1, k2| u.u2.get(k2, k1)),
            remap(&u.u1, |k1, k2| u.u1.get(k2, k1)),
        ),
        Symmetry::SPrime => (
            remap(&u.u1, |k1, k2| parity_sign(k1, k2) * u.u1.get(-k1, k2)),
            remap(&u.u2, |k1, k2| -parity_sign(k1, k2) * u.u2.get(-k1, k2)),
        ),
    };
    VectorField {
        u1,
        u2,
        params: u.params,
    }
}

/// `max_k |k1 c1_k - k2 c2_k|`, the violation of `d_x u1 = d_y u2`.
pub fn sp_defect(u: &VectorField) -> f64 {
    u.lattice()
        .modes()
        .map(|(k1, k2)| (k1 as f64 * u.u1.get(k1, k2) - k2 as f64 * u.u2.get(k1, k2)).abs())
        .fold(0.0, f64::max)
}

pub fn sp_symmetric(u: &VectorField, tol: f64) -> bool {
    sp_defect(u) <= tol
}
