//! Galerkin nonlinearity by direct pair summation.
//!
//! Every product that occurs is `sin(p.x) * cos(q.x) = (sin((p+q).x) + sin((p-q).x)) / 2`
//! with `p, q` on the half-lattice, so the result stays in the sine class. Both
//! factors are restricted to the lattice and the output is projected back onto it.

use super::field::{SineField, VectorField};

/// Sparse `(k1, k2, amplitude)` list of the nonzero modes.
type Sparse = Vec<(i32, i32, f64)>;

fn sparse(f: &SineField) -> Sparse {
    f.nonzero_modes()
}

/// Cosine amplitudes of `d/dx_i f` as a sparse list (`i = 0` for x, `1` for y).
fn derivative(f: &SineField, i: usize) -> Sparse {
    f.nonzero_modes()
        .into_iter()
        .filter_map(|(k1, k2, c)| {
            let w = if i == 0 { k1 } else { k2 };
            (w != 0).then_some((k1, k2, w as f64 * c))
        })
        .collect()
}

/// `out += (sum_p s_p sin(p.x)) * (sum_q c_q cos(q.x))`, projected onto the lattice.
fn accumulate(out: &mut SineField, sines: &[(i32, i32, f64)], cosines: &[(i32, i32, f64)]) {
    for &(p1, p2, s) in sines {
        for &(q1, q2, c) in cosines {
            let h = 0.5 * s * c;
            out.add(p1 + q1, p2 + q2, h);
            out.add(p1 - q1, p2 - q2, h);
        }
    }
}

/// `B(u, v)^j = sum_i u^i d_i v^j`, the polarized form of the nonlinearity.
pub fn bilinear(u: &VectorField, v: &VectorField) -> VectorField {
    let n = u.params.n;
    let us = [sparse(&u.u1), sparse(&u.u2)];
    let mut out = VectorField::zeros(u.params);
    for (target, vj) in [(&mut out.u1, &v.u1), (&mut out.u2, &v.u2)] {
        debug_assert_eq!(vj.n(), n);
        for (i, ui) in us.iter().enumerate() {
            accumulate(target, ui, &derivative(vj, i));
        }
    }
    out
}

/// `u . grad u`, truncated to the lattice of `u`.
pub fn nonlinear_term(u: &VectorField) -> VectorField {
    bilinear(u, u)
}

/// Truncated product of the sine series `f` with the cosine series whose
/// amplitudes are the coefficients of `g`.
///
/// This is the discrete convolution at the heart of the nonlinearity; in
/// exponential coefficients it is `f * g` restricted to the lattice, so the
/// l1 and l-infinity Young inequalities apply to it directly.
pub fn convolve(f: &SineField, g: &SineField) -> SineField {
    let mut out = SineField::zeros(f.n());
    accumulate(&mut out, &sparse(f), &sparse(g));
    out
}
