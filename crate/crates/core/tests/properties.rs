use proptest::prelude::*;
use torus_galerkin::spectral::{
    apply_symmetry, bilinear, convolve, nonlinear_term, Lattice, Part, Symmetry,
};
use torus_galerkin::tridiag::{build_block, geometric_decay_ratio, operator_block};
use torus_galerkin::{GridParams, NormKind, SineField, VectorField};

fn field(n: usize) -> impl Strategy<Value = SineField> {
    prop::collection::vec(-1.0f64..1.0, Lattice::new(n).len())
        .prop_map(move |c| SineField::from_coeffs(n, c).unwrap())
}

fn sized_field() -> impl Strategy<Value = SineField> {
    (1usize..=5).prop_flat_map(field)
}

fn field_pair() -> impl Strategy<Value = (SineField, SineField)> {
    (1usize..=5).prop_flat_map(|n| (field(n), field(n)))
}

fn vector_field(n: usize) -> impl Strategy<Value = VectorField> {
    (field(n), field(n)).prop_map(move |(u1, u2)| {
        VectorField::new(u1, u2, GridParams::new(n, 2.0, 1.0).unwrap()).unwrap()
    })
}

fn sized_vector_field() -> impl Strategy<Value = VectorField> {
    (1usize..=4).prop_flat_map(vector_field)
}

fn max_abs(u: &VectorField) -> f64 {
    u.to_vec().iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn nonlinearity_is_quadratic(u in sized_vector_field(), alpha in -4.0f64..4.0) {
        let lhs = nonlinear_term(&u.scaled(alpha));
        let rhs = nonlinear_term(&u).scaled(alpha * alpha);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * max_abs(&rhs).max(1.0));
    }

    #[test]
    fn bilinear_form_is_additive(
        (u, v, w) in (1usize..=4).prop_flat_map(|n| (vector_field(n), vector_field(n), vector_field(n)))
    ) {
        let lhs = bilinear(&u.axpy(1.0, &v), &w);
        let rhs = bilinear(&u, &w).axpy(1.0, &bilinear(&v, &w));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * max_abs(&rhs).max(1.0));
        let lhs = bilinear(&w, &u.axpy(1.0, &v));
        let rhs = bilinear(&w, &u).axpy(1.0, &bilinear(&w, &v));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * max_abs(&rhs).max(1.0));
    }

    #[test]
    fn nonlinearity_commutes_with_symmetries(u in sized_vector_field()) {
        for sym in [Symmetry::S, Symmetry::SPrime] {
            let lhs = nonlinear_term(&apply_symmetry(&u, sym));
            let rhs = apply_symmetry(&nonlinear_term(&u), sym);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12, "{sym:?}: {}", lhs.max_abs_diff(&rhs));
        }
    }

    #[test]
    fn symmetries_are_isometric_involutions(u in sized_vector_field()) {
        for sym in [Symmetry::S, Symmetry::SPrime] {
            let su = apply_symmetry(&u, sym);
            prop_assert_eq!(apply_symmetry(&su, sym).max_abs_diff(&u), 0.0);
            prop_assert!((su.l1() - u.l1()).abs() <= 1e-12 * u.l1().max(1.0));
        }
    }

    #[test]
    fn projections_split_the_space(f in sized_field()) {
        let (r, d) = (f.project(Part::R), f.project(Part::D));
        prop_assert_eq!(r.project(Part::R), r.clone());
        prop_assert_eq!(d.project(Part::D), d.clone());
        prop_assert_eq!(r.project(Part::D).max_abs(), 0.0);
        prop_assert_eq!(d.project(Part::R).max_abs(), 0.0);
        prop_assert_eq!(r.axpy(1.0, &d), f);
    }

    #[test]
    fn norms_are_homogeneous_and_subadditive((f, g) in field_pair(), alpha in -10.0f64..10.0) {
        for kind in [NormKind::L1, NormKind::L1_1, NormKind::LInf, NormKind::LInfP(2.0)] {
            let nf = f.norm(kind).unwrap();
            let ng = g.norm(kind).unwrap();
            prop_assert!((f.scaled(alpha).norm(kind).unwrap() - alpha.abs() * nf).abs() <= 1e-12 * nf.max(1.0));
            prop_assert!(f.axpy(1.0, &g).norm(kind).unwrap() <= (nf + ng) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn young_inequalities((f, g) in field_pair()) {
        let l1 = |h: &SineField| h.norm(NormKind::L1).unwrap();
        let linf = |h: &SineField| h.norm(NormKind::LInf).unwrap();
        let fg = convolve(&f, &g);
        prop_assert!(l1(&fg) <= l1(&f) * l1(&g) * (1.0 + 1e-12));
        prop_assert!(linf(&fg) <= linf(&f) * l1(&g) * (1.0 + 1e-12));
    }

    #[test]
    fn block_split_is_a_bijection(f in sized_field()) {
        let blocks = f.block_split();
        prop_assert_eq!(blocks.len(), f.n() + 1);
        prop_assert_eq!(SineField::block_assemble(f.n(), &blocks).unwrap(), f);
    }

    #[test]
    fn block_solve_inverts_the_block(
        n in 1usize..=40,
        l_frac in 0.0f64..=1.0,
        m in 1u32..=6,
        log_lambda in 0.0f64..5.0,
        exact in any::<bool>(),
        seed in prop::collection::vec(-1.0f64..1.0, 81),
    ) {
        let p = GridParams::new(n, m as f64, 10f64.powf(log_lambda)).unwrap();
        let l = (l_frac * n as f64).round() as i64;
        let block = if exact { operator_block(l, &p) } else { build_block(l, &p) }.unwrap();
        let rhs: Vec<f64> = seed.iter().cycle().take(block.size()).copied().collect();
        let x = block.solve(&rhs).unwrap();
        let back = block.apply(&x);
        let scale = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        for (a, b) in back.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
        // and the inverse from the other side
        let inv = block.inverse_columns().unwrap();
        let dense = block.to_dense();
        let id = nalgebra::DMatrix::<f64>::identity(block.size(), block.size());
        prop_assert!((&dense * &inv - &id).amax() <= 1e-10);
        prop_assert!((&inv * &dense - &id).amax() <= 1e-10);
    }

    #[test]
    fn block_is_diagonal_plus_skew(n in 1usize..=20, l in 1i64..=20, m in 1u32..=6, lambda in 0.0f64..1e3) {
        prop_assume!(l as usize <= n);
        let p = GridParams::new(n, m as f64, lambda).unwrap();
        let b = build_block(l, &p).unwrap();
        prop_assert_eq!(b.sub, -b.sup);
        prop_assert!(b.diag.windows(2).all(|w| w[1] > w[0]));
        let a = b.to_dense();
        let skew = &a + a.transpose();
        for i in 0..b.size() {
            for j in 0..b.size() {
                if i != j {
                    prop_assert_eq!(skew[(i, j)], 0.0);
                }
            }
        }
    }

    // An even number of rows leaves the skew part invertible, and the bound
    // holds for every lambda > 1.
    #[test]
    fn inverse_entries_obey_uniform_bound_even_size(
        half in 1usize..=24,
        l_frac in 0.0f64..=1.0,
        m in 1u32..=6,
        log_lambda in 0.0f64..6.0,
    ) {
        let n = 2 * half - 1;
        let lambda = 10f64.powf(log_lambda);
        prop_assume!(lambda > 1.0);
        let p = GridParams::new(n, m as f64, lambda).unwrap();
        let l = 1 + (l_frac * (n - 1) as f64).round() as i64;
        let inv = build_block(l, &p).unwrap().inverse_columns().unwrap();
        let bound = 2f64.powf(2.0 * m as f64) / (l as f64 * lambda);
        prop_assert!(inv.amax() <= bound, "{} > {bound}", inv.amax());
    }

    // With an odd number of rows the skew part has a kernel and the inverse
    // saturates at 1 / sum(d_even) as lambda grows; on the certification grid
    // that floor is far below the bound.
    #[test]
    fn inverse_entries_obey_uniform_bound_on_certification_grid(
        n in prop::sample::select(vec![32usize, 48, 64]),
        l in prop::sample::select(vec![1i64, 2, 3, 4]),
        m in prop::sample::select(vec![2u32, 4, 6]),
        log_lambda in 0.01f64..=4.0,
    ) {
        let lambda = 10f64.powf(log_lambda);
        let p = GridParams::new(n, m as f64, lambda).unwrap();
        let inv = build_block(l, &p).unwrap().inverse_columns().unwrap();
        let bound = 2f64.powf(2.0 * m as f64) / (l as f64 * lambda);
        prop_assert!(inv.amax() <= bound, "{} > {bound}", inv.amax());
    }

    #[test]
    fn columns_decay_geometrically_far_out(n in 16usize..=64, m in 1u32..=4, log_lambda in 2.0f64..4.0) {
        let lambda = 10f64.powf(log_lambda);
        let p = GridParams::new(n, m as f64, lambda).unwrap();
        let inv = build_block(1, &p).unwrap().inverse_columns().unwrap();
        prop_assert!(geometric_decay_ratio(&inv, 1, m as f64, lambda) <= 0.5 + 1e-9);
    }
}
