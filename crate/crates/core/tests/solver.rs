use torus_galerkin::linearization::{solve_linearization, symmetry_report};
use torus_galerkin::solver::{
    apriori_monitor, assemble_from, fixed_point_defect, fixed_point_iterate, newton_refine,
    residual, FixedPointOptions, NewtonOptions,
};
use torus_galerkin::spectral::{apply_symmetry, FieldDocument, Symmetry};
use torus_galerkin::{GridParams, NormKind};

fn params(lambda: f64) -> GridParams {
    GridParams::new(8, 6.0, lambda).unwrap()
}

#[test]
fn pipeline_at_lambda_100() {
    let p = params(100.0);
    let fp = fixed_point_iterate(&p, FixedPointOptions::default()).unwrap();
    assert!(fp.converged(), "{:?}", fp.status);
    // P_D b = 0 at every step
    assert!(fp.trace.iter().all(|r| r.pd_b_max <= 1e-12));
    // after the first couple of steps the map contracts at least by a half
    let ratios: Vec<f64> = fp
        .trace
        .iter()
        .filter_map(|r| r.contraction_ratio)
        .collect();
    assert!(ratios.iter().skip(1).all(|r| *r <= 0.5 + 0.1), "{ratios:?}");

    let report = apriori_monitor(&fp.remainder).unwrap();
    assert!(report.standing_assumption_ok && report.pr_a_l1_ok && report.m_admissible);

    // The fixed-point defect is the Galerkin residual written through the map.
    let defect = fixed_point_defect(&fp.linearization, &fp.remainder).unwrap();
    let direct = residual(&fp.solution(), &p);
    assert!((defect.l1() - direct.l1()).abs() <= 1e-10);
    assert!(defect.max_abs_diff(&direct) <= 1e-10);

    let pair = assemble_from(fp, NewtonOptions::default()).unwrap();
    assert!(pair.newton_steps[0] <= 10);
    assert!(pair.residual_l1.iter().all(|r| *r <= 1e-9 * p.lambda));
    assert!((pair.residual_l1[0] - pair.residual_l1[1]).abs() <= 1e-10);
    assert!(!pair.merged && pair.separation >= p.lambda / 2.0);
    // dominant modes: sin y in component 1 of u1, sin x in component 2 of u2
    let c = pair.u1.u1.get(0, 1);
    assert!(
        (c - p.lambda).abs() <= 3.0 * p.lambda.powf(2.0 / p.m),
        "{c}"
    );
    assert!((pair.u2.u2.get(1, 0) - c).abs() <= 1e-9 * p.lambda);
    assert!(apply_symmetry(&pair.u1, Symmetry::S).max_abs_diff(&pair.u2) <= 1e-7);
}

#[test]
fn below_the_bifurcation_the_solutions_merge() {
    let p = params(1.0);
    let fp = fixed_point_iterate(&p, FixedPointOptions::default()).unwrap();
    let pair = assemble_from(fp, NewtonOptions::default()).unwrap();
    assert!(pair.merged);
}

#[test]
fn apriori_ratios_are_stable_in_lambda() {
    let norm = |lambda: f64| {
        let fp = fixed_point_iterate(&params(lambda), FixedPointOptions::default()).unwrap();
        assert!(fp.converged());
        apriori_monitor(&fp.remainder).unwrap()
    };
    let (r100, r400) = (norm(100.0), norm(400.0));
    let rr = r400.normalized[2] / r100.normalized[2];
    assert!((0.5..=2.0).contains(&rr), "{rr}");
    let zero = norm(0.0);
    assert_eq!(
        zero.norms.norm_b_l1_1 + zero.norms.norm_pr_a_l1_1 + zero.norms.norm_pd_a_l1_1,
        0.0
    );
}

#[test]
fn linearization_is_bounded_and_symmetric() {
    let b_inf = |lambda: f64| {
        solve_linearization(&params(lambda))
            .unwrap()
            .b
            .norm(NormKind::LInf)
            .unwrap()
    };
    let ratio = b_inf(1e4) / b_inf(100.0);
    assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    let lin = solve_linearization(&params(100.0)).unwrap();
    assert!(lin.residual_a <= 1e-10 * 100.0 && lin.residual_b <= 1e-10 * 100.0);
    let sym = symmetry_report(&lin);
    assert!(sym.sprime_defect <= 1e-12 * sym.scale.max(1.0));
    assert!(sym.sp_defect <= 1e-12 * sym.scale.max(1.0));
}

#[test]
fn exact_root_needs_no_newton_step() {
    let p = params(100.0);
    let fp = fixed_point_iterate(&p, FixedPointOptions::default()).unwrap();
    let root = newton_refine(&fp.solution(), &p, NewtonOptions::default())
        .unwrap()
        .u;
    let again = newton_refine(&root, &p, NewtonOptions::default()).unwrap();
    assert_eq!(again.steps, 0);
    assert_eq!(again.u, root);
}

#[test]
fn solution_document_round_trips() {
    let p = params(100.0);
    let fp = fixed_point_iterate(&p, FixedPointOptions::default()).unwrap();
    let u = fp.solution();
    let json = FieldDocument::from_field(&u)
        .with_digest("abc")
        .to_json()
        .unwrap();
    let back = FieldDocument::from_json(&json).unwrap();
    assert_eq!(back.config_digest.as_deref(), Some("abc"));
    assert_eq!(back.to_field().unwrap(), u);
}
