use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::json;
use torus_galerkin::continuation::{
    continue_branch, detect_pitchfork, emit_diagram, switch_branch, RunManifest, StepOptions,
    SwitchOptions,
};
use torus_galerkin::solver::{
    apriori_monitor, assemble_from, fixed_point_iterate, FixedPointOptions, IterationStatus,
    NewtonOptions,
};
use torus_galerkin::spectral::FieldDocument;
use torus_galerkin::tridiag::{certify_bounds, CertOptions, CertPoint};
use torus_galerkin::verify::{run_verification, VerifyOptions};
use torus_galerkin::{Error, GridParams};

use crate::config::{digest, usage, BifurcateConfig, BoundsConfig, SolveConfig, VerifyConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_MERGED: u8 = 2;
pub const EXIT_NO_BIFURCATION: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn grid_params(
    n: usize,
    m: f64,
    lambda: f64,
    variant: torus_galerkin::LaplacianVariant,
) -> anyhow::Result<GridParams> {
    let p = GridParams {
        n,
        m,
        lambda,
        variant,
    };
    p.validate().map_err(|e| usage(e.to_string()))?;
    Ok(p)
}

pub fn solve(cfg: &SolveConfig) -> anyhow::Result<u8> {
    let params = grid_params(cfg.n, cfg.m, cfg.lambda, cfg.variant)?;
    let digest = digest("solve", cfg);
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;

    let fp = fixed_point_iterate(
        &params,
        FixedPointOptions {
            max_iter: cfg.max_iter,
            tol: cfg.tol,
        },
    )?;
    let apriori = apriori_monitor(&fp.remainder)?;
    let final_diff = fp.trace.last().map(|r| r.diff_l1_1);
    write_json(
        &cfg.out.join("trace.json"),
        &json!({ "config_digest": digest, "status": fp.status, "records": fp.trace }),
    )?;
    write_json(
        &cfg.out.join("apriori.json"),
        &json!({ "config_digest": digest, "report": apriori }),
    )?;
    match &fp.status {
        IterationStatus::Converged => {}
        IterationStatus::Diverged(reason) => {
            eprintln!("error: fixed-point iteration diverged: {reason}");
            return Ok(EXIT_FAILURE);
        }
        IterationStatus::MaxIterations => {
            eprintln!(
                "error: fixed-point iteration did not converge within {} steps",
                cfg.max_iter
            );
            return Ok(EXIT_FAILURE);
        }
    }
    let iterations = fp.trace.len();
    let newton = NewtonOptions {
        tol: cfg.newton_tol,
        ..NewtonOptions::default()
    };
    let pair = assemble_from(fp, newton)?;
    for (i, u) in [&pair.u1, &pair.u2].into_iter().enumerate() {
        let meta = json!({
            "iterations": iterations,
            "final_diff": final_diff,
            "residual_l1": pair.residual_l1[i],
            "newton_steps": pair.newton_steps[i],
            "apriori_report": apriori,
        });
        let doc = FieldDocument::from_field(u)
            .with_digest(digest.clone())
            .with_metadata(meta);
        write_json(&cfg.out.join(format!("u{}.json", i + 1)), &doc)?;
    }
    println!(
        "lambda = {}: {iterations} fixed-point steps, residuals {:.3e} / {:.3e}, separation {:.6}",
        params.lambda, pair.residual_l1[0], pair.residual_l1[1], pair.separation
    );
    println!("config digest {digest}");
    if pair.merged {
        println!("solutions merged: both starting points refine to the symmetric root");
        return Ok(EXIT_MERGED);
    }
    Ok(EXIT_OK)
}

pub fn bounds(cfg: &BoundsConfig) -> anyhow::Result<u8> {
    if cfg.lambdas.is_empty() {
        return Err(usage("the lambda list is empty"));
    }
    if let Some(l) = cfg.lambdas.iter().find(|l| !(**l > 1.0)) {
        return Err(usage(format!("every lambda must exceed 1 (got {l})")));
    }
    if cfg.l.is_empty() || cfg.n.is_empty() {
        return Err(usage("the l and N lists must be non-empty"));
    }
    let mut points = Vec::new();
    for &n in &cfg.n {
        for &l in &cfg.l {
            if l < 1 || l > n {
                return Err(usage(format!("block index l = {l} outside 1..={n}")));
            }
            for &lambda in &cfg.lambdas {
                points.push(CertPoint {
                    params: grid_params(n, cfg.m, lambda, Default::default())?,
                    l,
                });
            }
        }
    }
    let opts = CertOptions {
        slope_tolerance: cfg.slope_tolerance,
        n_tolerance: cfg.n_tolerance,
    };
    let report = certify_bounds(&points, opts)?;
    let digest = digest("bounds", cfg);
    write_json(
        &cfg.out,
        &json!({ "config_digest": digest, "config": cfg, "report": report }),
    )?;

    let s = &report.summary;
    for fit in &s.fitted_slopes {
        println!(
            "m = {}, l = {}, N = {}: slopes l1->linf {:.3} ({:.3}), l1->l1 {:.3} ({:.3}), gradient {:.3} ({:.3})",
            fit.m,
            fit.l,
            fit.n,
            fit.fitted.l1_to_linf,
            fit.expected.l1_to_linf,
            fit.fitted.l1_to_l1,
            fit.expected.l1_to_l1,
            fit.fitted.gradient,
            fit.expected.gradient
        );
    }
    println!(
        "largest relative change from N to 2N: {:.3e}",
        s.max_doubled_n_rel_diff
    );
    for w in &s.warnings {
        println!("warning: {w}");
    }
    println!(
        "{} grid points, {} hard violations; config digest {digest}",
        report.rows.len(),
        s.hard_violations
    );
    if let Some(row) = report.first_violation() {
        eprintln!(
            "error: bound violated at m = {}, l = {}, lambda = {}, N = {}: max entry {:e} > {:e} (sequences pass: {})",
            row.m, row.l, row.lambda, row.n, row.max_entry, row.bound, row.sequences_pass
        );
        return Ok(EXIT_FAILURE);
    }
    Ok(if s.overall_pass {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

pub fn bifurcate(cfg: &BifurcateConfig) -> anyhow::Result<u8> {
    let params = grid_params(cfg.n, cfg.m, 0.0, cfg.variant)?;
    if !(cfg.lambda_max > 0.0) || !cfg.lambda_max.is_finite() {
        return Err(usage(format!(
            "lambda_max must be positive (got {})",
            cfg.lambda_max
        )));
    }
    if !(cfg.initial_step > 0.0 && cfg.max_step >= cfg.initial_step) {
        return Err(usage("steps must satisfy 0 < initial_step <= max_step"));
    }
    let digest = digest("bifurcate", cfg);
    let step = StepOptions {
        initial_step: cfg.initial_step,
        max_step: cfg.max_step,
        ..StepOptions::default()
    };
    let mut manifest = RunManifest {
        params,
        lambda_range: [0.0, cfg.lambda_max],
        step_opts: step,
        detected_lambda0: None,
        bracket: None,
        signature: None,
        switch: None,
        config_digest: digest.clone(),
    };

    let symmetric = continue_branch(&params, None, cfg.lambda_max, step)?;
    let pitchfork = match detect_pitchfork(&symmetric, &params, step) {
        Ok(pf) => pf,
        Err(Error::NoBifurcation) => {
            emit_diagram(&[symmetric], &cfg.out, cfg.svg.as_deref(), Some(&digest))?;
            write_json(&cfg.manifest_path(), &manifest)?;
            println!(
                "no bifurcation in [0, {}]; symmetric branch stays stable",
                cfg.lambda_max
            );
            return Ok(EXIT_NO_BIFURCATION);
        }
        Err(e) => return Err(e.into()),
    };
    let opts = SwitchOptions {
        step,
        ..SwitchOptions::default()
    };
    let (plus, minus, switch) = switch_branch(&pitchfork, &params, cfg.lambda_max, opts)?;
    emit_diagram(
        &[symmetric, plus, minus],
        &cfg.out,
        cfg.svg.as_deref(),
        Some(&digest),
    )?;
    manifest.detected_lambda0 = Some(pitchfork.lambda0);
    manifest.bracket = Some([pitchfork.bracket.0, pitchfork.bracket.1]);
    manifest.signature = Some(pitchfork.signature);
    manifest.switch = Some(switch);
    write_json(&cfg.manifest_path(), &manifest)?;
    println!(
        "lambda0 = {:.6} (bracket [{:.6}, {:.6}])",
        pitchfork.lambda0, pitchfork.bracket.0, pitchfork.bracket.1
    );
    println!("config digest {digest}");
    Ok(EXIT_OK)
}

pub fn verify(cfg: &VerifyConfig) -> anyhow::Result<u8> {
    if cfg.samples == 0 || cfg.n == 0 {
        return Err(usage("samples and n must be positive"));
    }
    let report = run_verification(VerifyOptions {
        seed: cfg.seed,
        samples: cfg.samples,
        n: cfg.n,
    })?;
    let digest = digest("verify", cfg);
    for c in &report.checks {
        println!(
            "{} {}: max error {:.3e} (tolerance {:.1e}, {} samples)",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.max_error,
            c.tolerance,
            c.samples
        );
    }
    if let Some(out) = &cfg.out {
        write_json(out, &json!({ "config_digest": digest, "report": report }))?;
    }
    println!("config digest {digest}");
    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}
