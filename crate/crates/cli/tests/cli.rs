use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use torus_galerkin::continuation::RunManifest;
use torus_galerkin::spectral::{apply_symmetry, FieldDocument, Symmetry};

fn galerkin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_galerkin"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_writes_both_solutions_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        [
            "solve", "--m", "6", "--n", "8", "--lambda", "100", "--out", out,
        ]
    };
    let o = galerkin(dir.path(), &args("run1"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&galerkin(dir.path(), &args("run2"))), 0);

    for f in ["u1.json", "u2.json", "trace.json", "apriori.json"] {
        let a = std::fs::read(dir.path().join("run1").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("run2").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    let run = dir.path().join("run1");
    let load =
        |f: &str| FieldDocument::from_json(&std::fs::read_to_string(run.join(f)).unwrap()).unwrap();
    let (d1, d2) = (load("u1.json"), load("u2.json"));
    let digest = d1.config_digest.clone().unwrap();
    assert_eq!(digest.len(), 64);
    assert_eq!(d2.config_digest.as_deref(), Some(digest.as_str()));
    assert_eq!(
        read_json(&run.join("trace.json"))["config_digest"],
        digest.as_str()
    );
    assert_eq!(
        read_json(&run.join("apriori.json"))["config_digest"],
        digest.as_str()
    );
    assert!(stdout(&o).contains(&digest));

    let (u1, u2) = (d1.to_field().unwrap(), d2.to_field().unwrap());
    assert!(apply_symmetry(&u1, Symmetry::S).max_abs_diff(&u2) <= 1e-7);
    let meta = d1.metadata.unwrap();
    assert!(meta["residual_l1"].as_f64().unwrap() <= 1e-9 * 100.0);
    assert!(meta["apriori_report"]["standing_assumption_ok"]
        .as_bool()
        .unwrap());
    assert_eq!(
        read_json(&run.join("trace.json"))["status"]["status"],
        "converged"
    );
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let merged = galerkin(
        dir.path(),
        &[
            "solve", "--m", "6", "--n", "8", "--lambda", "1", "--out", "low",
        ],
    );
    assert_eq!(code(&merged), 2);
    assert!(stdout(&merged).contains("solutions merged"));

    assert_eq!(
        code(&galerkin(
            dir.path(),
            &["solve", "--lambda", "0", "--out", "zero"]
        )),
        0
    );
    let zero = FieldDocument::from_json(
        &std::fs::read_to_string(dir.path().join("zero/u1.json")).unwrap(),
    )
    .unwrap();
    assert!(zero.records.iter().all(|r| r.c1 == 0.0 && r.c2 == 0.0));

    for bad in [
        &["solve"][..],
        &["solve", "--lambda", "-1"],
        &["solve", "--lambda", "5", "--m", "0.5"],
        &["solve", "--lamda", "5"],
        &["solve", "--lambda", "5", "--variant", "round"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&galerkin(dir.path(), bad)), 64, "{bad:?}");
    }
    assert_eq!(code(&galerkin(dir.path(), &["--help"])), 0);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"m": 6, "n": 8, "lambda": 1, "out": "cfg"}"#,
    )
    .unwrap();
    // the file alone is below the bifurcation ...
    assert_eq!(
        code(&galerkin(dir.path(), &["solve", "--config", "c.json"])),
        2
    );
    // ... the flag lifts lambda above it
    assert_eq!(
        code(&galerkin(
            dir.path(),
            &["solve", "--config", "c.json", "--lambda", "100"]
        )),
        0
    );
    let doc = read_json(&dir.path().join("cfg/u1.json"));
    assert_eq!(doc["header"]["lambda"].as_f64(), Some(100.0));

    std::fs::write(dir.path().join("typo.json"), r#"{"lambda": 100, "mm": 6}"#).unwrap();
    assert_eq!(
        code(&galerkin(dir.path(), &["solve", "--config", "typo.json"])),
        64
    );
    assert_eq!(
        code(&galerkin(
            dir.path(),
            &["solve", "--config", "missing.json"]
        )),
        64
    );
}

#[test]
fn bounds_report_has_rows_for_every_n() {
    let dir = tempfile::tempdir().unwrap();
    let o = galerkin(
        dir.path(),
        &[
            "bounds",
            "--m",
            "2",
            "--l",
            "1",
            "--lambdas",
            "1e2,1e3,1e4,1e5",
            "--n",
            "64,128",
            "--out",
            "b.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("b.json"));
    let rows = report["report"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for n in [64, 128] {
        assert_eq!(rows.iter().filter(|r| r["N"] == n).count(), 4);
    }
    assert!(rows.iter().all(|r| r["pass"] == true));
    assert_eq!(report["report"]["summary"]["hard_violations"], 0);
    assert_eq!(report["config_digest"].as_str().unwrap().len(), 64);

    for bad in [
        &["bounds"][..],
        &["bounds", "--lambdas", ""],
        &["bounds", "--lambdas", "0.5,10"],
    ] {
        assert_eq!(code(&galerkin(dir.path(), bad)), 64, "{bad:?}");
    }
    std::fs::write(dir.path().join("empty.json"), r#"{"lambdas": []}"#).unwrap();
    assert_eq!(
        code(&galerkin(dir.path(), &["bounds", "--config", "empty.json"])),
        64
    );
}

#[test]
fn bifurcate_below_the_pitchfork_reports_none() {
    let dir = tempfile::tempdir().unwrap();
    let o = galerkin(
        dir.path(),
        &[
            "bifurcate",
            "--m",
            "6",
            "--n",
            "8",
            "--lambda-max",
            "3",
            "--out",
            "d.csv",
        ],
    );
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("no bifurcation"));
    let manifest = read_json(&dir.path().join("d.manifest.json"));
    assert!(manifest["detected_lambda0"].is_null());
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert!(csv
        .lines()
        .skip(2)
        .all(|l| l.contains(",SYMMETRIC,") && l.ends_with(",true")));
}

#[test]
fn bifurcate_writes_diagram_svg_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "bifurcate",
        "--m",
        "6",
        "--n",
        "8",
        "--lambda-max",
        "12",
        "--out",
        "d.csv",
        "--svg",
        "d.svg",
    ];
    let o = galerkin(dir.path(), &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = read_json(&dir.path().join("d.manifest.json"));
    let typed: RunManifest = serde_json::from_value(manifest.clone()).unwrap();
    assert_eq!(typed.lambda_range, [0.0, 12.0]);
    let lambda0 = manifest["detected_lambda0"].as_f64().unwrap();
    let bracket: Vec<f64> = manifest["bracket"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(bracket[0] <= lambda0 && lambda0 <= bracket[1] && bracket[1] - bracket[0] <= 1e-4);
    assert!(stdout(&o).contains(&format!("{lambda0:.6}")));

    let digest = manifest["config_digest"].as_str().unwrap();
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        format!("# config_digest: {digest}")
    );
    for id in ["SYMMETRIC", "PITCHFORK_PLUS", "PITCHFORK_MINUS"] {
        assert!(csv.contains(&format!(",{id},")), "{id}");
    }
    let svg = std::fs::read_to_string(dir.path().join("d.svg")).unwrap();
    assert!(svg.contains(digest) && svg.contains("stroke-dasharray"));
}

#[test]
fn laplacian_pitchfork_moves_up_with_n() {
    let dir = tempfile::tempdir().unwrap();
    let lambda0 = |n: &str| {
        let out = format!("m1_{n}.csv");
        let o = galerkin(
            dir.path(),
            &[
                "bifurcate",
                "--m",
                "1",
                "--n",
                n,
                "--lambda-max",
                "40",
                "--out",
                &out,
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        read_json(&dir.path().join(format!("m1_{n}.manifest.json")))["detected_lambda0"]
            .as_f64()
            .unwrap()
    };
    let (a, b) = (lambda0("4"), lambda0("8"));
    assert!(a < b, "{a} vs {b}");
}

#[test]
fn verify_is_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["v1.json", "v2.json"] {
        let o = galerkin(
            dir.path(),
            &["verify", "--seed", "11", "--samples", "20", "--out", out],
        );
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        assert!(
            stdout(&o)
                .lines()
                .filter(|l| l.starts_with("PASS "))
                .count()
                >= 10
        );
    }
    let (a, b) = (
        std::fs::read(dir.path().join("v1.json")).unwrap(),
        std::fs::read(dir.path().join("v2.json")).unwrap(),
    );
    assert_eq!(a, b);
    assert_eq!(
        code(&galerkin(dir.path(), &["verify", "--samples", "0"])),
        64
    );
}
