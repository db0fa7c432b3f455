use std::path::{Path, PathBuf};

use fracspec::cli::{main_with_args, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_OK};

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(config: &Path, out: &Path) -> i32 {
    main_with_args(["fracspec", config.to_str().unwrap(), "--output-dir", out.to_str().unwrap(), "--quiet"])
}

#[test]
fn gap_command_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "gap.json",
        r#"{"command": "gap", "alpha": 1.5, "interval": [-1, 1], "potential": "zero", "N": 128}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out), EXIT_OK);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("gap_report.json")).unwrap()).unwrap();
    assert_eq!(report["pass_main"], true);
    assert_eq!(report["pass_star"], true);
    assert_eq!(report["N"], 128);
    for name in ["spectrum.csv", "eigenvectors.csv", "spectrum.json", "run_summary.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let text = std::fs::read_to_string(out.join("gap_report.json")).unwrap();
    let lambda = text.lines().find(|l| l.contains("\"lambda_1\"")).unwrap();
    let digits = lambda.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = digits.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{digits}");

    let csv = std::fs::read_to_string(out.join("eigenvectors.csv")).unwrap();
    assert!(csv.starts_with("x,phi_1,phi_2,phi_3,phi_4,phi_5,phi_6\n"));
    assert_eq!(csv.lines().count(), 129);
}

#[test]
fn poincare_rejects_alpha_below_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.json", r#"{"command": "poincare", "alpha": 0.9}"#);
    assert_eq!(run(&cfg, &dir.path().join("out")), EXIT_CONFIG);
}

#[test]
fn malformed_configs_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for (i, text) in [
        r#"{"command": "gap", "alhpa": 1.5}"#,
        r#"{"command": "launch"}"#,
        r#"{"command": "gap", "N": 8}"#,
        r#"{"command": "gap", "potential": {"kind": "inverse_boundary_well", "beta": 0.9}, "alpha": 0.5}"#,
        r#"{"command": "gap", "potential": {"kind": "tabulated", "path": "missing.csv"}}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), text);
        assert_eq!(run(&cfg, &out), EXIT_CONFIG, "{text}");
    }
    assert_eq!(run(&dir.path().join("absent.json"), &out), EXIT_CONFIG);
    assert_eq!(main_with_args(["fracspec"]), EXIT_CONFIG);
}

#[test]
fn counterexample_command_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"command": "counterexample", "alpha": 0.5, "n_list": [1, 2, 4, 8, 16]}"#);
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out), EXIT_OK);
    let mut reader = csv::Reader::from_path(out.join("counterexample.csv")).unwrap();
    let values: Vec<f64> = reader.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(values.len(), 5);
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn starved_quadrature_reports_nonconvergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"command": "counterexample", "n_list": [16, 32], "quadrature": {"abs_tol": 1e-300, "rel_tol": 1e-300, "max_panels": 4}}"#,
    );
    assert_eq!(run(&cfg, &dir.path().join("out")), EXIT_NONCONVERGENCE);
}

#[test]
fn tabulated_potential_path_is_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("x,V\n");
    for i in 0..=20 {
        let x = -1.0 + 0.1 * i as f64;
        table.push_str(&format!("{x},{}\n", 3.0 * x * x));
    }
    std::fs::write(dir.path().join("well.csv"), table).unwrap();
    let cfg = write_config(
        dir.path(),
        "t.json",
        r#"{"command": "spectrum", "alpha": 1.2, "N": 64, "m": 3, "potential": {"kind": "tabulated", "path": "well.csv"}}"#,
    );
    assert_eq!(run(&cfg, &dir.path().join("out")), EXIT_OK);
}

#[test]
fn failing_check_gives_exit_one() {
    // an off-center well is not a symmetric single well
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("x,V\n");
    for i in 0..=20 {
        let x = -1.0 + 0.1 * i as f64;
        table.push_str(&format!("{x},{}\n", (x - 0.3).abs()));
    }
    std::fs::write(dir.path().join("skew.csv"), table).unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"command": "spectrum", "N": 64, "potential": {"kind": "tabulated", "path": "skew.csv"}}"#,
    );
    assert_eq!(run(&cfg, &dir.path().join("out")), EXIT_CHECK_FAILED);
}

#[test]
fn small_simulation_and_phi_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"command": "simulate", "alpha": 1.5, "potential": {"kind": "power_well", "kappa": 2, "p": 2},
            "mc": {"n_paths": 4000, "n_steps": 32, "n_points": 7, "laplace_samples": 20000, "seed": 3}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out), EXIT_OK);
    let csv = std::fs::read_to_string(out.join("fk_estimates.csv")).unwrap();
    assert!(csv.starts_with("x,mean,stderr,n_paths,n_steps\n"));
    assert_eq!(csv.lines().count(), 8);

    let cfg = write_config(dir.path(), "phi.json", r#"{"command": "phi", "phi": {"n_points": 11}}"#);
    assert_eq!(run(&cfg, &out), EXIT_OK);
    assert!(out.join("phi_chain.csv").exists());
}

#[test]
fn seed_flag_changes_simulation_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"command": "simulate", "mc": {"n_paths": 2000, "n_steps": 16, "n_points": 3, "laplace_samples": 2000}}"#,
    );
    let go = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        main_with_args(["fracspec", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap(), "--seed", seed, "--quiet"]);
        std::fs::read(out.join("fk_estimates.csv")).unwrap()
    };
    let a = go("1", "a");
    assert_eq!(a, go("1", "b"));
    assert_ne!(a, go("2", "c"));
}
