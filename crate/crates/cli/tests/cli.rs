//! End-to-end checks of the binary: flag surface, report file layout, exit
//! codes, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

fn relphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relphase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = relphase(args);
    assert!(
        out.status.success(),
        "exit: {:?}, stderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

fn meta_value(report: &str, key: &str) -> f64 {
    let prefix = format!("# {key}=");
    report
        .lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("missing meta key {key}"))
        .parse()
        .expect("numeric meta value")
}

#[test]
fn phase_average_flat_csv() {
    let text = stdout(&[
        "phase-average",
        "--alpha",
        "1.0",
        "--prior",
        "flat",
        "--cutoff",
        "32",
    ]);
    assert!(text.starts_with("# command=phase-average\n"));
    assert!(text.contains("n,p_n\n"));
    // First data row: p_0 = e^{-1} ≈ 0.3678794.
    let row0 = text
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with("n,"))
        .expect("data row");
    let p0: f64 = row0.split(',').nth(1).unwrap().parse().unwrap();
    assert!((p0 - 0.367_879_4).abs() < 1e-6);
    assert!(meta_value(&text, "offdiag_norm") < 1e-12);
    // Tolerance set is embedded for reproducibility.
    assert!(text.contains("# psd_tol="));
}

#[test]
fn phase_average_delta_is_pure() {
    let text = stdout(&["phase-average", "--alpha", "1.0", "--prior", "delta:0.0"]);
    assert!((meta_value(&text, "purity") - 1.0).abs() < 1e-12);
}

#[test]
fn von_mises_kappa_zero_matches_flat() {
    let flat = stdout(&[
        "phase-average",
        "--alpha",
        "1.0",
        "--prior",
        "flat",
        "--cutoff",
        "24",
    ]);
    let vm = stdout(&[
        "phase-average",
        "--alpha",
        "1.0",
        "--prior",
        "vonmises:0,0",
        "--resolution",
        "256",
        "--cutoff",
        "24",
    ]);
    let diag = |text: &str| -> Vec<f64> {
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("n,"))
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    for (a, b) in diag(&flat).iter().zip(diag(&vm).iter()) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!((meta_value(&flat, "purity") - meta_value(&vm, "purity")).abs() < 1e-10);
}

#[test]
fn way_demo_table_and_even_d_rejection() {
    let text = stdout(&["way-demo", "--d", "31", "--priors", "flat,delta:0,delta:5"]);
    let row = |name: &str| -> f64 {
        text.lines()
            .find(|l| l.split(',').nth(1) == Some(name))
            .unwrap_or_else(|| panic!("missing row {name}"))
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(row("x_r:deviation") < 1e-10);
    let shift = row("x_1@delta:5") - row("x_1@delta:0");
    assert!((shift - 5.0).abs() < 1e-10);
    assert!(row("max_deviation_from_identity_over_d") < 1e-12);

    let out = relphase(&["way-demo", "--d", "30"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn relphase_fidelity_values() {
    let text = stdout(&["relphase-fidelity", "--alpha", "1", "--beta", "8"]);
    let header_idx = text
        .lines()
        .position(|l| l.starts_with("beta_mod"))
        .unwrap();
    let row: Vec<&str> = text
        .lines()
        .nth(header_idx + 1)
        .unwrap()
        .split(',')
        .collect();
    let fidelity: f64 = row[5].parse().unwrap();
    assert!(fidelity > 0.9 && fidelity <= 1.0);

    let text = stdout(&["relphase-fidelity", "--alpha", "0", "--beta", "3"]);
    let header_idx = text
        .lines()
        .position(|l| l.starts_with("beta_mod"))
        .unwrap();
    let row: Vec<&str> = text
        .lines()
        .nth(header_idx + 1)
        .unwrap()
        .split(',')
        .collect();
    let fidelity: f64 = row[5].parse().unwrap();
    assert!((fidelity - 1.0).abs() < 1e-10);
    assert_eq!(row[4], "inf"); // condition ratio diverges at alpha = 0
}

#[test]
fn sweep_rows_increase_and_json_mirrors() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let json_path = dir.path().join("sweep.json");
    let args = ["sweep", "--alpha", "1", "--beta", "2:16:x2", "--jobs", "2"];
    let status = Command::new(env!("CARGO_BIN_EXE_relphase"))
        .args(args)
        .arg("--out")
        .arg(&csv_path)
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(env!("CARGO_BIN_EXE_relphase"))
        .args(args)
        .args(["--format", "json", "--out"])
        .arg(&json_path)
        .status()
        .unwrap();
    assert!(status.success());

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("beta_mod"))
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 4);
    let fidelities: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(fidelities.windows(2).all(|w| w[1] > w[0]));

    // The JSON mirror parses and carries the same rows under meta/rows keys.
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(json["meta"]["command"], "sweep");
    let jrows = json["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), 4);
    for (jr, cr) in jrows.iter().zip(&fidelities) {
        let jf = jr["fidelity"].as_f64().unwrap();
        assert!((jf - cr).abs() < 1e-15);
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |path: &Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_relphase"))
            .args([
                "phase-average",
                "--alpha",
                "1.3@0.4",
                "--prior",
                "vonmises:1,5",
                "--out",
            ])
            .arg(path)
            .status()
            .unwrap();
        assert!(status.success());
    };
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    run(&p1);
    run(&p2);
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
}

#[test]
fn config_errors_exit_2_numeric_breaches_exit_3() {
    // Unknown prior: config error.
    let out = relphase(&["phase-average", "--alpha", "1.0", "--prior", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    // Bad complex literal: config error (clap-level errors also exit 2).
    let out = relphase(&["phase-average", "--alpha", "x"]);
    assert_eq!(out.status.code(), Some(2));
    // Cutoff far too small for the amplitude: truncation tail breach.
    let out = relphase(&[
        "phase-average",
        "--alpha",
        "4.0",
        "--prior",
        "flat",
        "--cutoff",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // Relative cutoff too small: embedding loss breach.
    let out = relphase(&[
        "relphase-fidelity",
        "--alpha",
        "2.0",
        "--beta",
        "8",
        "--rel-cutoff",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn grid_prior_roundtrips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("prior.csv");
    std::fs::write(&grid, "# point,weight\n0.0,0.25\n1.5707963267948966,0.75\n").unwrap();
    let spec = format!("grid:{}", grid.display());
    let text = stdout(&[
        "phase-average",
        "--alpha",
        "1.0",
        "--prior",
        &spec,
        "--cutoff",
        "24",
    ]);
    // Diagonal is untouched by any phase prior.
    let p0: f64 = text
        .lines()
        .find(|l| l.starts_with("0,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((p0 - 0.367_879_4).abs() < 1e-6);
}
