//! End-to-end tests of the `qbm` binary: exit codes, output shape, header
//! round-trip, and byte determinism under fixed seeds.

use std::path::Path;
use std::process::{Command, Output};

fn qbm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbm"))
}

fn write_fixtures(dir: &Path) -> (String, String) {
    let h = dir.join("hamiltonian.txt");
    let a = dir.join("ansatz.txt");
    std::fs::write(&h, "# two-qubit instance\n1.0 ZZ\n0.5 XI\n0.5 IX\n").unwrap();
    std::fs::write(&a, "ZZ\nXI\nIX\n").unwrap();
    (
        h.to_string_lossy().into_owned(),
        a.to_string_lossy().into_owned(),
    )
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn missing_input_is_a_config_error() {
    let out = qbm().arg("landscape").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_file_is_a_config_error() {
    let out = qbm()
        .args([
            "grad-check",
            "--hamiltonian",
            "/nonexistent/h.txt",
            "--ansatz",
            "/nonexistent/a.txt",
            "--theta",
            "0.0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dimension_mismatch_is_a_numerical_fault_exit() {
    let dir = tempfile::tempdir().unwrap();
    let (h, a) = write_fixtures(dir.path());
    let out = qbm()
        .args(["grad-check", "--hamiltonian", &h, "--ansatz", &a, "--theta", "0.1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn grad_check_passes_on_healthy_instance() {
    let dir = tempfile::tempdir().unwrap();
    let (h, a) = write_fixtures(dir.path());
    let out = qbm()
        .args([
            "grad-check",
            "--hamiltonian",
            &h,
            "--ansatz",
            &a,
            "--theta",
            "0.3,-0.2,0.7",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("component,analytic,finite_difference,abs_diff"));
    assert!(text.contains("max_abs_diff"));
}

#[test]
fn landscape_emits_grid_with_origin_value() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    let a = dir.path().join("a.txt");
    std::fs::write(&h, "1.0 Y\n").unwrap();
    std::fs::write(&a, "X\nY\n").unwrap();
    let out = qbm()
        .args([
            "landscape",
            "--hamiltonian",
            h.to_str().unwrap(),
            "--ansatz",
            a.to_str().unwrap(),
            "--grid",
            "-2:2:41,-2:2:41",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1 + 41 * 41); // header row + grid

    let mut min_f = f64::INFINITY;
    let mut origin_f = f64::NAN;
    for row in &rows[1..] {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        min_f = min_f.min(cols[2]);
        if cols[0] == 0.0 && cols[1] == 0.0 {
            origin_f = cols[2];
        }
    }
    assert!(origin_f.abs() < 1e-12, "f at origin = {origin_f}");
    // pure-Y axis reaches -tanh(2) ≈ -0.964
    assert!(min_f <= -0.96, "grid minimum {min_f}");
}

#[test]
fn landscape_rejects_oversized_grid() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    let a = dir.path().join("a.txt");
    std::fs::write(&h, "1.0 Y\n").unwrap();
    std::fs::write(&a, "X\nY\n").unwrap();
    let out = qbm()
        .args([
            "landscape",
            "--hamiltonian",
            h.to_str().unwrap(),
            "--ansatz",
            a.to_str().unwrap(),
            "--grid",
            "-2:2:1001,-2:2:1001",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (h, a) = write_fixtures(dir.path());
    let args = [
        "estimate",
        "--hamiltonian",
        &h,
        "--ansatz",
        &a,
        "--theta",
        "0.3,-0.2,0.7",
        "--seed",
        "7",
        "--shots",
        "2000",
    ];
    let out1 = qbm().args(args).output().unwrap();
    let out2 = qbm().args(args).output().unwrap();
    assert_eq!(out1.status.code(), Some(0));
    assert_eq!(out1.stdout, out2.stdout);

    let mut other = args;
    other[9] = "8";
    let out3 = qbm().args(other).output().unwrap();
    assert_ne!(out1.stdout, out3.stdout);
}

#[test]
fn estimate_ledger_matches_accounting_identity() {
    let dir = tempfile::tempdir().unwrap();
    let (h, a) = write_fixtures(dir.path());
    let out = qbm()
        .args([
            "estimate",
            "--hamiltonian",
            &h,
            "--ansatz",
            &a,
            "--theta",
            "0.1,0.1,0.1",
            "--shots",
            "500",
        ])
        .output()
        .unwrap();
    let text = stdout_of(&out);
    // J·(N₁ + 2N₂) with J = 3, N₁ = N₂ = 500
    assert!(text.contains("\"total_preparations\":4500"));
}

#[test]
fn train_is_byte_deterministic_and_honors_cap() {
    let dir = tempfile::tempdir().unwrap();
    let (h, a) = write_fixtures(dir.path());
    let args = [
        "train",
        "--hamiltonian",
        &h,
        "--ansatz",
        &a,
        "--epsilon",
        "0.25",
        "--shots",
        "200",
        "--max-iters",
        "25",
        "--seed",
        "11",
        "--format",
        "jsonl",
    ];
    let out1 = qbm().args(args).output().unwrap();
    assert_eq!(out1.status.code(), Some(0), "{}", stdout_of(&out1));
    let out2 = qbm().args(args).output().unwrap();
    assert_eq!(out1.stdout, out2.stdout);

    let text = stdout_of(&out1);
    let rows = text
        .lines()
        .filter(|l| l.contains("\"record\":\"row\""))
        .count();
    assert_eq!(rows, 25);
    assert!(text.contains("\"record\":\"summary\""));
    assert!(text.contains("\"capped_below_formula\":true"));
}

#[test]
fn train_exact_mode_descends_closed_form_instance() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    let a = dir.path().join("a.txt");
    std::fs::write(&h, "1.0 Z\n").unwrap();
    std::fs::write(&a, "Z\n").unwrap();
    let out = qbm()
        .args([
            "train",
            "--hamiltonian",
            h.to_str().unwrap(),
            "--ansatz",
            a.to_str().unwrap(),
            "--shots",
            "exact",
            "--max-iters",
            "200",
            "--theta0",
            "0.0",
            "--delta",
            "1.0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let summary_line = text.lines().find(|l| l.starts_with("# summary:")).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(summary_line.trim_start_matches("# summary:")).unwrap();
    assert!(summary["energy_final"].as_f64().unwrap() <= -0.95);
    assert_eq!(summary["total_preparations"].as_u64().unwrap(), 0);
}

#[test]
fn complexity_rows_match_library_formula() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    let a = dir.path().join("a.txt");
    std::fs::write(&h, "1.0 Z\n").unwrap();
    std::fs::write(&a, "Z\nX\n").unwrap();
    let out = qbm()
        .args([
            "complexity",
            "--hamiltonian",
            h.to_str().unwrap(),
            "--ansatz",
            a.to_str().unwrap(),
            "--epsilons",
            "0.5,0.25,0.1",
            "--delta",
            "1.0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("epsilon"))
        .collect();
    assert_eq!(rows.len(), 3);

    let ansatz = qbm_core::thermal::Ansatz::parse("Z\nX").unwrap();
    let ell = qbm_core::thermal::smoothness_constant(&ansatz, 1.0);
    let mut totals = Vec::new();
    for (row, eps) in rows.iter().zip([0.5f64, 0.25, 0.1]) {
        let cols: Vec<&str> = row.split(',').collect();
        let total: u128 = cols[5].parse().unwrap();
        let expect = qbm_core::sgd::sample_complexity(eps, 2, 1.0, ell, 1.0).unwrap();
        assert_eq!(total, expect);
        totals.push(total);
    }
    // nonincreasing ε list ⇒ nondecreasing N
    assert!(totals.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn header_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (h, a) = write_fixtures(dir.path());
    let out = qbm()
        .args([
            "estimate",
            "--hamiltonian",
            &h,
            "--ansatz",
            &a,
            "--theta",
            "0.1,0.2,0.3",
            "--shots",
            "100",
            "--seed",
            "3",
        ])
        .output()
        .unwrap();
    let text = stdout_of(&out);
    let config_line = text.lines().find(|l| l.starts_with("# config:")).unwrap();
    let json = config_line.trim_start_matches("# config:").trim();
    let cfg: qbm_core::cli::ExperimentConfig = serde_json::from_str(json).unwrap();
    assert_eq!(cfg.command, "estimate");
    assert_eq!(cfg.seed, 3);
    assert_eq!(cfg.shots, "100");
    // the echoed config re-serializes to the same bytes
    assert_eq!(serde_json::to_string(&cfg).unwrap(), json);
}

#[test]
fn config_file_provides_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let (h, a) = write_fixtures(dir.path());
    let cfg_path = dir.path().join("run.json");
    std::fs::write(
        &cfg_path,
        format!(
            "{{\"hamiltonian\":{h:?},\"ansatz\":{a:?},\"theta\":[0.1,0.2,0.3],\
             \"shots\":100,\"seed\":5}}"
        ),
    )
    .unwrap();
    let from_file = qbm()
        .args(["estimate", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(from_file.status.code(), Some(0), "{}", stdout_of(&from_file));
    assert!(stdout_of(&from_file).contains("\"seed\":5"));

    let overridden = qbm()
        .args([
            "estimate",
            "--config",
            cfg_path.to_str().unwrap(),
            "--seed",
            "9",
        ])
        .output()
        .unwrap();
    assert!(stdout_of(&overridden).contains("\"seed\":9"));
}

#[test]
fn output_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let (h, a) = write_fixtures(dir.path());
    let out_path = dir.path().join("scan.csv");
    let out = qbm()
        .args([
            "grad-check",
            "--hamiltonian",
            &h,
            "--ansatz",
            &a,
            "--theta",
            "0.1,0.1,0.1",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert!(written.starts_with("# qbm grad-check\n"));
}
