//! Behavior tests for the torzeta binary: exit codes, record schemas,
//! stdout determinism, and input validation.

use std::path::Path;
use std::process::{Command, Output};

fn torzeta() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_torzeta"));
    cmd.env_remove("TORZETA_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    torzeta().args(args).output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is UTF-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_single_class_csv(dir: &Path) -> String {
    let path = dir.join("single.csv");
    std::fs::write(&path, "length,theta,multiplicity\n3.0,0.0,1\n").unwrap();
    path.to_str().unwrap().to_owned()
}

fn gen_manifest(dir: &Path, seed: u64) -> String {
    let path = dir.join(format!("spec{seed}.json"));
    let path_str = path.to_str().unwrap().to_owned();
    let out = run(&[
        "gen",
        "--seed",
        &seed.to_string(),
        "--systole",
        "0.8",
        "--cutoff",
        "5",
        "--density",
        "poisson-linear:40",
        "--out",
        &path_str,
    ]);
    assert_eq!(exit_code(&out), 0);
    path_str
}

#[test]
fn gen_is_deterministic_in_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_manifest(dir.path(), 7);
    let b_path = dir.path().join("again.json");
    let out = run(&[
        "gen",
        "--seed",
        "7",
        "--systole",
        "0.8",
        "--cutoff",
        "5",
        "--density",
        "poisson-linear:40",
        "--out",
        b_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b_path).unwrap();
    assert_eq!(bytes_a, bytes_b);

    let c = gen_manifest(dir.path(), 8);
    assert_ne!(bytes_a, std::fs::read(c).unwrap());
}

#[test]
fn zeta_on_a_single_class_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let stdout = stdout_ok(&[
        "zeta", "--spectrum", &csv, "--kind", "ruelle", "--k", "0", "--s", "3",
    ]);
    let rec: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(rec["kind"], "ruelle");
    assert_eq!(rec["k"], 0);
    assert_eq!(rec["s"][0].as_f64().unwrap(), 3.0);
    // One primitive of length 3 at s = 3 sums to log(1 - e^{-9}).
    let expected = (-(-9.0f64).exp()).ln_1p();
    assert!((rec["value"][0].as_f64().unwrap() - expected).abs() < 1e-15);
    assert_eq!(rec["value"][1].as_f64().unwrap(), 0.0);
    assert!(rec["tail_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(rec["abscissa"].as_f64().unwrap(), 2.0);
}

#[test]
fn zeta_csv_format_prints_header_and_matching_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let stdout = stdout_ok(&[
        "--format", "csv", "zeta", "--spectrum", &csv, "--kind", "selberg", "--k", "1", "--s",
        "2.5",
    ]);
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kind,k,m,n,s_re,s_im,value_re,value_im,tail_bound,abscissa"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "selberg");
    assert_eq!(row[1], "1");
    assert_eq!(row[2], "");
    let json = stdout_ok(&[
        "zeta", "--spectrum", &csv, "--kind", "selberg", "--k", "1", "--s", "2.5",
    ]);
    let rec: serde_json::Value = serde_json::from_str(json.trim()).unwrap();
    // Both formats print the same 17-significant-digit numbers.
    assert_eq!(
        row[6].parse::<f64>().unwrap(),
        rec["value"][0].as_f64().unwrap()
    );
}

#[test]
fn complex_evaluation_points_parse_with_leading_hyphens() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let stdout = stdout_ok(&[
        "zeta", "--spectrum", &csv, "--kind", "ruelle", "--k", "-2", "--s", "4-0.5i",
    ]);
    let rec: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(rec["k"], -2);
    assert_eq!(rec["s"][0].as_f64().unwrap(), 4.0);
    assert_eq!(rec["s"][1].as_f64().unwrap(), -0.5);
}

#[test]
fn divergent_points_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let out = run(&[
        "zeta", "--spectrum", &csv, "--kind", "ruelle", "--k", "0", "--s", "1.5",
    ]);
    assert_eq!(exit_code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("need Re(s) > 2"), "stderr: {stderr}");
}

#[test]
fn invalid_inputs_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());

    let missing = run(&["info", "/nonexistent/spectrum.json"]);
    assert_eq!(exit_code(&missing), 1);

    let bad_s = run(&[
        "zeta", "--spectrum", &csv, "--kind", "ruelle", "--k", "0", "--s", "nope",
    ]);
    assert_eq!(exit_code(&bad_s), 1);

    let no_k = run(&["zeta", "--spectrum", &csv, "--kind", "ruelle", "--s", "3"]);
    assert_eq!(exit_code(&no_k), 1);
    assert!(String::from_utf8_lossy(&no_k.stderr).contains("requires --k"));

    let k_on_rep = run(&[
        "zeta", "--spectrum", &csv, "--kind", "ruelle-rep", "--weight", "1,0", "--k", "2", "--s",
        "5",
    ]);
    assert_eq!(exit_code(&k_on_rep), 1);

    let weight_on_ruelle = run(&[
        "zeta", "--spectrum", &csv, "--kind", "ruelle", "--k", "0", "--weight", "1,0", "--s", "3",
    ]);
    assert_eq!(exit_code(&weight_on_ruelle), 1);

    let vol_without_negated = run(&[
        "zeta", "--spectrum", &csv, "--kind", "ruelle", "--k", "0", "--s", "3", "--vol", "1",
    ]);
    assert_eq!(exit_code(&vol_without_negated), 1);

    let unknown_flag = run(&["info", "--frobnicate", &csv]);
    assert_eq!(exit_code(&unknown_flag), 1);

    let bad_density = run(&[
        "gen", "--seed", "1", "--systole", "0.5", "--cutoff", "2", "--density", "uniform:3",
        "--out", "/tmp/never.json",
    ]);
    assert_eq!(exit_code(&bad_density), 1);

    let cutoff_on_json = {
        let manifest = gen_manifest(dir.path(), 3);
        run(&["info", &manifest, "--cutoff", "4"])
    };
    assert_eq!(exit_code(&cutoff_on_json), 1);
    assert!(String::from_utf8_lossy(&cutoff_on_json.stderr).contains("drop --cutoff"));
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(exit_code(&run(&["--help"])), 0);
    assert_eq!(exit_code(&run(&["zeta", "--help"])), 0);
    assert_eq!(exit_code(&run(&["--version"])), 0);
}

#[test]
fn negated_modulus_needs_a_volume_from_somewhere() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let without = run(&[
        "zeta", "--spectrum", &csv, "--kind", "selberg", "--k", "0", "--s", "3", "--negated",
    ]);
    assert_eq!(exit_code(&without), 1);
    assert!(String::from_utf8_lossy(&without.stderr).contains("requires volume"));

    let with = stdout_ok(&[
        "zeta", "--spectrum", &csv, "--kind", "selberg", "--k", "0", "--s", "3", "--negated",
        "--vol", "1.5",
    ]);
    let rec: serde_json::Value = serde_json::from_str(with.trim()).unwrap();
    assert!(rec["negated_modulus"].as_f64().unwrap() > 0.0);
    assert!(rec.get("value").is_none());
}

#[test]
fn bad_thread_settings_exit_with_code_one() {
    let out = torzeta()
        .env("TORZETA_THREADS", "abc")
        .args(["info", "/tmp/whatever.json"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("TORZETA_THREADS"));

    let zero = run(&["--threads", "0", "info", "/tmp/whatever.json"]);
    assert_eq!(exit_code(&zero), 1);
}

#[test]
fn env_threads_are_accepted_when_the_flag_is_absent() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let out = torzeta()
        .env("TORZETA_THREADS", "2")
        .args(["info", &csv])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
}

#[test]
fn info_reports_the_manifest_summary() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen_manifest(dir.path(), 5);
    let stdout = stdout_ok(&["info", &manifest]);
    let rec: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert!(rec["entries"].as_u64().unwrap() > 0);
    assert_eq!(rec["cutoff"].as_f64().unwrap(), 5.0);
    assert!(rec["systole"].as_f64().unwrap() >= 0.8);

    let csv_fmt = stdout_ok(&["--format", "csv", "info", &manifest]);
    assert!(csv_fmt.starts_with("entries,total_multiplicity,systole,cutoff,growth_constant,volume"));
}

#[test]
fn identity_suites_report_every_case_and_exit_two_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let stdout = stdout_ok(&[
        "identities", "--spectrum", &csv, "--suite", "ruelle-selberg", "--tol", "1e-11",
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    // k in -4..=4 crossed with three evaluation points.
    assert_eq!(lines.len(), 27);
    for line in &lines {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["pass"], true);
        assert!(rec["residual"].as_f64().unwrap() <= rec["allowed"].as_f64().unwrap());
    }

    let failing = run(&[
        "identities", "--spectrum", &csv, "--suite", "kostant", "--samples", "2", "--tol",
        "1e-20",
    ]);
    assert_eq!(exit_code(&failing), 2);
    let stdout = String::from_utf8_lossy(&failing.stdout);
    assert!(stdout.contains("\"pass\":false"));
}

#[test]
fn kostant_suite_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let base = [
        "identities", "--spectrum", &csv, "--suite", "kostant", "--samples", "20", "--seed", "9",
    ];
    let a = stdout_ok(&base);
    let b = stdout_ok(&base);
    assert_eq!(a, b);
    let other_seed = stdout_ok(&[
        "identities", "--spectrum", &csv, "--suite", "kostant", "--samples", "20", "--seed",
        "10",
    ]);
    assert_ne!(a, other_seed);
}

#[test]
fn torsion_tables_have_the_documented_columns_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen_manifest(dir.path(), 11);
    let out_path = dir.path().join("torsion.csv");
    let out = run(&[
        "torsion", "--spectrum", &manifest, "--vol", "2.0", "--parity", "even", "--max-m", "5",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "M,parity,remainder,cumulative_minus_base,tail_bound");
    // Family parameter up to 5 yields rows at twist indices 6, 8, 10.
    let indices: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(indices, ["6", "8", "10"]);
    assert!(lines[1].split(',').nth(1) == Some("even"));
}

#[test]
fn fit_emits_the_exact_record_keys() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen_manifest(dir.path(), 13);
    let stdout = stdout_ok(&[
        "fit", "--spectrum", &manifest, "--vol", "2.0", "--m-min", "20", "--m-max", "36",
        "--parity", "both",
    ]);
    let rec: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    for key in [
        "slope",
        "intercept",
        "recovered_volume",
        "injected_volume",
        "rel_error",
        "M_range",
        "max_abs_residual",
    ] {
        assert!(rec.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(rec["M_range"][0].as_u64().unwrap(), 20);
    assert_eq!(rec["M_range"][1].as_u64().unwrap(), 36);
    assert_eq!(rec["injected_volume"].as_f64().unwrap(), 2.0);
    assert!(rec["rel_error"].as_f64().unwrap() < 5e-3);
}

#[test]
fn trace_check_emits_one_record_per_grid_time() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let stdout = stdout_ok(&[
        "trace-check", "--spectrum", &csv, "--k", "2", "--grid", "0.5,1,2", "--vol", "1.0",
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    for (line, expected_t) in lines.iter().zip([0.5, 1.0, 2.0]) {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["t"].as_f64().unwrap(), expected_t);
        let total = rec["identity_term"].as_f64().unwrap() + rec["hyperbolic_term"].as_f64().unwrap();
        assert_eq!(rec["total"].as_f64().unwrap(), total);
    }

    let csv_fmt = stdout_ok(&[
        "--format", "csv", "trace-check", "--spectrum", &csv, "--k", "2", "--grid", "0.5",
        "--vol", "1.0",
    ]);
    assert!(csv_fmt.starts_with("t,identity_term,hyperbolic_term,total,tail_bound"));
}

#[test]
fn stdout_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen_manifest(dir.path(), 17);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = run(&[
            "--threads", threads, "identities", "--spectrum", &manifest, "--suite",
            "ruelle-selberg", "--tol", "1e-11",
        ]);
        assert_eq!(exit_code(&out), 0);
        outputs.push(out.stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn csv_spectra_accept_an_explicit_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_single_class_csv(dir.path());
    let stdout = stdout_ok(&["info", &csv, "--cutoff", "4.5"]);
    let rec: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(rec["cutoff"].as_f64().unwrap(), 4.5);
    // Without the flag the largest observed length is the default.
    let default: serde_json::Value = serde_json::from_str(stdout_ok(&["info", &csv]).trim()).unwrap();
    assert_eq!(default["cutoff"].as_f64().unwrap(), 3.0);
}
