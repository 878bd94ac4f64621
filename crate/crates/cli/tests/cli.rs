//! End-to-end tests of the `confband` binary: output correctness against
//! the library, exit-code conventions, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn confband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confband"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn kde_single_point_epanechnikov() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("sample.csv");
    let out = dir.path().join("est.csv");
    write(&input, "0.0\n");
    let output = confband(&[
        "kde",
        "--input",
        input.to_str().unwrap(),
        "--kernel",
        "epanechnikov",
        "--h",
        "1",
        "--region",
        "-2:2",
        "--spacing",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = read(&out);
    let row: Vec<&str> = csv
        .lines()
        .find(|l| l.starts_with("0,"))
        .expect("x = 0 row")
        .split(',')
        .collect();
    assert_eq!(row[1], "0.75");
    // summary on stdout is JSON with the resolved config embedded
    let summary: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(summary["n"], 1);
    assert_eq!(summary["sup_f"], 0.75);
    assert_eq!(summary["config"]["kernel"], "epanechnikov");
}

#[test]
fn kde_output_matches_library_bytes() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("sample.csv");
    let out = dir.path().join("est.csv");
    let mut rows = String::new();
    let mut state = 40_123_u64;
    for _ in 0..200 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        rows.push_str(&format!("{}\n", (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0));
    }
    write(&input, &rows);
    let output = confband(&[
        "kde",
        "--input",
        input.to_str().unwrap(),
        "--kernel",
        "gaussian",
        "--h",
        "0.35",
        "--region",
        "-3:3",
        "--spacing",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");

    let sample = confband::Sample::from_csv_path(&input).unwrap();
    let kernel = confband::Kernel::gaussian(1);
    let grid = confband::EvaluationGrid::new(&[(-3.0, 3.0)], &[0.05]).unwrap();
    let estimate = confband::kde_on_grid(&sample, &kernel, 0.35, &grid).unwrap();
    let mut expected = Vec::new();
    estimate.write_csv(&mut expected).unwrap();
    assert_eq!(read(&out).into_bytes(), expected, "CLI must match the library byte for byte");
}

#[test]
fn malformed_csv_is_a_data_error_naming_the_line() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.csv");
    let out = dir.path().join("est.csv");
    write(&input, "1.0\noops\n");
    let output = confband(&[
        "kde",
        "--input",
        input.to_str().unwrap(),
        "--kernel",
        "gaussian",
        "--h",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "stderr was: {stderr}");
}

#[test]
fn missing_option_is_a_usage_error() {
    let output = confband(&["kde", "--kernel", "gaussian"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--input"));
}

fn write_2d_sample(path: &Path) {
    let mut rows = String::new();
    let mut state = 77_u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for _ in 0..150 {
        rows.push_str(&format!("{},{}\n", next(), next()));
    }
    write(path, &rows);
}

#[test]
fn br_family_rejects_multivariate_data() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("sample2d.csv");
    write_2d_sample(&input);
    let output = confband(&[
        "band",
        "--input",
        input.to_str().unwrap(),
        "--kernel",
        "epanechnikov",
        "--family",
        "br",
        "--alpha",
        "0.05",
        "--h",
        "n^-0.3",
        "--hstar",
        "n^-0.3",
        "--v",
        "1.8257418583505538*n^0.35*log^-0.5",
        "--eps",
        "log^-0.5",
        "--out",
        dir.path().join("band.csv").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("one-dimensional"));
}

#[test]
fn simplified_family_accepts_multivariate_data() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("sample2d.csv");
    write_2d_sample(&input);
    let summary_path = dir.path().join("summary.json");
    let output = confband(&[
        "band",
        "--input",
        input.to_str().unwrap(),
        "--kernel",
        "epanechnikov",
        "--family",
        "simplified",
        "--preset",
        "translated",
        "--a",
        "0.25",
        "--out",
        dir.path().join("band.csv").to_str().unwrap(),
        "--summary",
        summary_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let summary: serde_json::Value = serde_json::from_str(&read(&summary_path)).unwrap();
    assert_eq!(summary["d"], 2);
    assert_eq!(summary["family"], "simplified");
}

#[test]
fn sup_truncation_with_eps_one_is_constant_width() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("sample.csv");
    let mut rows = String::new();
    for i in 0..300 {
        rows.push_str(&format!("{}\n", (i as f64 / 300.0) * 2.0 - 1.0));
    }
    write(&input, &rows);
    let summary_path = dir.path().join("summary.json");
    let output = confband(&[
        "band",
        "--input",
        input.to_str().unwrap(),
        "--kernel",
        "biweight",
        "--family",
        "truncated",
        "--trunc",
        "sup",
        "--h",
        "n^-0.3",
        "--hstar",
        "n^-0.175",
        "--v",
        "n^0.35",
        "--eps",
        "1",
        "--out",
        dir.path().join("band.csv").to_str().unwrap(),
        "--summary",
        summary_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let summary: serde_json::Value = serde_json::from_str(&read(&summary_path)).unwrap();
    assert_eq!(
        summary["max_half_width"], summary["min_half_width"],
        "eps = 1 must floor every point at the supremum"
    );
}

#[test]
fn check_conditions_reports_published_verdicts() {
    let output = confband(&[
        "check-conditions",
        "--preset",
        "translated",
        "--a",
        "0.3",
        "--d",
        "1",
    ]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let by_label = |label: &str| -> &serde_json::Value {
        report["reports"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["label"] == label)
            .unwrap()
    };
    assert_eq!(by_label("theorem1")["holds"], true);
    assert_eq!(by_label("theorem2")["holds"], true);
    assert_eq!(by_label("translation")["holds"], true);

    // the classical velocity passes (a) but not (b)
    let output = confband(&[
        "check-conditions",
        "--preset",
        "bickel_rosenblatt",
        "--a",
        "0.3",
    ]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let reports = report["reports"].as_array().unwrap();
    let th1 = reports.iter().find(|r| r["label"] == "theorem1").unwrap();
    let th2 = reports.iter().find(|r| r["label"] == "theorem2").unwrap();
    assert_eq!(th1["holds"], true);
    assert_eq!(th2["holds"], false);
    let boundary = th2["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "n*h*^d/(v^2*log(1/h*)) -> inf")
        .unwrap();
    assert_eq!(boundary["verdict"], "boundary");
}

#[test]
fn preset_and_explicit_rates_are_mutually_exclusive() {
    let output = confband(&[
        "check-conditions",
        "--preset",
        "translated",
        "--a",
        "0.3",
        "--h",
        "n^-0.3",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("mutually exclusive"));
}

#[test]
fn simulate_smoke_and_determinism() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let run = |out: &Path| {
        let output = confband(&[
            "simulate",
            "--density",
            "gaussian",
            "--preset",
            "translated",
            "--a",
            "0.3",
            "--family",
            "truncated",
            "--trunc",
            "sup",
            "--delta",
            "1.4142135623730951",
            "--n",
            "500",
            "--reps",
            "1",
            "--seed",
            "42",
            "--region",
            "-2:2",
            "--spacing",
            "0.2",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{output:?}");
    };
    run(&out);
    let first = read(&out);
    run(&out);
    assert_eq!(first, read(&out), "identical invocations must be byte-identical");

    let report: serde_json::Value = serde_json::from_str(&first).unwrap();
    let phat = report["entries"][0]["phat"].as_f64().unwrap();
    assert!(phat == 0.0 || phat == 1.0, "one replication gives phat in {{0,1}}");
}

#[test]
fn simulate_config_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let output = confband(&[
        "simulate",
        "--density",
        "bimodal",
        "--preset",
        "translated",
        "--a",
        "0.25",
        "--family",
        "check",
        "--trunc",
        "tilde",
        "--n",
        "300,600",
        "--reps",
        "3",
        "--seed",
        "9",
        "--region",
        "-4:4",
        "--spacing",
        "0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let first = read(&out);
    let report: serde_json::Value = serde_json::from_str(&first).unwrap();

    // write the echoed config as a key=value file and re-run from it alone
    let mut config_text = String::new();
    for (key, value) in report["config"].as_object().unwrap() {
        config_text.push_str(&format!("{}={}\n", key, value.as_str().unwrap()));
    }
    let config_path = dir.path().join("rerun.cfg");
    write(&config_path, &config_text);
    let output = confband(&["simulate", "--config", config_path.to_str().unwrap()]);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(first, read(&out), "config round trip must reproduce the report");
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let config_path = dir.path().join("base.cfg");
    write(
        &config_path,
        "preset=translated\na=0.3\nd=1\n# comment line\n",
    );
    // override a=0.3 with an out-of-interval value: must be rejected
    let output = confband(&[
        "check-conditions",
        "--config",
        config_path.to_str().unwrap(),
        "--a",
        "0.6",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("a=0.6"));

    // unmodified config passes
    let output = confband(&["check-conditions", "--config", config_path.to_str().unwrap()]);
    assert!(output.status.success());
}
