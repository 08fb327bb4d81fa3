//! Functional tests of the `casimir` binary: report contents, file
//! round-trips, and the exit-code contract (0 success, 1 verification
//! failure, 2 usage/configuration error).

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .env_remove("CASIMIR_SEED")
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn golden(name: &str) -> serde_json::Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    serde_json::from_str(&fs::read_to_string(path).expect("golden file")).expect("golden JSON")
}

/// Recursive comparison with a tight relative tolerance on numbers.
fn assert_json_close(got: &serde_json::Value, want: &serde_json::Value, path: &str) {
    use serde_json::Value::*;
    match (got, want) {
        (Number(a), Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            assert!(
                (a - b).abs() <= 1e-12 * scale,
                "{path}: {a} vs {b}"
            );
        }
        (Object(a), Object(b)) => {
            assert_eq!(
                a.keys().collect::<Vec<_>>(),
                b.keys().collect::<Vec<_>>(),
                "{path}: key sets differ"
            );
            for (k, va) in a {
                assert_json_close(va, &b[k], &format!("{path}.{k}"));
            }
        }
        (Array(a), Array(b)) => {
            assert_eq!(a.len(), b.len(), "{path}: lengths differ");
            for (i, (va, vb)) in a.iter().zip(b).enumerate() {
                assert_json_close(va, vb, &format!("{path}[{i}]"));
            }
        }
        _ => assert_eq!(got, want, "{path}"),
    }
}

#[test]
fn predict_golden_reports() {
    let cases = [
        (vec!["predict", "normal", "--delta-k", "-2.6e-3", "--temperature", "4"], "predict_normal.json"),
        (vec!["predict", "normal", "--delta-k", "0"], "predict_normal_zero.json"),
        (
            vec![
                "predict", "transverse", "--delta-k", "1e-3", "--mode-length", "1e-4", "--gap", "1e-9",
                "--temperature", "4",
            ],
            "predict_transverse.json",
        ),
    ];
    for (args, file) in cases {
        let out = casimir(&args);
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        assert_json_close(&stdout_json(&out), &golden(file), file);
    }
}

#[test]
fn predict_headline_values() {
    let out = casimir(&["predict", "normal", "--delta-k", "-2.6e-3", "--temperature", "4"]);
    let v = stdout_json(&out);
    let sqrt_sf = v["sqrt_delta_sf"].as_f64().unwrap();
    assert!((sqrt_sf / 7.083e-19 - 1.0).abs() < 1e-3, "sqrt noise {sqrt_sf}");
    let damp = v["delta_damping"].as_f64().unwrap();
    assert!((damp / 4.542e-15 - 1.0).abs() < 1e-3, "damping {damp}");
}

#[test]
fn exit_code_matrix() {
    // 0: success paths.
    assert_eq!(exit_code(&casimir(&["predict", "normal", "--delta-k", "-1e-3"])), 0);
    // 2: sign violations, named in the message.
    let bad_sign = casimir(&["predict", "normal", "--delta-k", "1e-3"]);
    assert_eq!(exit_code(&bad_sign), 2);
    assert!(String::from_utf8_lossy(&bad_sign.stderr).contains("delta_k <= 0"));
    let bad_transverse = casimir(&[
        "predict", "transverse", "--delta-k", "-1e-3", "--mode-length", "1e-4", "--gap", "1e-9",
    ]);
    assert_eq!(exit_code(&bad_transverse), 2);
    // 2: clap usage errors.
    assert_eq!(exit_code(&casimir(&["predict", "normal"])), 2);
    assert_eq!(exit_code(&casimir(&["no-such-command"])), 2);
    // 2: invalid geometry.
    let bad_gap = casimir(&[
        "geometry", "--radius", "1e-6", "--gap", "-1e-9", "--rho-a", "1e28", "--rho-b", "1e28",
        "--kappa", "1e-39", "--debye-frequency", "1e13",
    ]);
    assert_eq!(exit_code(&bad_gap), 2);
    // 2: unknown verify suite.
    assert_eq!(exit_code(&casimir(&["verify", "--suite", "bogus"])), 2);
    // 1: a 3-sigma oracle miss (deterministic at this seed and sample count;
    // the sigma estimate from 8 samples is unreliable by construction).
    let oracle_miss = casimir(&[
        "geometry", "--radius", "1e-6", "--gap", "1e-6", "--rho-a", "1", "--rho-b", "1",
        "--kappa", "1", "--debye-frequency", "1", "--oracle", "--mc-samples", "8", "--seed", "1",
    ]);
    assert_eq!(exit_code(&oracle_miss), 1);
}

#[test]
fn geometry_reports_ratio_invariant() {
    let out = casimir(&[
        "geometry", "--radius", "1e-6", "--gap", "1e-8", "--rho-a", "1e28", "--rho-b", "1e28",
        "--kappa", "1e-39", "--debye-frequency", "1e13",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    let ratio = v["noise_stiffness_ratio_hbar"].as_f64().unwrap();
    assert!((ratio - 1.829_843_813_946_645_7).abs() < 1e-9, "ratio {ratio}");
}

#[test]
fn simulate_fit_round_trip() {
    let dir = tempdir();
    let config = dir.join("run.json");
    let series = dir.join("series.csv");
    // Low-frequency cantilever: the full pipeline runs in tens of
    // milliseconds; seed picked to land the Q estimate within 5%.
    fs::write(
        &config,
        r#"{
  "cantilever": {"mass": 1e-12, "omega0": 628.3185307179587, "quality": 100.0, "temperature": 4.0},
  "simulation": {"dt": 4.5e-4, "duration": 318.31, "seed": 3}
}"#,
    )
    .unwrap();
    let sim = casimir(&["simulate", "--config", config.to_str().unwrap(), "--out", series.to_str().unwrap()]);
    assert_eq!(exit_code(&sim), 0, "stderr: {}", String::from_utf8_lossy(&sim.stderr));
    let report = stdout_json(&sim);
    let ratio = report["equipartition_ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.10, "equipartition ratio {ratio}");

    let fit = casimir(&[
        "fit", "--in", series.to_str().unwrap(), "--max-lag", "1.59", "--mass", "1e-12",
        "--temperature", "4",
    ]);
    assert_eq!(exit_code(&fit), 0, "stderr: {}", String::from_utf8_lossy(&fit.stderr));
    let v = stdout_json(&fit);
    let q = v["q_fit"].as_f64().unwrap();
    assert!((q / 100.0 - 1.0).abs() < 0.05, "fitted quality {q}");
    assert!(v["sf_extracted"].as_f64().unwrap() > 0.0);
    assert!((v["equipartition_ratio"].as_f64().unwrap() - 1.0).abs() < 0.10);
}

#[test]
fn fit_on_noiseless_acf_recovers_exactly() {
    let dir = tempdir();
    let acf_path = dir.join("acf.csv");
    let (a, w, q) = (2.5e-16f64, 500.0f64, 80.0f64);
    let d = w / (2.0 * q);
    let mut csv = String::from("tau,c\n");
    for i in 0..40_000 {
        let t = i as f64 * 2e-4;
        csv.push_str(&format!("{},{}\n", t, a * (-d * t).exp() * (w * t).cos()));
    }
    fs::write(&acf_path, csv).unwrap();
    let out = casimir(&["fit", "--in", acf_path.to_str().unwrap(), "--acf", "--mass", "1e-12"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!((v["x2_mean"].as_f64().unwrap() / a - 1.0).abs() < 1e-9);
    assert!((v["omega0_fit"].as_f64().unwrap() / w - 1.0).abs() < 1e-9);
    assert!((v["q_fit"].as_f64().unwrap() / q - 1.0).abs() < 1e-9);
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempdir();
    let bad_csv = dir.join("bad.csv");
    fs::write(&bad_csv, "wrong,header\n0,1\n").unwrap();
    let out = casimir(&["fit", "--in", bad_csv.to_str().unwrap(), "--max-lag", "1", "--mass", "1e-12"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("t,x"));

    let bad_config = dir.join("bad.json");
    fs::write(
        &bad_config,
        r#"{"cantilever": {"mass": -1, "omega0": 628.0, "quality": 100.0, "temperature": 4.0},
            "simulation": {"dt": 4.5e-4, "duration": 318.0}}"#,
    )
    .unwrap();
    let out = casimir(&["simulate", "--config", bad_config.to_str().unwrap(), "--out", dir.join("x.csv").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cantilever.mass"));

    let unknown_key = dir.join("unknown.json");
    fs::write(
        &unknown_key,
        r#"{"cantilever": {"mass": 1e-12, "omega0": 628.0, "quality": 100.0, "temperature": 4.0},
            "simulation": {"dt": 4.5e-4, "duration": 318.0, "wat": 1}}"#,
    )
    .unwrap();
    let out = casimir(&["simulate", "--config", unknown_key.to_str().unwrap(), "--out", dir.join("y.csv").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn seed_env_and_flag_precedence() {
    let args = [
        "geometry", "--radius", "1e-6", "--gap", "1e-7", "--rho-a", "1", "--rho-b", "1",
        "--kappa", "1", "--debye-frequency", "1", "--oracle", "--mc-samples", "2000",
    ];
    let with_env = Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .env("CASIMIR_SEED", "12345")
        .output()
        .unwrap();
    let mut flagged: Vec<&str> = args.to_vec();
    flagged.extend_from_slice(&["--seed", "12345"]);
    let with_flag = casimir(&flagged);
    let a = stdout_json(&with_env)["oracle"]["force_normal"]["monte_carlo"].as_f64().unwrap();
    let b = stdout_json(&with_flag)["oracle"]["force_normal"]["monte_carlo"].as_f64().unwrap();
    assert_eq!(a.to_bits(), b.to_bits(), "env seed and flag seed must agree");
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("casimir-cli-test-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}
