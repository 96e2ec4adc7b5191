//! End-to-end CLI tests: exit codes, config precedence, output metadata, and
//! the byte-identity half of the determinism acceptance criterion.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cbsm"))
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cbsm-cli-test-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Criterion 9 (CLI side): byte-identical outputs for fixed (seed, config)
/// across 1-thread and 8-thread runs. The JSON report is compared with its
/// wall-clock field removed; the sweep CSV is compared byte for byte.
#[test]
fn acceptance_9_cli_byte_identity() {
    let dir = tmpdir("determinism");
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let path = dir.join(format!("sim-{threads}.json"));
        let status = bin()
            .args([
                "cbsm-sim", "--n", "3", "--m", "3", "--alpha", "1.4", "--j", "1", "--eta0",
                "0.97", "--trials", "200000", "--seed", "42", "--threads", threads, "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        outputs.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "JSON reports differ between thread counts");

    let mut csvs = Vec::new();
    for threads in ["1", "8"] {
        let path = dir.join(format!("sweep-{threads}.csv"));
        let status = bin()
            .args([
                "sweep",
                "--n-list",
                "1,3",
                "--m-list",
                "3",
                "--alpha-list",
                "1.5",
                "--j-list",
                "1",
                "--L0-list",
                "0.7,1.0",
                "--L",
                "10",
                "--trials",
                "50000",
                "--seed",
                "7",
                "--threads",
                threads,
                "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        csvs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(csvs[0], csvs[1], "sweep CSVs differ between thread counts");
    println!("ACCEPTANCE 9 (determinism, CLI): PASS — byte-identical outputs across thread counts");
}

#[test]
fn resumed_sweep_is_byte_identical() {
    let dir = tmpdir("resume");
    let mut csvs = Vec::new();
    for run in 0..2 {
        let path = dir.join(format!("sweep-run{run}.csv"));
        let status = bin()
            .args([
                "sweep", "--n-list", "1", "--m-list", "3,5", "--alpha-list", "1.6", "--j-list",
                "1", "--L0-list", "1.0", "--L", "10", "--trials", "30000", "--seed", "11",
                "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        csvs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn validation_errors_exit_2() {
    // even n violates the parity constraint of the encoding
    let out = bin()
        .args(["cbsm-sim", "--n", "2", "--m", "1", "--alpha", "1.0", "--trials", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("\"kind\":\"validation\""), "stderr: {stderr}");

    let out = bin()
        .args(["cbsm-sim", "--eta0", "1.5", "--trials", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_4() {
    let out = bin()
        .args(["cbsm-sim", "--config", "/nonexistent/cbsm.conf"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("\"kind\":\"io\""), "stderr: {stderr}");
}

#[test]
fn config_precedence_cli_over_file_over_default() {
    let dir = tmpdir("config");
    let conf = dir.join("run.conf");
    std::fs::write(&conf, "alpha=1.0\nn=3\nm=3\ntrials=5000\nseed=9\n").unwrap();
    let out = bin()
        .args(["cbsm-sim", "--config"])
        .arg(&conf)
        .args(["--alpha", "1.6"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // CLI --alpha wins, file n/m/trials apply, defaults fill the rest.
    assert_eq!(v["config"]["alpha"], 1.6);
    assert_eq!(v["config"]["n"], 3);
    assert_eq!(v["config"]["trials"], 5000);
    assert_eq!(v["config"]["j"], 1);
    assert_eq!(v["estimates"]["n_trials"], 5000);

    // JSON config files work the same way.
    let jconf = dir.join("run.json");
    std::fs::write(&jconf, r#"{"alpha": 1.2, "m": 5, "trials": 4000}"#).unwrap();
    let out = bin().args(["cbsm-sim", "--config"]).arg(&jconf).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["alpha"], 1.2);
    assert_eq!(v["config"]["m"], 5);
}

#[test]
fn bsm_probs_matches_known_values() {
    // Lossless symmetric geometry: all error probabilities vanish.
    let out = bin()
        .args(["bsm-probs", "--geometry", "symmetric", "--eta0", "1.0", "--alpha", "0.8,1.6"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> =
        text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("alpha")).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        let (p_x, p_y, p_z) = (cols[4], cols[5], cols[6]);
        assert_eq!((p_x, p_y, p_z), (0.0, 0.0, 0.0));
        let total = cols[2] + cols[3];
        assert!((total - 1.0).abs() < 1e-12);
    }

    // Fig. 2 operating point: biased noise bound in the emitted CSV.
    let out = bin()
        .args(["bsm-probs", "--alpha", "1.0", "--eta0", "0.99"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().last().unwrap();
    let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
    assert!(cols[4] <= 1e-4 && cols[5] <= 1e-4, "p_x/p_y too large: {row}");
}

#[test]
fn bsm_probs_failure_z_tradeoff() {
    // Increasing alpha at fixed eta0 trades failures for Z errors.
    let out = bin()
        .args(["bsm-probs", "--alpha", "0.6,1.0,1.4,1.8", "--eta0", "0.99"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("alpha"))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    for w in rows.windows(2) {
        assert!(w[1][3] < w[0][3], "p_fail should decrease with alpha");
        assert!(w[1][6] > w[0][6], "p_z should increase with alpha");
    }
}

#[test]
fn oracle_check_passes_and_writes_report() {
    let out = bin().args(["oracle-check", "--level", "quick"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("violations=0"), "{text}");
}

#[test]
fn repeater_report_embeds_metadata() {
    let out = bin()
        .args([
            "repeater", "--n", "1", "--m", "5", "--alpha", "1.6", "--L", "5", "--L0", "1.0",
            "--trials", "20000", "--seed", "5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["config"]["L0"], 1.0);
    assert!(v["version"].is_string());
    assert!(v["metrics"]["rt0"].is_number());
    // eta1 = eta0 * exp(-L0/Latt)
    let eta1 = v["config"]["eta1"].as_f64().unwrap();
    assert!((eta1 - 0.99 * (-1.0f64 / 22.0).exp()).abs() < 1e-12);
}
