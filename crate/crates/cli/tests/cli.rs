//! End-to-end checks of the CLI surface: streaming detection, the
//! calibrate/edd pipeline, and deterministic scenario smoke runs.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seqdetect"))
}

#[test]
fn detect_streams_and_emits_alarm_record() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("stream.csv");
    // Gaussian d=1, CUSUM with theta1 = 1: increments x - 0.5.
    fs::write(&input, "0.2\n2.0\n5.0\n").unwrap();
    let output = bin()
        .args([
            "detect",
            "--model",
            "gaussian:1",
            "--detector",
            "cusum;theta1=1",
            "--threshold",
            "1.0",
            "--input",
        ])
        .arg(&input)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,statistic,alarmed,khat");
    // W_1 = max(0.2 - 0.5, 0) = 0; W_2 = 1.5 > 1 alarms; stream stops.
    assert!(lines[1].starts_with("1,0.000000,false"));
    assert!(lines[2].starts_with("2,1.500000,true"));
    let record: serde_json::Value = serde_json::from_str(lines[3]).unwrap();
    assert_eq!(record["stopped"], true);
    assert_eq!(record["stop_time"], 2);
    assert_eq!(lines.len(), 4, "no rows after the alarm");
}

#[test]
fn detect_reports_change_point_for_acm() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("stream.csv");
    let rows: Vec<String> = (0..30)
        .map(|i| if i < 10 { "0.0".to_string() } else { "3.0".to_string() })
        .collect();
    fs::write(&input, rows.join("\n")).unwrap();
    let output = bin()
        .args([
            "detect",
            "--model",
            "gaussian:1",
            "--detector",
            "acm;w=20",
            "--threshold",
            "8.0",
            "--input",
        ])
        .arg(&input)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    let last = text.lines().last().unwrap();
    let record: serde_json::Value = serde_json::from_str(last).unwrap();
    assert_eq!(record["stopped"], true);
    let khat = record["change_point"].as_u64().unwrap();
    assert!((10..=13).contains(&khat), "change point estimate {khat}");
}

#[test]
fn detect_consumes_event_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("events.txt");
    // A burst of closely spaced events excites the scan statistic.
    let mut times = Vec::new();
    let mut t = 0.0;
    for i in 0..60 {
        t += if i < 10 { 1.0 } else { 0.08 };
        times.push(format!("{t:.4}"));
    }
    fs::write(&input, times.join("\n")).unwrap();
    let output = bin()
        .args([
            "detect",
            "--model",
            "hawkes",
            "--detector",
            "asr;w=50;L=10;lambda0=1;beta=1;step=0.05",
            "--threshold",
            "5.0",
            "--input",
        ])
        .arg(&input)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    let last = text.lines().last().unwrap();
    let record: serde_json::Value = serde_json::from_str(last).unwrap();
    assert_eq!(record["stopped"], true, "burst should trip the detector: {text}");
}

#[test]
fn detect_rejects_malformed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "0.1,0.2\n").unwrap();
    let output = bin()
        .args([
            "detect",
            "--model",
            "gaussian:1",
            "--detector",
            "acm",
            "--threshold",
            "1",
            "--input",
        ])
        .arg(&input)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("expected 1 values"), "{err}");
}

#[test]
fn calibrate_then_edd_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{
            "scenario": "custom",
            "model": "gaussian:1",
            "gamma": 30.0,
            "trials": 80,
            "window": 25,
            "cap": 600,
            "seed": 17,
            "tolerance": 0.2,
            "detectors": [
                {"id": "asr", "kind": "asr"},
                {"id": "cusum", "kind": "cusum", "theta1": 1.5}
            ],
            "theta": 1.5
        }"#,
    )
    .unwrap();
    let calib = dir.path().join("calib.json");
    let status = bin()
        .args(["calibrate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&calib)
        .status()
        .unwrap();
    assert!(status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&calib).unwrap()).unwrap();
    assert_eq!(parsed["model"], "gaussian:1");
    assert!(parsed["results"]["asr"]["threshold"].is_number());
    assert!(parsed["results"]["cusum"]["threshold"].is_number());

    let out = dir.path().join("edd.csv");
    let status = bin()
        .args(["edd", "--config"])
        .arg(&config)
        .arg("--calib")
        .arg(&calib)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "scenario,param,detector,estimator,gamma,threshold,edd_mean,edd_stderr,trials,censor_frac,seed"
    );
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 11);
    }
}

#[test]
fn run_smoke_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &std::path::Path| {
        let mut c = bin();
        c.args([
            "run",
            "--scenario",
            "table2",
            "--seed",
            "41",
            "--gamma",
            "25",
            "--trials",
            "2",
            "--cap",
            "300",
            "--sweep",
            "5",
            "--out",
        ])
        .arg(out);
        c
    };
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    assert!(args(&out1).status().unwrap().success());
    assert!(args(&out2).status().unwrap().success());
    let a = fs::read_to_string(out1.join("table2.csv")).unwrap();
    let b = fs::read_to_string(out2.join("table2.csv")).unwrap();
    assert_eq!(a, b, "identical seed and config must give identical bytes");
    assert!(a.starts_with("scenario,param,detector"));
    assert!(out1.join("thresholds.json").exists());
}
