use std::fs;
use std::process::{Command, Output};

fn staircase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_staircase"))
        .args(args)
        .env_remove("STAIRCASE_WORKERS")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn file_round_trip_through_noisy_channel() {
    let dir = tempfile::tempdir().unwrap();
    let (plain, coded, back) = (
        dir.path().join("in.bin"),
        dir.path().join("coded.bin"),
        dir.path().join("out.bin"),
    );
    let payload: Vec<u8> = (0..70_000u32).map(|i| (i * 31 % 256) as u8).collect();
    fs::write(&plain, &payload).unwrap();
    let enc = staircase(&["encode", plain.to_str().unwrap(), coded.to_str().unwrap()]);
    assert!(enc.status.success(), "{}", text(&enc.stderr));
    assert_eq!(fs::metadata(&coded).unwrap().len() % 32_640, 0);
    let dec = staircase(&[
        "decode",
        coded.to_str().unwrap(),
        back.to_str().unwrap(),
        "--p",
        "3e-3",
        "--seed",
        "11",
    ]);
    assert!(dec.status.success(), "{}", text(&dec.stderr));
    assert_eq!(fs::read(&back).unwrap(), payload);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(staircase(&["simulate"]).status.code(), Some(2));
    assert_eq!(staircase(&["no-such-command"]).status.code(), Some(2));
    let bad_p = staircase(&["simulate", "--p", "0.7", "--bits", "1000"]);
    assert_eq!(bad_p.status.code(), Some(2));
    assert!(text(&bad_p.stderr).contains("crossover"));
}

#[test]
fn check_reports_every_line_and_signals_failures() {
    let out = staircase(&["check"]);
    let stdout = text(&out.stdout);
    let lines: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .collect();
    assert_eq!(lines.len(), 20);
    let failed = lines.iter().any(|l| l.starts_with("FAIL"));
    assert_eq!(out.status.code(), Some(if failed { 1 } else { 0 }));
}

#[test]
fn floor_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = (dir.path().join("floor.csv"), dir.path().join("floor.json"));
    let out = staircase(&[
        "floor",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let table = fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("K,L,contribution\n"));
    assert_eq!(table.lines().count(), 1 + 25);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let total = summary["total"].as_f64().unwrap();
    assert!((total - 3.8187e-21).abs() < 1e-24);
    assert_eq!(summary["approximation"], false);

    let rect = staircase(&["floor", "--geometry", "g709"]);
    assert!(text(&rect.stdout).contains("rectangular approximation"));
}

#[test]
fn simulate_writes_json_with_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("sim.json");
    let out = staircase(&[
        "simulate",
        "--code",
        "uncoded",
        "--q-db",
        "7,8",
        "--bits",
        "1e6",
        "--workers",
        "2",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout).lines().count(), 3);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["config"]["workers"], 2);
    assert_eq!(report["config"]["code"]["kind"], "uncoded");
    assert_eq!(report["results"].as_array().unwrap().len(), 2);
    assert_eq!(report["results"][0]["ci_method"], "wilson-95");
}

#[test]
fn analysis_subcommands_emit_json() {
    let cap = staircase(&["capacity", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&cap.stdout).unwrap();
    assert!((v["shannon_ncg_db"].as_f64().unwrap() - 9.97).abs() < 0.05);

    let flow = staircase(&["dataflow", "product", "--preset", "reference", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&flow.stdout).unwrap();
    assert!((v["total_bits_per_s"].as_f64().unwrap() / 1e9 - 293.0).abs() < 2.93);
    assert_eq!(v["terms"].as_array().unwrap().len(), 4);
}

#[test]
fn csv_and_json_agree_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = (dir.path().join("s.csv"), dir.path().join("s.json"));
    let out = staircase(&[
        "simulate",
        "--p",
        "6e-3,5.5e-3",
        "--bits",
        "2e6",
        "--no-timing",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(
        header,
        ["p", "q_db", "bits", "errors_out", "ber_out", "ci_low", "ci_high", "stalls", "elapsed_s"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    for (row, res) in rows.iter().zip(report["results"].as_array().unwrap()) {
        for (col, key) in [(0, "p"), (1, "q_db"), (4, "ber_out"), (5, "ci_low"), (6, "ci_high")] {
            let v: f64 = row[col].parse().unwrap();
            assert_eq!(v, res[key].as_f64().unwrap(), "{key}");
        }
        assert_eq!(row[2].parse::<u64>().unwrap(), res["bits"].as_u64().unwrap());
        assert_eq!(row[3].parse::<u64>().unwrap(), res["bit_errors_out"].as_u64().unwrap());
        assert_eq!(row[7].parse::<u64>().unwrap(), res["stalls"].as_u64().unwrap());
    }
}
