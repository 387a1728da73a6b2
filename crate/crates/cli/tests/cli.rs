// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ebs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ebs")).args(args).output().unwrap()
}

fn simulate(dir: &Path, model: &str, seed: u64) -> PathBuf {
    let path = dir.join(format!("{model}-{seed}.txt"));
    let out = ebs(&["simulate", "--model", model, "--seed", &seed.to_string(), "--timestamps", "--output", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn structured(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn text_and_structured_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path(), "B1", 4);
    let p = input.to_str().unwrap();
    let text = ebs(&["detect", p, "--histogram"]);
    let json = ebs(&["detect", p, "--histogram", "--out", "structured"]);
    assert!(text.status.success() && json.status.success());
    let records = structured(&json);
    let header = &records[0];
    assert_eq!(header["record"], "header");

    let text = stdout(&text);
    let field = |k: &str| {
        text.lines().find_map(|l| l.strip_prefix(&format!("{k}: "))).unwrap_or_else(|| panic!("{k} missing")).to_string()
    };
    let num = |s: &str| s.parse::<f64>().unwrap();
    assert_eq!(num(&field("ensemble_size")), header["ensemble_size"].as_f64().unwrap());
    assert_eq!(num(&field("draws")), header["M"].as_f64().unwrap());
    assert_eq!(num(&field("observations")), header["observations"].as_f64().unwrap());
    assert_eq!(num(&field("delta")), header["config"]["delta"].as_f64().unwrap());

    let fit = field("fit");
    let kv: Vec<(&str, &str)> = fit.split(' ').filter_map(|p| p.split_once('=')).collect();
    let get = |k: &str| kv.iter().find(|(a, _)| *a == k).unwrap().1;
    assert_eq!(num(get("omega")), header["fit"]["omega"].as_f64().unwrap());
    assert_eq!(num(get("F")), header["fit"]["dampening"].as_f64().unwrap());
    assert_eq!(num(get("loglik")), header["fit"]["loglik"].as_f64().unwrap());
    assert_eq!(get("converged"), header["fit"]["converged"].to_string());

    let cps: Vec<&Value> = records.iter().filter(|r| r["record"] == "change_point").collect();
    assert!(!cps.is_empty());
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip_while(|l| !l.starts_with("index\t"))
        .skip(1)
        .take_while(|l| !l.starts_with("hour\t"))
        .map(|l| l.split('\t').collect())
        .collect();
    assert_eq!(rows.len(), cps.len());
    for (row, cp) in rows.iter().zip(&cps) {
        assert_eq!(num(row[0]), cp["index"].as_f64().unwrap());
        assert_eq!(num(row[1]), cp["timestamp"].as_str().unwrap().parse::<f64>().unwrap());
        assert_eq!(num(row[2]), cp["V"].as_f64().unwrap());
        assert_eq!(num(row[3]), cp["f"].as_f64().unwrap());
        assert_eq!(num(row[4]), cp["rank"].as_f64().unwrap());
    }
    let hours: Vec<&Value> = records.iter().filter(|r| r["record"] == "histogram").collect();
    let total: u64 = hours.iter().map(|h| h["count"].as_u64().unwrap()).sum();
    assert_eq!(total as usize, cps.len());
}

#[test]
fn same_seed_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path(), "EQ10", 2);
    let p = input.to_str().unwrap();
    let a = ebs(&["detect", p, "--seed", "5", "--out", "structured"]);
    let b = ebs(&["detect", p, "--seed", "5", "--out", "structured"]);
    assert_eq!(a.stdout, b.stdout);
    let c = ebs(&["detect", p, "--seed", "6", "--out", "structured"]);
    assert_ne!(a.stdout, c.stdout, "seed is echoed, so outputs differ");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path(), "S4", 1);
    let p = input.to_str().unwrap();
    assert_eq!(ebs(&["detect", p, "--method", "bs"]).status.code(), Some(0));
    assert_eq!(ebs(&["detect", p, "--method", "bs", "--M", "100"]).status.code(), Some(1));
    assert_eq!(ebs(&["detect", p, "--select", "above-mean", "--pi-thr", "0.1"]).status.code(), Some(1));
    assert_eq!(ebs(&["detect", p, "--pi-thr", "1.5"]).status.code(), Some(1));
    assert_eq!(ebs(&["detect", p, "--bogus"]).status.code(), Some(1));
    assert_eq!(ebs(&["detect", p, "--format", "durations", "--deseasonalize"]).status.code(), Some(1));
    assert_eq!(ebs(&["simulate", "--model", "nope"]).status.code(), Some(1));
    assert_eq!(ebs(&["calibrate", "--grid", "500,1000,2000"]).status.code(), Some(1));
    assert_eq!(ebs(&["--help"]).status.code(), Some(0));

    let short = dir.path().join("short.txt");
    std::fs::write(&short, (0..50).map(|i| format!("{i}\n")).collect::<String>()).unwrap();
    let o = ebs(&["detect", short.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 100"));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "timestamp\n0\n1\nx\n").unwrap();
    let o = ebs(&["detect", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));

    // numeric timestamps carry no time of day
    assert_eq!(ebs(&["detect", p, "--deseasonalize"]).status.code(), Some(2));
}

#[test]
fn duplicate_timestamps_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dups.txt");
    let mut body = String::from("timestamp\n");
    let mut t = 0.0;
    for i in 0..300 {
        t += 0.5 + (i * 7 % 11) as f64 * 0.1;
        body.push_str(&format!("{t:.1}\n"));
        if i % 100 == 7 {
            body.push_str(&format!("{t:.1}\n"));
        }
    }
    std::fs::write(&path, body).unwrap();
    let o = ebs(&["detect", path.to_str().unwrap(), "--out", "structured", "--dampening", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = &structured(&o)[0];
    assert_eq!(header["dropped_zero_durations"], 3);
    assert_eq!(header["observations"], 299);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dropped 3 zero duration"));
}

#[test]
fn wall_clock_input_with_deseasonalization() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("day.txt");
    let mut body = String::from("timestamp\n");
    // one event every 2 s from 09:30 with a slower lunch hour
    let mut t = 9.5 * 3600.0;
    while t < 16.0 * 3600.0 {
        let secs = t as u64;
        body.push_str(&format!("2021-06-01T{:02}:{:02}:{:02}\n", secs / 3600, secs / 60 % 60, secs % 60));
        t += if (12.0 * 3600.0..13.0 * 3600.0).contains(&t) { 6.0 } else { 2.0 } + (secs % 3) as f64;
    }
    std::fs::write(&path, body).unwrap();
    let o = ebs(&["detect", path.to_str().unwrap(), "--deseasonalize", "--out", "structured", "--histogram"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = structured(&o);
    assert_eq!(recs[0]["deseasonalized"], true);
    let hours: Vec<i64> = recs.iter().filter(|r| r["record"] == "histogram").map(|r| r["hour"].as_i64().unwrap()).collect();
    assert_eq!(hours, (9..=15).collect::<Vec<_>>());
    for cp in recs.iter().filter(|r| r["record"] == "change_point") {
        assert!(cp["timestamp"].as_str().unwrap().starts_with("2021-06-01T"));
    }

    // a session covering one bin only: proceed raw with a warning
    let o = ebs(&["detect", path.to_str().unwrap(), "--deseasonalize", "--session", "09:30-09:40", "--out", "structured"]);
    assert!(o.status.success());
    assert_eq!(structured(&o)[0]["deseasonalized"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("deseasonalization skipped"));
}

#[test]
fn calibration_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cal = dir.path().join("c1.txt");
    let o = ebs(&["calibrate", "--grid", "500,1000,2000,4000", "--reps", "20", "--output", cal.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&cal).unwrap();
    assert!(text.contains("reps 20"));
    let input = simulate(dir.path(), "S5", 3);
    let o = ebs(&["detect", input.to_str().unwrap(), "--calibration-file", cal.to_str().unwrap(), "--out", "structured"]);
    assert!(o.status.success());
    assert_eq!(structured(&o)[0]["config"]["calibration"], cal.to_str().unwrap());

    let broken = dir.path().join("broken.txt");
    std::fs::write(&broken, "alpha 0.05\n").unwrap();
    let o = ebs(&["detect", input.to_str().unwrap(), "--calibration-file", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_and_grid_emit_tables() {
    let o = ebs(&["bench", "--models", "S2", "--methods", "bs,ebs", "--reps", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    assert!(csv.starts_with("model,method,reps,false_positive_rate"));
    assert_eq!(csv.lines().count(), 3);

    let o = ebs(&["grid", "--T", "500", "--M", "50", "--pi-thr", "0,1", "--reps", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "t,draws,pi_thr,reps,false_positive_rate");
    assert!(lines[2].ends_with(",0.0") || lines[2].ends_with(",0"));
}

#[test]
fn simulate_writes_durations() {
    let o = ebs(&["simulate", "--model", "S4", "--seed", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("duration"));
    assert_eq!(text.lines().count(), 2001);
    assert!(String::from_utf8_lossy(&o.stderr).contains("change-points []"));
}
