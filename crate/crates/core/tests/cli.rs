use std::process::{Command, Output};

use hardkernel_core::harness::{read_json, CSV_COLUMNS};
use hardkernel_core::instance::Instance;

fn hardkernel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardkernel"))
        .args(args)
        .env("HARDKERNEL_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_hard_instance_parses_back() {
    let text = stdout(&hardkernel(&["generate", "--d", "4", "--m", "32", "--seed", "9"]));
    match Instance::from_json(&text).unwrap() {
        Instance::Hard(k) => assert_eq!((k.d(), k.m()), (4, 32)),
        other => panic!("expected a hard instance, got {other:?}"),
    }
}

#[test]
fn generate_lowrank_with_search() {
    let text = stdout(&hardkernel(&["generate", "--kind", "lowrank", "--d", "4", "--m", "32", "--landmarks", "3"]));
    assert!(matches!(Instance::from_json(&text).unwrap(), Instance::LowRank(_)));
    let given = stdout(&hardkernel(&["generate", "--kind", "lowrank", "--d", "2", "--m", "8", "--z", "1,-1,-1,1"]));
    match Instance::from_json(&given).unwrap() {
        Instance::LowRank(inst) => assert_eq!(inst.z(), &[1, -1, -1, 1]),
        other => panic!("expected a low-rank instance, got {other:?}"),
    }
}

#[test]
fn run_writes_csv_to_stdout() {
    let text = stdout(&hardkernel(&["run", "--budget", "32", "--trials", "5", "--set", "seed=3"]));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(lines.count(), 5);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    std::fs::write(&cfg, "# squared loss floor\nloss = squared\nregime = soft\nlambda = 0.5\nbudget = 4\nd = 8\nm = 64\ny = 1\ntrials = 3\n").unwrap();
    let text = stdout(&hardkernel(&["run", "--config", cfg.to_str().unwrap(), "--trials", "7"]));
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().nth(1).unwrap().contains(",squared,"));
}

#[test]
fn sweep_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = (dir.path().join("t.csv"), dir.path().join("r.json"));
    let out = hardkernel(&[
        "sweep", "--budget", "16,32,64,128", "--trials", "10", "--csv", csv.to_str().unwrap(), "--json",
        json.to_str().unwrap(),
    ]);
    stdout(&out);
    let report = read_json(&json).unwrap();
    assert_eq!(report.points.len(), 4);
    assert!(report.slope.is_some());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 41);
    let table = stdout(&hardkernel(&["report", json.to_str().unwrap()]));
    assert!(table.contains("log-log slope"));
}

#[test]
fn verify_prints_one_line_per_criterion() {
    let text = stdout(&hardkernel(&["verify", "-c", "1", "-c", "4", "-c", "13"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l.contains("PASS")));
}

#[test]
fn bad_input_exits_nonzero() {
    assert!(!hardkernel(&["run", "--set", "loss=cubic"]).status.success());
    assert!(!hardkernel(&["verify", "-c", "99"]).status.success());
    assert!(!hardkernel(&["generate", "--d", "2", "--m", "7"]).status.success());
    assert!(!hardkernel(&["run", "--point", "5"]).status.success());
}
