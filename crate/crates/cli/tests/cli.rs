use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn flexperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexperc")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn compile_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = flexperc(&["compile", "--benchmark", "qaoa", "--n", "4", "--out-dir", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["circuit.txt", "pattern.json", "ir.json", "program.txt", "metrics.json"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let layers = json(&dir.path().join("metrics.json"))["logical_layers"].as_u64().unwrap();
    assert!(layers > 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains(&format!("logical layers: {layers}")));
}

#[test]
fn run_report_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = flexperc(&["run", "--benchmark", "qaoa", "--trials", "3", "--seed", "11", "--out-dir", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("report.json"));
    assert_eq!(r["trials"], 3);
    let trials = r["per_trial"].as_array().unwrap();
    assert_eq!(trials[0]["seed"], 11);
    assert_eq!(trials[2]["seed"], 13);
    // Aggregates are recomputable from the retained per-trial reports.
    let rsl: Vec<f64> = trials.iter().map(|t| t["report"]["rsl_consumed"].as_f64().unwrap()).collect();
    let mean = rsl.iter().sum::<f64>() / 3.0;
    assert!((r["rsl"]["mean"].as_f64().unwrap() - mean).abs() < 1e-9);
    assert_eq!(fs::read_dir(dir.path().join("events")).unwrap().count(), 3);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out");
    fs::write(&cfg, format!("trials = 4\nout_dir = {:?}\n[benchmark]\nname = \"vqe\"\nn = 4\n[hardware]\nrsl_width = 24\nrsl_height = 24\np_fusion = 0.9\n[renorm]\nnode_size = 12\n", out)).unwrap();
    let o = flexperc(&["run", "--config", cfg.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("report.json"))["trials"], 2);
}

#[test]
fn aborted_trials_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = flexperc(&["run", "--benchmark", "qaoa", "--trials", "1", "--cap", "3", "--out-dir", out]);
    assert_eq!(code(&o), 4);
    let r = json(&dir.path().join("report.json"));
    assert_eq!(r["rsl_cap_exceeded"], 1);
    assert_eq!(r["per_trial"][0]["report"]["outcome"], "rsl-cap-exceeded");
}

#[test]
fn baseline_hits_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = flexperc(&["baseline", "--benchmark", "qft", "--trials", "1", "--out-dir", out]);
    assert_eq!(code(&o), 4);
    assert_eq!(json(&dir.path().join("baseline.json"))["rsl"]["mean"], 1_000_000.0);
}

#[test]
fn config_and_mapper_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&flexperc(&["run", "--config", "/definitely/not/here.toml"])), 2);
    assert_eq!(code(&flexperc(&["sweep"])), 2);
    assert_eq!(code(&flexperc(&["frobnicate"])), 2);
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, "[benchmark]\nname = \"qaoa\"\nn = 4\n[virtual]\nwidth = 1\nheight = 1\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(code(&flexperc(&["compile", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])), 3);
}

#[test]
fn sweep_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(&cfg, "[sweep]\nparameter = \"p_fusion\"\nvalues = [0.5, 0.9]\n[hardware]\nrsl_width = 24\nrsl_height = 24\n[renorm]\nnode_size = 6\n")
        .unwrap();
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = flexperc(&["sweep", "--config", cfg.to_str().unwrap(), "--trials", "6", "--threads", threads, "--out-dir", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
        assert_eq!(String::from_utf8_lossy(&o.stdout), csv);
        csvs.push(csv);
    }
    assert_eq!(csvs[0], csvs[1]);
    let lines: Vec<&str> = csvs[0].lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("schema,parameter,value,metric,"));
    assert!(lines[2].starts_with("flexperc-sweep/1,p_fusion,0.900000,renorm,6,6,1.000000,"));
}

#[test]
fn verify_passes() {
    let o = flexperc(&["verify"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4, "{text}");
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = root.join("qaoa4.toml");
    let o = flexperc(&["compile", "--config", run.to_str().unwrap(), "--out-dir", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = root.join("node-size-sweep.toml");
    let o = flexperc(&["sweep", "--config", sweep.to_str().unwrap(), "--trials", "2", "--out-dir", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("sweep.csv")).unwrap().lines().count(), 9);
}
