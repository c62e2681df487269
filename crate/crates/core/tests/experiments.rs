use std::fs;
use std::path::Path;
use std::process::Command;

use ultimatum_ql::experiment::{
    run_experiment, spec_from_args, HEATMAP_COLUMNS, TIME_SERIES_COLUMNS, TRANSITION_COLUMNS,
};

fn args(list: &str, out: &Path) -> Vec<String> {
    let mut v: Vec<String> = list.split_whitespace().map(String::from).collect();
    v.push("--out".into());
    v.push(out.display().to_string());
    v
}

fn run(list: &str, out: &Path) {
    let spec = spec_from_args(&args(list, out)).unwrap();
    run_experiment(&spec).unwrap();
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    names
}

#[test]
fn ten_steps_give_ten_rows() {
    let dir = tempfile::tempdir().unwrap();
    run("run --steps 10 --ensemble 2 --seed 3", dir.path());
    let rows = lines(&dir.path().join("time_series.csv"));
    assert_eq!(rows[0], TIME_SERIES_COLUMNS.join(","));
    assert_eq!(rows.len(), 11);
    for (k, row) in rows[1..].iter().enumerate() {
        assert!(row.starts_with(&format!("{k},")), "{row}");
    }
}

#[test]
fn boundary_rows() {
    let dir = tempfile::tempdir().unwrap();
    run(
        "theory-boundary --l 0.3 --gamma-grid 0.3,0.6,0.9",
        dir.path(),
    );
    let rows = lines(&dir.path().join("boundary.csv"));
    assert_eq!(
        rows,
        [
            "gamma,alpha_boundary",
            "0.300000000000,0.363636363636",
            "0.600000000000,0.500000000000",
            "0.900000000000,0.800000000000",
        ]
    );
}

#[test]
fn every_csv_has_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    run(
        "run --steps 50 --ensemble 2 --seed 11 --snapshot-every 25",
        dir.path(),
    );
    let names = csv_files(dir.path());
    assert_eq!(
        names,
        [
            "preferences.csv",
            "preferences_conditional.csv",
            "time_series.csv"
        ]
    );
    for name in names {
        let meta = dir.path().join(name.replace(".csv", ".meta.json"));
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(meta).unwrap()).unwrap();
        assert_eq!(v["master_seed"], 11);
        assert_eq!(v["spec"]["mode"], "run");
        assert!(v["rng"].as_str().unwrap().contains("ChaCha8"));
        assert!(v["code_version"].is_string());
    }
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let cmd = "transitions --steps 400 --windows 100:200,300:400 --ensemble 6 --seed 21 --every 50";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    run(cmd, a.path());
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run(cmd, b.path()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| run(cmd, c.path()));
    let names = csv_files(a.path());
    assert_eq!(names, ["time_series.csv", "transitions.csv"]);
    for name in &names {
        let x = fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name}");
        assert_eq!(x, fs::read(c.path().join(name)).unwrap(), "{name}");
    }
    let t = lines(&a.path().join("transitions.csv"));
    assert_eq!(t[0], TRANSITION_COLUMNS.join(","));
    assert_eq!(t.len(), 1 + 2 * 81);

    let d = tempfile::tempdir().unwrap();
    run(&cmd.replace("--seed 21", "--seed 22"), d.path());
    assert_ne!(
        fs::read(a.path().join("time_series.csv")).unwrap(),
        fs::read(d.path().join("time_series.csv")).unwrap()
    );
}

#[test]
fn scan_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    run(
        "scan-game --l-grid 0.1,0.3 --h-grid 0.6:0.9:3 --steps 30 --window 10 --ensemble 2",
        dir.path(),
    );
    let rows = lines(&dir.path().join("heatmap.csv"));
    assert_eq!(rows[0], HEATMAP_COLUMNS.join(","));
    assert_eq!(rows.len(), 1 + 6);
    assert!(rows[1].starts_with("0.100000000000,0.600000000000,"));
    assert!(rows[6].starts_with("0.300000000000,0.900000000000,"));
}

#[test]
fn lattice_mode_runs() {
    let dir = tempfile::tempdir().unwrap();
    run(
        "lattice --n 5 --steps 20 --ensemble 2 --snapshot-every 10",
        dir.path(),
    );
    assert_eq!(lines(&dir.path().join("time_series.csv")).len(), 21);
    let prefs = lines(&dir.path().join("preferences.csv"));
    assert_eq!(prefs[0], "round,state,role,mass_l,mass_m,mass_h");
    assert!(prefs.len() > 1);
}

#[test]
fn config_file_and_flag_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "mode = run\nbogus = 1\n").unwrap();
    let err = spec_from_args(&["--config".into(), cfg.display().to_string()]).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");

    fs::write(&cfg, "# comment\nsteps = 40\nalpha = 0.5\n").unwrap();
    let spec = spec_from_args(&[
        "run".into(),
        format!("--config={}", cfg.display()),
        "--alpha".into(),
        "0.2".into(),
    ])
    .unwrap();
    assert_eq!(spec.run.steps, 40);
    assert_eq!(spec.run.learn.alpha(), 0.2);

    let err = spec_from_args(&["run".into(), "--colour".into(), "red".into()]).unwrap_err();
    assert!(err.to_string().contains("--colour"), "{err}");
    assert!(spec_from_args(&["run".into(), "--l".into(), "0.6".into()]).is_err());
    assert!(spec_from_args(&["run".into(), "--alpha".into(), "0".into()]).is_err());
}

#[test]
fn binary_reports_errors_with_status_two() {
    let bin = env!("CARGO_BIN_EXE_ultimatum-ql");
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert!(help.status.success());
    assert!(String::from_utf8_lossy(&help.stdout).contains("theory-boundary"));

    let bad = Command::new(bin)
        .args(["run", "--l", "0.6"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));

    let dir = tempfile::tempdir().unwrap();
    let ok = Command::new(bin)
        .args(["theory-boundary", "--gamma-grid", "0.5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert!(dir.path().join("boundary.csv").exists());
}
