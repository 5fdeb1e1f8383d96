use std::path::PathBuf;
use std::process::{Command, Output};

fn esdg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esdg")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("esdg-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn cost_model_table() {
    let dir = scratch("cost");
    let out = esdg(&["cost-model", "--N", "1..7", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.join("cost.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "N,scheme,flux_evals,matrix_ops");
    assert_eq!(rows.len(), 1 + 21);
    assert!(rows.contains(&"1,GLL,48,48"));
    assert!(rows.contains(&"7,GLL,12288,12288"));
    assert!(rows.contains(&"7,Staggered,19683,47331"));
    assert!(rows.contains(&"7,Gauss,18432,18432"));
}

#[test]
fn operator_check_passes() {
    let dir = scratch("ops");
    let out = esdg(&["operator-check", "--N", "1..15", "--families", "both", "--pairs", "2000", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("operator_report.txt")).unwrap();
    assert!(report.trim_end().ends_with("PASS"));
}

#[test]
fn derivative_demo_csv() {
    let dir = scratch("deriv");
    let out = esdg(&["derivative-demo", "--N", "1..3", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(dir.join("derivative.csv")).unwrap();
    let first = rdr.records().next().unwrap().unwrap();
    let decoupled: f64 = first[2].parse().unwrap();
    assert!((decoupled - 1.37796).abs() < 0.05 * 1.37796);
}

#[test]
fn short_vortex_run_is_deterministic() {
    let run = |name: &str| {
        let dir = scratch(name);
        let cfg = dir.join("run.cfg");
        std::fs::write(&cfg, "# short run\nmesh = 8x4\ntfinal = 0.1\noutput_interval = 0.05\nfamily = gll\n").unwrap();
        let out = esdg(&[
            "vortex2d",
            "--config",
            cfg.to_str().unwrap(),
            "--family",
            "gauss",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let errors = std::fs::read_to_string(dir.join("errors.csv")).unwrap();
        let ts = std::fs::read_to_string(dir.join("timeseries.csv")).unwrap();
        (errors, ts)
    };
    let (e1, t1) = run("det-a");
    let (e2, t2) = run("det-b");
    assert_eq!(e1, e2);
    assert_eq!(t1, t2);
    assert!(e1.lines().nth(1).unwrap().contains(",2,gauss,"));
    assert_eq!(t1.lines().count(), 1 + 3);
}

#[test]
fn exit_codes() {
    assert_eq!(esdg(&["vortex2d", "--mesh", "8"]).status.code(), Some(1));
    assert_eq!(esdg(&["vortex3d", "--flux", "matrix"]).status.code(), Some(1));
    assert_eq!(esdg(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(esdg(&["--help"]).status.code(), Some(0));
    let dir = scratch("badcfg");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(esdg(&["tgv", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn blow_up_exits_with_runtime_failure() {
    let dir = scratch("blowup");
    let out = esdg(&[
        "vortex2d",
        "--mesh",
        "8x4",
        "--flux",
        "ec",
        "--cfl",
        "50",
        "--tfinal",
        "5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let ts = std::fs::read_to_string(dir.join("timeseries.csv")).unwrap();
    assert!(ts.lines().count() >= 2, "partial time series retained");
}
