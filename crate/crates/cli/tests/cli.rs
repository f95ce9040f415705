use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracking-game"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn coeffs_rows_cover_the_grid_and_weights_sum_to_one() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "coeffs",
        "--scenario",
        "delta-hedge",
        "--grid-uniform",
        "500",
        "--grid-tail",
        "50",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("coeffs.csv"));
    assert_eq!(header, ["t", "c_plus", "c_minus", "w1", "w2", "w3", "w4", "w5", "urgency"]);
    assert_eq!(rows.len(), 551);
    let w: Vec<Vec<f64>> = ["w1", "w2", "w3", "w4", "w5"]
        .iter()
        .map(|n| column(&header, &rows, n))
        .collect();
    for i in 0..rows.len() {
        assert!((w[0][i] + w[1][i] + w[2][i] + w[3][i] - 1.0).abs() < 1e-12);
    }
    let last = rows.len() - 1;
    for (k, lim) in [0.5, 0.5, 0.0, 0.0, 0.0].iter().enumerate() {
        assert!((w[k][last] - lim).abs() < 1e-3);
    }
}

#[test]
fn solve_buying_schedule_meets_terminal_target_and_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = run(&["solve", "--scenario", "buying-schedule", "--out", path_str(d)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["player1.csv", "player2.csv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap());
        assert!(!x.contains(&b'\r'));
    }
    let (header, rows) = read_csv(&a.join("player1.csv"));
    assert_eq!(header, ["t", "x", "alpha", "xi_hat", "xi_hat_minus_w5_x_opp"]);
    let x = column(&header, &rows, "x");
    assert!((x.last().unwrap() - 2.0).abs() < 1e-3);

    let summary = read_json(&a.join("summary.json"));
    assert_eq!(summary["config"]["scenario"], "buying-schedule");
    assert!(summary["method_agreement"]["max_abs_diff"].as_f64().unwrap() < 1e-6);
    let sol = read_json(&a.join("solution.json"));
    assert_eq!(sol["x1"].as_array().unwrap().len(), rows.len());
}

#[test]
fn pinned_seed_reproduces_stochastic_solve() {
    let dir = TempDir::new().unwrap();
    let solve = |name: &str, seed: &str| {
        let d = dir.path().join(name);
        let out = run(&[
            "solve",
            "--scenario",
            "delta-hedge-pair",
            "--seed",
            seed,
            "--grid-uniform",
            "400",
            "--grid-tail",
            "40",
            "--out",
            path_str(&d),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(d.join("player2.csv")).unwrap()
    };
    assert_eq!(solve("a", "42"), solve("b", "42"));
    assert_ne!(solve("a", "42"), solve("c", "43"));
    let summary = read_json(&dir.path().join("a/summary.json"));
    assert_eq!(summary["path"]["seed"], 42);
}

#[test]
fn ensemble_solve_writes_labelled_bands() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "solve",
        "--scenario",
        "delta-hedge-pair",
        "--paths",
        "40",
        "--grid-uniform",
        "200",
        "--grid-tail",
        "40",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&dir.path().join("bands_player1.csv"));
    assert_eq!(rows.len(), 101);
    let summary = read_json(&dir.path().join("summary.json"));
    assert!(summary["bands"]["note"].as_str().unwrap().contains("quantile"));
    assert_eq!(summary["n_paths"], 40);
    assert!(summary["terminal_gaps"]["max"].as_f64().unwrap() < 1e-3);
}

#[test]
fn verify_passes_on_deterministic_builtins() {
    let dir = TempDir::new().unwrap();
    for name in ["liquidation-plastic", "constant-targets-elastic"] {
        let d = dir.path().join(name);
        let out = run(&["verify", "--scenario", name, "--perturbations", "10", "--out", path_str(&d)]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let report = read_json(&d.join("verification.json"));
        assert_eq!(report["passed"], true);
        for field in [
            "riccati_max_res",
            "kernel_mass_err",
            "fbsde_max_drift",
            "gateaux_abs_max",
            "nash_vertex_offset",
            "terminal_gaps",
            "own_impact_err",
        ] {
            let check = &report["report"][field];
            assert!(check["value"].is_number() && check["tolerance"].is_number(), "{field}");
            assert!(check["passed"].is_boolean() && check["skipped"].is_boolean());
        }
    }
}

#[test]
fn tampered_solution_fails_naming_the_vertex_check() {
    let dir = TempDir::new().unwrap();
    let solved = dir.path().join("solved");
    let out = run(&["solve", "--scenario", "liquidation-elastic", "--out", path_str(&solved)]);
    assert_eq!(code(&out), 0);

    // Bump player one's rate by a zero-mean wave and move the holdings with it.
    let mut sol = read_json(&solved.join("solution.json"));
    let nodes: Vec<f64> = sol["signal"]["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let horizon = 2.0;
    let omega = 2.0 * std::f64::consts::PI / horizon;
    for (i, &t) in nodes.iter().enumerate() {
        let a = sol["alpha1"][i].as_f64().unwrap() + 0.2 * (omega * t).sin();
        let x = sol["x1"][i].as_f64().unwrap() + 0.2 * (1.0 - (omega * t).cos()) / omega;
        sol["alpha1"][i] = a.into();
        sol["x1"][i] = x.into();
    }
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&sol).unwrap()).unwrap();

    let report_dir = dir.path().join("report");
    let out = run(&[
        "verify",
        "--scenario",
        "liquidation-elastic",
        "--solution",
        path_str(&tampered),
        "--perturbations",
        "5",
        "--out",
        path_str(&report_dir),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nash_vertex_offset"));
    let report = read_json(&report_dir.join("verification.json"));
    let failing: Vec<&str> = report["failing"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(failing.contains(&"nash_vertex_offset"), "{failing:?}");

    // The untouched file still verifies.
    let out = run(&[
        "verify",
        "--scenario",
        "liquidation-elastic",
        "--solution",
        path_str(&solved.join("solution.json")),
        "--perturbations",
        "5",
        "--out",
        path_str(&report_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solution_for_other_parameters_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = run(&["solve", "--scenario", "liquidation-plastic", "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "verify",
        "--scenario",
        "liquidation-elastic",
        "--solution",
        path_str(&dir.path().join("solution.json")),
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_rows_and_predation_flags() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "sweep",
        "--gamma",
        "0.1,0.5,1,2",
        "--lambda",
        "1",
        "--grid-uniform",
        "400",
        "--grid-tail",
        "40",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    let k = header.iter().position(|h| h == "predation").unwrap();
    let flags: Vec<&str> = rows.iter().map(|r| r[k].as_str()).collect();
    assert_eq!(flags, ["false", "true", "true", "true"]);

    let out = run(&["sweep", "--gamma", "1,2", "--lambda", "0.5,1,2", "--grid-uniform", "200", "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 0);
    assert_eq!(read_csv(&dir.path().join("sweep.csv")).1.len(), 6);
}

#[test]
fn empty_gamma_list_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"gammas": [], "lambdas": [1.0]}"#).unwrap();
    let out = run(&["sweep", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 2);
    let out = run(&["sweep", "--gamma", "", "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 2);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out_dir = dir.path().join("from-config");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "scenario": "constant-targets",
            "grid": { "n_uniform": 300, "n_tail": 30 },
            "out": out_dir,
            "outputs": { "weights": true, "signals": false }
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&["solve", "--config", path_str(&cfg), "--grid-tail", "20"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&out_dir.join("player1.csv"));
    assert_eq!(header, ["t", "x", "alpha"]);
    assert_eq!(rows.len(), 321);
    assert!(out_dir.join("coeffs.csv").exists());
    let summary = read_json(&out_dir.join("summary.json"));
    assert_eq!(summary["config"]["grid"]["n_tail"], 20);
    assert_eq!(summary["config"]["grid"]["n_uniform"], 300);

    std::fs::write(&cfg, r#"{"scenario": "constant-targets", "colour": 3}"#).unwrap();
    assert_eq!(code(&run(&["solve", "--config", path_str(&cfg)])), 2);
}

#[test]
fn scenario_files_are_accepted_and_validated() {
    let dir = TempDir::new().unwrap();
    let scenario = dir.path().join("mine.json");
    std::fs::write(
        &scenario,
        r#"{
            "params": {"lambda": 0.5, "gamma": 1.0, "sigma": 2.0, "horizon_T": 3.0},
            "x1": 1.0, "x2": -0.5,
            "target1": {"kind": "PiecewiseConstant", "breakpoints": [0, 1.5, 3], "levels": [0.5, 0.0], "terminal": 0.0},
            "target2": {"kind": "Zero"}
        }"#,
    )
    .unwrap();
    let out = run(&["solve", "--scenario", path_str(&scenario), "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["scenario"]["x2"], -0.5);

    std::fs::write(
        &scenario,
        r#"{"params": {"lambda": -1, "gamma": 1, "sigma": 1, "horizon_T": 1},
            "x1": 0, "x2": 0, "target1": {"kind": "Zero"}, "target2": {"kind": "Zero"}}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["solve", "--scenario", path_str(&scenario)])), 2);
}

#[test]
fn unknown_scenario_and_unwritable_output() {
    assert_eq!(code(&run(&["solve", "--scenario", "no-such-thing"])), 2);
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = run(&["coeffs", "--scenario", "delta-hedge", "--out", path_str(&blocker.join("sub"))]);
    assert_eq!(code(&out), 3);
}
