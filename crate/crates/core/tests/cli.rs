use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn frachz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frachz")).args(args).output().expect("binary runs")
}

fn lines(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    text.lines().map(str::to_owned).collect()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn surface_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("surface.csv");
    let res = frachz(&["surface", "--out", path_arg(&out)]);
    assert!(res.status.success());
    let rows = lines(&out);
    assert_eq!(rows.len(), 101 * 101 + 1);
    assert_eq!(rows[0], "e_norm,de_norm,u_norm");
    assert!(rows[1].starts_with("-1,-1,-0.88889"));
}

#[test]
fn freqcheck_columns() {
    let res = frachz(&["freqcheck", "--beta", "-0.5", "--points", "5"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "omega_rad_s,mag_ideal,mag_filter,phase_ideal_deg,phase_filter_deg");
    assert_eq!(rows.len(), 6);
    let mid: Vec<f64> = rows[3].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(mid[0], 1.0);
    assert!((mid[2] - 1.0).abs() < 0.03 && (mid[4] + 45.0).abs() < 3.0);
}

#[test]
fn simulate_published_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let res = frachz(&["simulate", "--plant", "gp2", "--published", "fuzzy-pd-i", "--indices", "--out", path_arg(&out)]);
    assert!(res.status.success());
    let rows = lines(&out);
    assert_eq!(rows[0], "t,r,e,u,y");
    assert_eq!(rows.len(), 1 + 12000);
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("uss_mode=dc"));
    assert!(stdout.lines().any(|l| l.starts_with("istse_load=")));
}

#[test]
fn unstable_run_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let ctl = dir.path().join("ctl.json");
    fs::write(
        &ctl,
        r#"{"structure": "fuzzy-pd-i", "gains": {"K_e": 1, "K_d": 1, "K_i": 40, "K_PD": 40}, "orders": {"lambda": 2, "mu": 0}}"#,
    )
    .unwrap();
    let res = frachz(&["simulate", "--plant", "gp2", "--controller", path_arg(&ctl), "--out", path_arg(&dir.path().join("t.csv"))]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_with_one() {
    assert_eq!(frachz(&["simulate", "--plant", "gp9", "--published", "fuzzy-pid"]).status.code(), Some(1));
    assert_eq!(frachz(&["freqcheck", "--beta", "0.5", "--band", "10,1"]).status.code(), Some(1));
    assert_eq!(frachz(&["surface", "--no-such-flag"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"plant": "gp1", "ga": {"population": 4, "elite_count": 4}}"#).unwrap();
    assert_eq!(frachz(&["--config", path_arg(&bad), "tune"]).status.code(), Some(1));
    let ctl = dir.path().join("ctl.json");
    fs::write(&ctl, r#"{"structure": "fuzzy-pid", "gains": {"K_e": 1.5}}"#).unwrap();
    assert_eq!(frachz(&["simulate", "--plant", "gp1", "--controller", path_arg(&ctl)]).status.code(), Some(1));
    assert_eq!(frachz(&["--help"]).status.code(), Some(0));
}

#[test]
fn tune_writes_a_loadable_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("best.json");
    let res = frachz(&[
        "--seed",
        "4",
        "tune",
        "--plant",
        "gp3",
        "--structure",
        "fuzzy-pid",
        "--generations",
        "3",
        "--out",
        path_arg(&out),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.starts_with("best J = "));
    let spec: frachz::controllers::ControllerSpec = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(spec.structure(), frachz::controllers::Structure::FuzzyPid);

    let traj = dir.path().join("traj.csv");
    let res = frachz(&["simulate", "--plant", "gp3", "--controller", path_arg(&out), "--out", path_arg(&traj)]);
    assert!(matches!(res.status.code(), Some(0) | Some(2)));
}

#[test]
fn pareto_front_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("front.csv");
    let res = frachz(&[
        "pareto",
        "--plant",
        "gp3",
        "--structure",
        "fuzzy-pi-d",
        "--objectives",
        "tracking-disturbance",
        "--generations",
        "2",
        "--population",
        "12",
        "--out",
        path_arg(&out),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = lines(&out);
    assert_eq!(rows[0], "J1,J3,K_e,K_d1,K_PI,K_d2,lambda,mu1,mu2");
    assert!(rows.len() >= 2 && rows.len() <= 1 + 9);
}

#[test]
fn reproduce_tables_lists_published_costs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tables.csv");
    let res = frachz(&["reproduce-tables", "--out", path_arg(&out)]);
    assert!(res.status.success());
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("3.63147"));
    assert!(stdout.contains("39.8915"));
    let rows = lines(&out);
    assert_eq!(rows.len(), 16);
}
