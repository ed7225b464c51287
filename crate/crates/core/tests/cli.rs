//! End-to-end tests of the `rateind` binary: file formats, exit codes and
//! determinism.

use std::path::Path;
use std::process::Command;

use rateind::io::read_trajectory;
use rateind::model::example2_reference;

fn rateind(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_rateind"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const EPS_RUN: &str = r#"
[model]
name = "example2"
[scheme]
kind = "eps-neighborhood"
eps = 0.1
tau = 1e-3
"#;

#[test]
fn solve_writes_benchmark_run_and_verify_accepts_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", EPS_RUN);
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy();
    assert_eq!(rateind(&["solve", "--config", &cfg, "--out", &out_s]), 0);

    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# scheme=eps-neighborhood,"));
    assert_eq!(lines.next().unwrap(), "index,t,x0,step_psi,step_energy");
    // Nodes t_0 = 0, ..., t_2000 = 2.
    assert_eq!(lines.count(), 2001);

    let traj = read_trajectory(&out.join("trajectory.csv")).unwrap();
    assert!((traj.states.last().unwrap()[0] - example2_reference(2.0)).abs() < 1e-3);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["nodes"], 2001);

    let verify_out = dir.path().join("verify");
    let traj_path = out.join("trajectory.csv");
    let code = rateind(&[
        "verify",
        "--config",
        &cfg,
        "--out",
        &verify_out.to_string_lossy(),
        &traj_path.to_string_lossy(),
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(verify_out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn solve_is_deterministic_and_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "[model]\nname = \"double-well-2d\"\n[scheme]\nkind = \"eps-neighborhood\"\neps = 0.1\ntau = 2e-2\nx0 = [-1.0, -1.0]\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(rateind(&["solve", "--config", &cfg, "--out", &out.to_string_lossy(), "--seed", "5"]), 0);
    }
    for f in ["trajectory.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    // Re-serializing the parsed run reproduces the file byte for byte.
    let traj = read_trajectory(&a.join("trajectory.csv")).unwrap();
    let model = rateind::model::make_double_well_2d();
    let psi = rateind::model::Dissipation::weighted_l1(vec![1.0, 1.0]).unwrap();
    let again = dir.path().join("again.csv");
    rateind::io::write_trajectory(&again, &traj, &model, &psi).unwrap();
    assert_eq!(std::fs::read(a.join("trajectory.csv")).unwrap(), std::fs::read(again).unwrap());
}

#[test]
fn viscous_run_with_large_ratio_stays_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "[model]\nname = \"example2\"\n[scheme]\nkind = \"viscous\"\ntau = 1e-3\nviscosity_ratio = 2.0\n",
    );
    let out = dir.path().join("out");
    assert_eq!(rateind(&["solve", "--config", &cfg, "--out", &out.to_string_lossy()]), 0);
    let traj = read_trajectory(&out.join("trajectory.csv")).unwrap();
    assert!(traj.states.iter().all(|x| x[0] == 0.0));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy();
    let missing = write_config(dir.path(), "missing.toml", "[scheme]\nkind = \"energetic\"\ntau = 0.01\n");
    assert_eq!(rateind(&["solve", "--config", &missing, "--out", &out_s]), 2);
    let unknown = write_config(dir.path(), "unknown.toml", "[model]\nname = \"nope\"\n");
    assert_eq!(rateind(&["solve", "--config", &unknown, "--out", &out_s]), 2);
    let garbage = write_config(dir.path(), "garbage.toml", "this is not toml");
    assert_eq!(rateind(&["solve", "--config", &garbage, "--out", &out_s]), 2);
    assert_eq!(rateind(&["solve", "--out", &out_s]), 2);
    let ok = write_config(dir.path(), "ok.toml", EPS_RUN);
    let bogus = write_config(dir.path(), "bogus.csv", "index,t\n0,0\n");
    assert_eq!(rateind(&["verify", "--config", &ok, "--out", &out_s, &bogus]), 2);
}

#[test]
fn unstable_initial_state_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "[model]\nname = \"example2\"\n[scheme]\nkind = \"eps-neighborhood\"\neps = 0.1\ntau = 1e-2\nx0 = [1.0]\n",
    );
    assert_eq!(rateind(&["solve", "--config", &cfg, "--out", &dir.path().to_string_lossy()]), 3);
}

#[test]
fn sweep_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_config(
        dir.path(),
        "single.toml",
        "[model]\nname = \"example2\"\n[scheme]\nkind = \"energetic\"\ntau = 1e-2\n[sweep]\ntau = [1e-2]\n",
    );
    let out = dir.path().join("single");
    assert_eq!(rateind(&["sweep", "--config", &single, "--out", &out.to_string_lossy()]), 5);
    assert!(out.join("diagnostics.json").exists());

    // The energetic limit converges but violates the new balance.
    let energetic = write_config(
        dir.path(),
        "energetic.toml",
        "[model]\nname = \"example2\"\n[scheme]\nkind = \"energetic\"\ntau = 1e-2\n[sweep]\ntau = [1e-2, 1e-3, 1e-4]\n",
    );
    let out = dir.path().join("energetic");
    assert_eq!(rateind(&["sweep", "--config", &energetic, "--out", &out.to_string_lossy()]), 4);

    let eps = write_config(
        dir.path(),
        "eps.toml",
        "[model]\nname = \"example2\"\n[scheme]\nkind = \"eps-neighborhood\"\ntau = 1e-2\n[sweep]\neps = [0.2, 0.1, 0.05]\ntau = [1e-2, 1e-3, 1e-4]\n",
    );
    let out = dir.path().join("eps");
    assert_eq!(rateind(&["sweep", "--config", &eps, "--out", &out.to_string_lossy()]), 0);
    let balance: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("balance.json")).unwrap()).unwrap();
    assert_eq!(balance["balanced"], true);
    let limit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("limit.json")).unwrap()).unwrap();
    assert_eq!(limit["jumps"].as_array().unwrap().len(), 1);
}

#[test]
fn landscape_files_describe_the_benchmark_figures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("land");
    assert_eq!(rateind(&["landscape", "--out", &out.to_string_lossy()]), 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("landscape.json")).unwrap()).unwrap();
    let wells = |k: usize| -> Vec<(f64, f64)> {
        manifest["slices"][k]["wells"]
            .as_array()
            .unwrap()
            .iter()
            .map(|w| (w["x"][0].as_f64().unwrap(), w["value"].as_f64().unwrap()))
            .collect()
    };

    // t = 1/6: two wells of equal depth at 0 and sqrt(5/3).
    let w = wells(0);
    let zero = w.iter().find(|p| p.0.abs() < 1e-6).expect("well at 0");
    let upper = w.iter().find(|p| (p.0 - (5.0f64 / 3.0).sqrt()).abs() < 1e-4).expect("upper well");
    assert!((zero.1 - upper.1).abs() < 1e-9);

    // t = 1: the deepest well is at 2 sqrt(5)/3.
    let w = wells(1);
    let deepest = w.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((deepest.0 - 2.0 * 5.0f64.sqrt() / 3.0).abs() < 1e-4);

    // Just right of x = 0 the weak-local residual turns positive at t = 1.
    let mut rdr = csv::Reader::from_path(out.join("residual_grid.csv")).unwrap();
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    let x_min = rows.iter().map(|r| r[1]).filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min);
    for r in rows.iter().filter(|r| r[1] == x_min) {
        assert_eq!(r[3] == 1.0, r[0] >= 1.0, "t = {}", r[0]);
    }

    let curves = std::fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(curves.starts_with("t,energetic,eps_neighborhood,viscous\n"));
}
