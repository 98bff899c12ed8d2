use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn gstrand() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gstrand"))
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    gstrand()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .env_remove("GSTRAND_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn ndjson(path: &Path) -> Vec<Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn so3_config() -> Value {
    json!({
        "schema": 1,
        "group": "so3",
        "grid": {"n": 64, "length": 1.0},
        "scheme": "spectral",
        "dt": 0.005,
        "t_end": 0.1,
        "closure": {"so3": {"a": [0.3, -0.4, 0.8], "mu": 0.2, "nu": 0.5, "f": [0.0, 0.1, -0.2, 0.05]}},
        "initial": {"random": {"amplitude": 0.5, "max_wavenumber": 3}},
        "seed": 3,
        "verify_steps": 20
    })
}

fn se2_config() -> Value {
    json!({
        "schema": 1,
        "group": "se2",
        "grid": {"n": 64, "length": 2.0},
        "scheme": "spectral",
        "dt": 0.01,
        "t_end": 0.2,
        "closure": {"se3": {"a1": [0.5, 0.2, 0.0], "a2": [0.0, 0.0, 0.7], "mu": 0.0, "nu": 0.0, "f": [0.0, 0.0, 0.3]}},
        "initial": {
            "fields": {"Gamma": {"offset": [1.0, 0.0, 0.0]}, "Omega": {"offset": [0.0, 0.0, 2.0]}},
            "random": {"amplitude": 0.2, "max_wavenumber": 2}
        },
        "snapshot_cadence": 10
    })
}

fn smk_config() -> Value {
    let mut q = [[0.0; 6]; 6];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 1.0 + 0.1 * i as f64;
    }
    q[0][4] = 0.2;
    q[4][0] = 0.2;
    json!({
        "schema": 1,
        "group": "smk",
        "grid": {"n": 64},
        "scheme": "central4",
        "dt": 0.005,
        "t_end": 0.05,
        "closure": {"smk": {"j": [[1.5, 0.1, 0.0], [0.1, 1.0, 0.0], [0.0, 0.0, 2.0]], "psi_q": q, "psi_l": [0.1, 0.0, 0.0, 0.0, 0.2, 0.0]}},
        "initial": {"random": {"amplitude": 0.4, "max_wavenumber": 2}},
        "verify_steps": 10,
        "output_cadence": 5
    })
}

#[test]
fn simulate_writes_all_outputs_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.json", &so3_config());
    let out = tmp.path().join("a");
    let o = run(&["simulate"], &cfg, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty(), "--quiet should silence stdout");

    let diag = ndjson(&out.join("diagnostics.ndjson"));
    // 20 steps at cadence 10 plus the initial record
    assert_eq!(diag.len(), 3);
    for rec in &diag {
        for key in ["t", "h", "H_m1", "H_0", "H_1", "zcr", "constraints", "drift"] {
            assert!(rec.get(key).is_some(), "missing {key} in {rec}");
        }
        assert!(rec["constraints"]["r3"].as_f64().unwrap() <= 1e-12);
        assert!(rec["zcr"]["5"].as_f64().unwrap() <= 1e-10);
    }
    assert!(diag[2]["drift"]["h"].as_f64().unwrap() < 1e-6);

    let snaps = out.join("snapshots");
    for f in ["step_00000000.csv", "step_00000000.json", "final.csv", "final.json"] {
        assert!(snaps.join(f).exists(), "missing {f}");
    }
    let csv = fs::read_to_string(snaps.join("final.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,field,component,value"));
    assert_eq!(lines.count(), 2 * 64 * 3);
    let meta = read_json(&snaps.join("final.json"));
    assert_eq!(meta["step"], 20);
    assert_eq!(meta["csv"], "final.csv");

    // the resolved config reproduces the run byte for byte
    let again = tmp.path().join("b");
    let o = run(&["simulate"], &out.join("config.resolved"), &again);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read(out.join("diagnostics.ndjson")).unwrap(),
        fs::read(again.join("diagnostics.ndjson")).unwrap()
    );
    assert_eq!(fs::read(snaps.join("final.csv")).unwrap(), fs::read(again.join("snapshots/final.csv")).unwrap());
}

#[test]
fn numbers_use_seventeen_significant_digits() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.json", &so3_config());
    let out = tmp.path().join("o");
    assert_eq!(code(&run(&["simulate"], &cfg, &out)), 0);
    let first = fs::read_to_string(out.join("diagnostics.ndjson")).unwrap();
    let line = first.lines().nth(1).unwrap();
    assert!(line.contains("\"t\":5.0000000000000003e-2"), "{line}");
    let resolved = fs::read_to_string(out.join("config.resolved")).unwrap();
    assert!(resolved.contains("5.0000000000000001e-3"), "{resolved}");
    let csv = fs::read_to_string(out.join("snapshots/final.csv")).unwrap();
    let value = csv.lines().nth(1).unwrap().rsplit(',').next().unwrap();
    let mantissa = value.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.len(), 18, "{value}");
}

#[test]
fn zero_end_time_writes_initial_snapshot_only() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = so3_config();
    cfg["t_end"] = json!(0.0);
    let path = write_config(tmp.path(), "run.json", &cfg);
    let out = tmp.path().join("o");
    assert_eq!(code(&run(&["simulate"], &path, &out)), 0);
    assert_eq!(ndjson(&out.join("diagnostics.ndjson")).len(), 1);
    let mut csvs: Vec<String> = fs::read_dir(out.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    csvs.sort();
    assert_eq!(csvs, ["step_00000000.csv"]);
}

#[test]
fn pure_advection_returns_after_one_period() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "schema": 1,
        "group": "so3",
        "grid": {"n": 64},
        "scheme": "spectral",
        "dt": 0.005,
        "t_end": 1.0,
        "output_cadence": 50,
        "snapshot_cadence": 0,
        "closure": {"so3": {"a": [0.0, 0.0, 1.0], "mu": 0.0, "nu": 0.0}},
        "initial": {"random": {"amplitude": 0.5, "max_wavenumber": 3}}
    });
    let path = write_config(tmp.path(), "adv.json", &cfg);
    let out = tmp.path().join("o");
    let o = run(&["simulate"], &path, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = read_json(&out.join("summary.json"));
    let err = summary["final_minus_initial"].as_f64().unwrap();
    // RK4 phase error at kΔt ≈ 0.094 for the top mode over 200 steps
    assert!(err < 1e-5, "advection error {err}");
}

#[test]
fn smk_run_reports_nonzero_constraints() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "smk.json", &smk_config());
    let out = tmp.path().join("o");
    let o = run(&["simulate"], &path, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for rec in ndjson(&out.join("diagnostics.ndjson")) {
        assert!(rec["constraints"]["r3"].as_f64().unwrap() > 1e-3, "{rec}");
    }
    // smk is an se3 run, so filament shapes are exported too
    assert!(out.join("snapshots/filament_final.csv").exists());
}

#[test]
fn verify_passes_for_integrable_closure() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "run.json", &so3_config());
    let out = tmp.path().join("o");
    let o = run(&["verify"], &path, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(&out.join("verify_report.json"));
    assert_eq!(report["pass"], true);
    // initial state plus every 10th step of a 20-step run
    assert_eq!(report["samples"].as_array().unwrap().len(), 3);
    assert_eq!(report["lambdas"], json!([0.5, 1.0, 2.0, 5.0]));
    assert!(report["max_zcr"]["5"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn verify_lambda_override() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "run.json", &so3_config());
    let out = tmp.path().join("o");
    let o = gstrand()
        .args(["verify", "--config"])
        .arg(&path)
        .args(["--lambdas", "0.25,-3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(&out.join("verify_report.json"));
    assert_eq!(report["lambdas"], json!([0.25, -3.0]));
    let resolved = read_json(&out.join("config.resolved"));
    assert_eq!(resolved["lambdas"], json!([0.25, -3.0]));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verify: pass"));
}

#[test]
fn verify_names_the_failing_row_for_smk() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "smk.json", &smk_config());
    let out = tmp.path().join("o");
    let o = run(&["verify"], &path, &out);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("lambda^3 constraint row (r3)"), "{}", stderr(&o));
    let report = read_json(&out.join("verify_report.json"));
    assert_eq!(report["pass"], false);
    assert_eq!(report["failures"][0]["check"], "r3");
    assert!(report["max_constraints"]["r4"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn verify_zero_fields_passes_trivially() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = so3_config();
    cfg["initial"] = json!({});
    let path = write_config(tmp.path(), "zero.json", &cfg);
    let out = tmp.path().join("o");
    assert_eq!(code(&run(&["verify"], &path, &out)), 0);
    let report = read_json(&out.join("verify_report.json"));
    assert_eq!(report["max_zcr"]["5"].as_f64().unwrap(), 0.0);
}

#[test]
fn verify_thread_setting_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "run.json", &so3_config());
    let mut reports = vec![];
    for threads in ["0", "3"] {
        let out = tmp.path().join(format!("t{threads}"));
        let o = gstrand()
            .args(["--quiet", "verify", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .env("GSTRAND_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        reports.push(fs::read(out.join("verify_report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn series_matches_closed_forms_on_a_snapshot() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "run.json", &so3_config());
    let out = tmp.path().join("o");
    assert_eq!(code(&run(&["simulate"], &path, &out)), 0);
    let snap = out.join("snapshots/final.csv");
    let o = gstrand()
        .args(["series", "--config"])
        .arg(&path)
        .arg("--snapshot")
        .arg(&snap)
        .arg("--out")
        .arg(tmp.path().join("s"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(&tmp.path().join("s/series_report.json"));
    assert_eq!(report["pass"], true);
    assert!(report["rho_m1_pointwise_err"].as_f64().unwrap() <= 1e-10);
    assert!(report["integrals"]["rho_1"]["abs_err"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn series_with_momentum_normal_to_a_has_zero_first_density() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = so3_config();
    cfg["closure"]["so3"]["a"] = json!([0.0, 0.0, 1.0]);
    cfg["t_end"] = json!(0.0);
    cfg["initial"] = json!({"fields": {
        "Pi": {"modes": [{"component": 0, "wavenumber": 1, "amplitude": 0.7}, {"component": 1, "wavenumber": 2, "amplitude": 0.3, "phase": 1.0}]},
        "Gamma": {"offset": [0.1, 0.2, 0.3], "modes": [{"component": 2, "wavenumber": 1, "amplitude": 0.4}]}
    }});
    let path = write_config(tmp.path(), "perp.json", &cfg);
    let out = tmp.path().join("o");
    assert_eq!(code(&run(&["simulate"], &path, &out)), 0);
    let snap = out.join("snapshots/step_00000000.csv");
    let s_out = tmp.path().join("s");
    let o = gstrand().args(["--quiet", "series", "--config"]).arg(&path).arg("--snapshot").arg(&snap).arg("--out").arg(&s_out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(&s_out.join("series_report.json"));
    assert_eq!(report["rotated"], true);
    assert!(report["rho_m1_max_abs"].as_f64().unwrap() < 1e-14);
}

#[test]
fn series_rejects_non_so3_snapshot() {
    let tmp = TempDir::new().unwrap();
    let se2 = write_config(tmp.path(), "se2.json", &se2_config());
    let out = tmp.path().join("o");
    assert_eq!(code(&run(&["simulate"], &se2, &out)), 0);

    // so3 config with an se3 snapshot of the same size
    let so3 = write_config(tmp.path(), "so3.json", &so3_config());
    let o = gstrand()
        .args(["--quiet", "series", "--config"])
        .arg(&so3)
        .arg("--snapshot")
        .arg(out.join("snapshots/final.csv"))
        .arg("--out")
        .arg(tmp.path().join("s"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("does not belong to a so3 state"), "{}", stderr(&o));

    // se3 config is rejected before reading the snapshot
    let o = gstrand()
        .args(["--quiet", "series", "--config"])
        .arg(&se2)
        .arg("--snapshot")
        .arg(out.join("snapshots/final.csv"))
        .arg("--out")
        .arg(tmp.path().join("s2"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("group"), "{}", stderr(&o));
}

#[test]
fn se2_run_keeps_split_and_stays_planar() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "se2.json", &se2_config());
    let out = tmp.path().join("o");
    let o = run(&["simulate"], &path, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for rec in ndjson(&out.join("diagnostics.ndjson")) {
        assert_eq!(rec["se2_split"].as_f64().unwrap(), 0.0);
    }
    let csv = fs::read_to_string(out.join("snapshots/filament_final.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,x,y,z"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 65);
    assert_eq!(rows[64][0], 2.0);
    assert!(rows.iter().all(|r| r[3].abs() < 1e-12), "filament left the plane");
    assert!(out.join("snapshots/filament_step_00000010.csv").exists());
}

#[test]
fn ode_forces_uniform_grid() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "schema": 1,
        "group": "so4_ex1",
        "grid": {"n": 64},
        "dt": 0.01,
        "t_end": 0.5,
        "closure": {"so4_ex1": {"a1": [0.2, 0.5, -0.1], "a2": [0.3, 0.0, 0.4], "mu": 0.3, "nu": 0.5}},
        "initial": {"fields": {"pi": {"offset": [0.5, -0.2, 0.1]}, "xi": {"offset": [0.1, 0.4, 0.6]}}}
    });
    let path = write_config(tmp.path(), "ode.json", &cfg);
    let out = tmp.path().join("o");
    let o = run(&["ode"], &path, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_json(&out.join("config.resolved"))["grid"]["n"], 1);
    let last = ndjson(&out.join("diagnostics.ndjson")).pop().unwrap();
    assert!(last["drift"]["C1"].as_f64().unwrap() < 1e-8, "{last}");
    assert!(last["drift"]["C2"].as_f64().unwrap() < 1e-8, "{last}");
    let csv = fs::read_to_string(out.join("snapshots/final.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 3);
}

#[test]
fn blow_up_keeps_last_good_snapshot() {
    // spectral advection at dt = 2ds puts the top mode outside the RK4
    // stability region, so it grows by ~50x per step until it overflows
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "schema": 1,
        "group": "so3",
        "grid": {"n": 64},
        "scheme": "spectral",
        "dt": 0.03125,
        "t_end": 20.0,
        "output_cadence": 1000,
        "snapshot_cadence": 0,
        "closure": {"so3": {"a": [0.0, 0.0, 1.0], "mu": 0.0, "nu": 0.0}},
        "initial": {"fields": {"Pi": {"modes": [{"component": 0, "wavenumber": 31, "amplitude": 1.0}]}}}
    });
    let path = write_config(tmp.path(), "boom.json", &cfg);
    let out = tmp.path().join("o");
    let o = run(&["simulate"], &path, &out);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("non-finite"), "{}", stderr(&o));
    let meta = read_json(&out.join("snapshots/last_good.json"));
    let step = meta["step"].as_u64().unwrap();
    assert!(step > 10 && step < 640, "blow-up at step {step}");
    let csv = fs::read_to_string(out.join("snapshots/last_good.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().is_finite()));
}

#[test]
fn validation_errors_exit_with_code_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");

    let mut cfg = so3_config();
    cfg["group"] = json!("se3");
    let path = write_config(tmp.path(), "mismatch.json", &cfg);
    let o = run(&["simulate"], &path, &out);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("closure.so3"), "{}", stderr(&o));

    let mut cfg = so3_config();
    cfg["grid"]["n"] = json!(63);
    let path = write_config(tmp.path(), "odd.json", &cfg);
    let o = run(&["verify"], &path, &out);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("scheme"), "{}", stderr(&o));

    let path = tmp.path().join("broken.json");
    fs::write(&path, "{\n  \"schema\": 1,\n  \"group\": so3\n}").unwrap();
    let o = run(&["simulate"], &path, &out);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = run(&["simulate"], &tmp.path().join("missing.json"), &out);
    assert_eq!(code(&o), 2);
}
