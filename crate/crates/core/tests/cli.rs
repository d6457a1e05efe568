use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavegauge"))
        .args(args)
        .env_remove("WAVEGAUGE_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_moving_front() {
    let c = config("nagumo_quarter.toml");
    let o = run(&["verify", "-c", path_str(&c)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("kappa = 0.37"), "{out}");
    assert!(out.contains("gamma- = -0.5, gamma+ = 1.5"));
    assert!(!out.contains("[FAIL]"));
}

#[test]
fn verify_standing_front_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let j = dir.path().join("report.json");
    let c = config("nagumo_half.toml");
    let o = run(&["verify", "-c", path_str(&c), "--json", path_str(&j)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&j).unwrap()).unwrap();
    assert_eq!(doc["passed"], true);
    let k = doc["constants"]["constants"]["c_star"].as_f64().unwrap();
    assert!((k - 1.0 / 48.0).abs() < 1e-6);
}

#[test]
fn verify_names_failed_assumption() {
    let c = config("quintic_two_bumps.toml");
    let o = run(&["verify", "-c", path_str(&c)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL] f''<0 on (v*,1]"), "{}", stdout(&o));
}

#[test]
fn bad_configs_exit_2() {
    let c = config("nagumo_quarter.toml");
    let o = run(&["verify", "-c", path_str(&c), "--set", "a=1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`a`"));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "reaction = \"nagumo\"\na = 0.3\nbogus = 1\n").unwrap();
    let o = run(&["constants", "-c", path_str(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));

    let o = run(&["constants", "-c", path_str(&dir.path().join("missing.toml"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn override_changes_wave() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let c = config("nagumo_quarter.toml");
    let o = run(&["wave", "-c", path_str(&c), "-o", path_str(&out), "--set", "wave.n=256", "--set", "a=0.4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c_printed: f64 = stdout(&o).trim().trim_start_matches("c = ").parse().unwrap();
    assert!((c_printed - 0.2).abs() < 1e-12);

    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["x", "v", "vx", "vxx"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 256);
    let v: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(v.windows(2).all(|p| p[1] >= p[0]));

    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert!((side["c"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert_eq!(side["closed_form"], true);
    assert_eq!(side["provenance"]["n"], 256);
}

#[test]
fn constants_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("nagumo_quarter.toml");
    let mut docs = Vec::new();
    for name in ["a.json", "b.json"] {
        let p = dir.path().join(name);
        let o = run(&["constants", "-c", path_str(&c), "-o", path_str(&p)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        docs.push(std::fs::read(&p).unwrap());
    }
    assert_eq!(docs[0], docs[1]);
    let doc: serde_json::Value = serde_json::from_slice(&docs[0]).unwrap();
    assert!((doc["constants"]["kappa"].as_f64().unwrap() - 0.375).abs() < 1e-9);

    let o = run(&["constants", "-c", path_str(&c)]);
    let piped: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(piped, doc);
}

#[test]
fn simulate_deterministic_short_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let c = config("phase_lock.toml");
    let o = run(&[
        "simulate", "-c", path_str(&c), "-o", path_str(&out),
        "--set", "wave.n=1024", "--set", "sim.t_end=2.0", "--set", "sim.record_every=100",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["t", "h_norm", "envelope", "C", "C_minus_ct"]);
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[20][0] - 2.0).abs() < 1e-9);
    assert!(rows[20][1] < rows[0][1]);
}

#[test]
fn simulate_stochastic_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("mc_exit.toml");
    let mut outs = Vec::new();
    for name in ["s1.csv", "s2.csv"] {
        let p = dir.path().join(name);
        let o = run(&[
            "simulate", "-c", path_str(&c), "--mode", "stoch", "-o", path_str(&p),
            "--set", "sim.t_end=1.0", "--set", "sim.record_every=10",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outs.push(std::fs::read(&p).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn mc_exit_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc.json");
    let paths = dir.path().join("paths");
    let c = config("mc_exit.toml");
    let o = run(&[
        "--threads", "2", "mc-exit", "-c", path_str(&c), "-o", path_str(&out),
        "--paths", path_str(&paths), "--set", "sim.trials=4", "--set", "sim.t_max=1.0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["stats"]["trials"], 4);
    assert_eq!(doc["stats"]["exits"], 0);
    assert_eq!(std::fs::read_dir(&paths).unwrap().count(), 4);
}
