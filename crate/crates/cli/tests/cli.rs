use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn gaitforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaitforge"))
        .current_dir(dir)
        .env("GAITFORGE_LOG", "quiet")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs `find-gait` with an empty config and returns the artifact path.
fn find_default_gait(dir: &Path) -> PathBuf {
    fs::write(dir.join("empty.toml"), "").unwrap();
    let out = gaitforge(dir, &["find-gait", "--config", "empty.toml", "--out", "out"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    dir.join("out/gait.json")
}

fn load(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Writes `artifact` with a freshly computed checksum.
fn save_resealed(path: &Path, mut artifact: Value) {
    artifact["checksum"] = Value::String(String::new());
    let text = serde_json::to_string(&artifact).unwrap();
    artifact["checksum"] = Value::String(hex::encode(Sha256::digest(text.as_bytes())));
    fs::write(path, serde_json::to_string_pretty(&artifact).unwrap()).unwrap();
}

#[test]
fn empty_config_reproduces_the_prismatic_gait() {
    let dir = TempDir::new().unwrap();
    let gait = find_default_gait(dir.path());
    let artifact = load(&gait);
    let gamma = artifact["gamma"].as_f64().unwrap();
    assert!((0.4266..=0.4666).contains(&gamma), "γ = {gamma}");
    assert_eq!(artifact["format"], "gaitforge-gait-v1");
    assert_eq!(artifact["mode"], "quasi-passive");
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.starts_with("gamma = 0.4"));

    let check = gaitforge(dir.path(), &["check", "--gait", "out/gait.json"]);
    assert_eq!(check.status.code(), Some(0), "{}", stdout(&check));
    assert!(stdout(&check).contains("verdict = ok"));
}

#[test]
fn broken_periodicity_is_flagged() {
    let dir = TempDir::new().unwrap();
    let gait = find_default_gait(dir.path());
    let mut artifact = load(&gait);
    let z0 = artifact["a"][1].as_f64().unwrap();
    artifact["a"][1] = Value::from(z0 + 0.1);
    save_resealed(&gait, artifact);
    let check = gaitforge(dir.path(), &["check", "--gait", "out/gait.json"]);
    assert_eq!(check.status.code(), Some(1));
    let text = stdout(&check);
    assert!(text.contains("FLAG periodicity residual"), "{text}");
    assert!(text.contains("verdict = flagged"));
}

#[test]
fn corrupted_artifact_fails_the_checksum() {
    let dir = TempDir::new().unwrap();
    let gait = find_default_gait(dir.path());
    let text = fs::read_to_string(&gait)
        .unwrap()
        .replacen("\"gamma\": 0.4", "\"gamma\": 0.5", 1);
    fs::write(&gait, text).unwrap();
    for cmd in ["check", "continue", "export"] {
        let out = gaitforge(dir.path(), &[cmd, "--gait", "out/gait.json"]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        assert!(stderr(&out).contains("checksum"), "{cmd}: {}", stderr(&out));
    }
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("bad.toml"),
        "model = \"prismatic-monopod\"\nn = \"ten\"\n",
    )
    .unwrap();
    let out = gaitforge(dir.path(), &["find-gait", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    fs::write(dir.path().join("typo.toml"), "modle = \"prismatic-monopod\"\n").unwrap();
    let out = gaitforge(dir.path(), &["find-gait", "--config", "typo.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("modle"));

    let out = gaitforge(dir.path(), &["find-gait", "--model", "hexapod"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gaitforge(dir.path(), &["find-gait", "--op-kind", "height"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gaitforge(dir.path(), &["launch"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_sequence_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let rest = "candidates = [[0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]]\n[simulate]\nt_max = 2.0\n";
    fs::write(dir.path().join("rest.toml"), rest).unwrap();
    let out = gaitforge(dir.path(), &["find-gait", "--config", "rest.toml", "--out", "out"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no candidate start state"), "{}", stderr(&out));
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.starts_with("root search failed"));

    fs::write(dir.path().join("stance.toml"), "sequence = [1]\n").unwrap();
    let out = gaitforge(dir.path(), &["find-gait", "--config", "stance.toml", "--out", "out"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_writes_full_precision_csv() {
    let dir = TempDir::new().unwrap();
    let x0 = "0.0,0.9713,0.0676,0.1723,0.9999,0.3835,-0.5740,0.0082,-0.2443,-0.6487";
    let out = gaitforge(
        dir.path(),
        &[
            "simulate", "--x0", x0, "--gamma", "0.4466", "--eps", "0", "--out", "sim",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sim/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x,z,phi,alpha,l,dx,dz,dphi,dalpha,dl");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 100);
    let sample = csv.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    let mantissa = sample.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{sample}");
    assert!(csv.ends_with('\n') && !csv.contains('\r'));

    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    for i in 2..=10 {
        assert!(
            (first[i] - last[i]).abs() < 5e-2,
            "column {i}: {} vs {}",
            first[i],
            last[i]
        );
    }
}

#[test]
fn ballistic_drop_follows_a_parabola() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("drop.toml"), "sequence = [0, 1]\n").unwrap();
    let out = gaitforge(
        dir.path(),
        &[
            "simulate",
            "--config",
            "drop.toml",
            "--x0",
            "0,2,0,0,1,0,0,0,0,0",
            "--gamma",
            "0",
            "--eps",
            "1",
            "--out",
            "sim",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sim/trajectory.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    // The foot starts one unit up and lands at t = √2.
    let flight: Vec<&Vec<f64>> = rows.iter().take_while(|r| r[0] < 1.4).collect();
    assert!(flight.len() > 100);
    for r in flight {
        let t = r[0];
        assert!((r[2] - (2.0 - 0.5 * t * t)).abs() < 1e-9, "t = {t}");
    }
}

#[test]
fn full_pipeline_produces_an_actuated_gait() {
    let dir = TempDir::new().unwrap();
    find_default_gait(dir.path());
    let out = gaitforge(dir.path(), &["continue", "--gait", "out/gait.json", "--out", "out"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let path = fs::read_to_string(dir.path().join("out/path.csv")).unwrap();
    let mut lines = path.lines();
    assert_eq!(lines.next().unwrap(), "eps,t_stance,t_flight,c,mu_min,residual,delta");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][3], 0.0);
    assert_eq!(rows.last().unwrap()[0], 1.0);
    assert!(rows.last().unwrap()[3] > 0.0);
    assert!(rows.iter().all(|r| r[4] > 0.0));

    let actuated = load(&dir.path().join("out/actuated.json"));
    assert_eq!(actuated["mode"], "actuated");
    assert_eq!(actuated["eps"], 1.0);

    let check = gaitforge(dir.path(), &["check", "--gait", "out/actuated.json"]);
    let text = stdout(&check);
    assert_eq!(check.status.code(), Some(0), "{text}");
    assert!(text.contains("energy injected = 0.000000e0"), "{text}");
    assert!(text.contains("mu_min = "));

    let export = gaitforge(dir.path(), &["export", "--gait", "out/actuated.json", "--out", "exp"]);
    assert_eq!(export.status.code(), Some(0), "{}", stderr(&export));
    let grid = fs::read_to_string(dir.path().join("exp/grid.csv")).unwrap();
    assert!(grid.starts_with("t,x,z,phi,alpha,l,dx,dz,dphi,dalpha,dl,u_alpha,u_l\n"));
    assert!(dir.path().join("exp/simulated.csv").exists());
}
