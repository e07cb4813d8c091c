use std::path::Path;
use std::process::{Command, Output};

use onewayrom::rom::problems::steady_reaction_diffusion;
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_onewayrom"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env("RUST_LOG", "error").output().unwrap()
}

fn write_config(dir: &Path, name: &str, value: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn steady(n_master: usize, n_slave: usize, training: Value) -> Value {
    json!({
        "problem": steady_reaction_diffusion(n_master, n_slave, 1, 1),
        "training": training,
        "testing": { "n_test": 2, "seed": 9 },
        "output": "out",
    })
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn offline_writes_bundle_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let training = json!({ "n_train": 5, "seed": 21, "tolerances": { "master": 1e-4, "deim": 1e-4, "slave": 1e-4 } });
    let cfg = write_config(dir.path(), "c.json", &steady(3, 2, training));
    let first = stdout_json(&run(&["offline", "--config", &cfg]));
    let bundle = Path::new(first[0]["dir"].as_str().unwrap()).to_path_buf();
    for f in ["V1.romb", "V2.romb", "PhiD.romb", "manifest.json"] {
        assert!(bundle.join(f).exists(), "{f}");
    }
    let manifest: Value = serde_json::from_slice(&std::fs::read(bundle.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["training_seed"], 21);
    assert!(manifest["slave_seed"].is_u64());
    let second = stdout_json(&run(&["offline", "--config", &cfg]));
    assert_eq!(first[0]["hash"], second[0]["hash"]);
    let reseeded = stdout_json(&run(&["offline", "--config", &cfg, "--seed", "22"]));
    assert_ne!(first[0]["hash"], reseeded[0]["hash"]);
}

#[test]
fn full_basis_toy_matches_fom_and_is_faster() {
    let dir = tempfile::tempdir().unwrap();
    let training =
        json!({ "n_train": 1, "seed": 1, "basis": "full", "tolerances": { "master": 0.5, "deim": 0.5, "slave": 0.5 } });
    let cfg = write_config(dir.path(), "c.json", &steady(4, 4, training));
    let off = stdout_json(&run(&["offline", "--config", &cfg]));
    let bundle = off[0]["dir"].as_str().unwrap();
    let out = dir.path().join("q");
    let o = run(&["online", "--bundle", bundle, "--mu1", "2.5,0.75", "--compare-fom", "--out", out.to_str().unwrap()]);
    let d = stdout_json(&o);
    for k in ["offline_s", "online_s", "fom_s", "speedup"] {
        assert!(d[k].is_f64(), "{k}");
    }
    assert!(d["relative_error"].as_f64().unwrap() <= 1e-8, "{}", d["relative_error"]);
    assert!(d["speedup"].as_f64().unwrap() > 1.0, "{}", d["speedup"]);
    assert_eq!(d["bound_valid"], true);
    assert!(out.join("slave.romb").exists() && out.join("diagnostics.json").exists());
}

#[test]
fn single_point_sweep_emits_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let training = json!({ "n_train": 4, "seed": 3, "grid": { "master": [1e-3], "deim": [1e-3], "slave": [1e-3] } });
    let cfg = write_config(dir.path(), "c.json", &steady(3, 2, training));
    let o = run(&["--threads", "2", "sweep", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("out").join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("eps1,eps_d,eps2,mean_error,mean_bound,online_s"));
    assert_eq!(String::from_utf8_lossy(&o.stdout), text);
}

#[test]
fn invalid_tolerance_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let training = json!({ "n_train": 5, "seed": 1, "tolerances": { "master": 1.5, "deim": 1e-4, "slave": 1e-4 } });
    let cfg = write_config(dir.path(), "c.json", &steady(2, 2, training));
    let o = run(&["offline", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("training.tolerances.master"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_bundle_and_bad_arity_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    assert_eq!(run(&["online", "--bundle", missing.to_str().unwrap(), "--mu1", "1,1"]).status.code(), Some(2));

    let training = json!({ "n_train": 3, "seed": 1, "tolerances": { "master": 1e-3, "deim": 1e-3, "slave": 1e-3 } });
    let cfg = write_config(dir.path(), "c.json", &steady(2, 2, training));
    let off = stdout_json(&run(&["offline", "--config", &cfg]));
    let o = run(&["online", "--bundle", off[0]["dir"].as_str().unwrap(), "--mu1", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn singular_master_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let training = json!({ "n_train": 2, "seed": 1, "tolerances": { "master": 1e-3, "deim": 1e-3, "slave": 1e-3 } });
    let mut cfg = steady(2, 2, training);
    // pure Neumann diffusion: no Dirichlet wall, no reaction
    cfg["problem"]["master"]["dirichlet"] = json!([]);
    cfg["problem"]["master"]["operator"] = json!([{ "kind": "diffusion", "theta": "alpha" }]);
    let path = write_config(dir.path(), "c.json", &cfg);
    let o = run(&["offline", "--config", &path]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn fom_verb_writes_solutions_and_honours_env_threads() {
    let dir = tempfile::tempdir().unwrap();
    let training = json!({ "n_train": 2, "seed": 1, "tolerances": { "master": 1e-3, "deim": 1e-3, "slave": 1e-3 } });
    let cfg = write_config(dir.path(), "c.json", &steady(2, 2, training));
    let out = dir.path().join("f");
    let o = bin()
        .args(["fom", "--config", &cfg, "--mu1", "1,2", "--out", out.to_str().unwrap()])
        .env("ROM_THREADS", "1")
        .output()
        .unwrap();
    let s = stdout_json(&o);
    assert_eq!(s["master_dofs"], 27);
    let bytes = std::fs::read(out.join("slave.romb")).unwrap();
    assert_eq!(&bytes[..4], b"ROMB");
}
