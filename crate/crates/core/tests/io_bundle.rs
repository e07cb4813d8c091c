use std::fs;

use onewayrom::experiment::{run_offline_config, run_sweep};
use onewayrom::io::{bundle_hash, load_bundle, read_csv, read_manifest, save_bundle, ExperimentConfig, ToleranceGrid};
use onewayrom::rom::problems::{heat_laplace, steady_reaction_diffusion};
use onewayrom::rom::{run_offline, CoupledFom, RomSolver, Tolerances, TrainingOptions};

fn steady_config(out: &std::path::Path) -> ExperimentConfig {
    let value = serde_json::json!({
        "problem": steady_reaction_diffusion(3, 2, 1, 1),
        "training": { "n_train": 5, "seed": 11, "tolerances": { "master": 1e-4, "deim": 1e-4, "slave": 1e-4 } },
        "testing": { "n_test": 2, "seed": 3 },
        "output": out,
    });
    let cfg = ExperimentConfig::from_json(&value.to_string()).unwrap();
    cfg.validate().unwrap();
    cfg
}

#[test]
fn bundle_round_trip_preserves_artifacts_and_solutions() {
    let fom = CoupledFom::new(&heat_laplace(3, 2, 4)).unwrap();
    let art = run_offline(&fom, &TrainingOptions::new(4, 5), Tolerances::uniform(1e-5)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let info = save_bundle(dir.path().join("b"), &art).unwrap();
    for f in ["V1.romb", "V2.romb", "PhiD.romb", "manifest.json", "timings.json"] {
        assert!(info.dir.join(f).exists(), "{f} missing");
    }
    assert!(!info.manifest.files.contains_key("timings.json"));
    assert_eq!(info.manifest.training_seed, 5);
    let (back, hash) = load_bundle(&info.dir).unwrap();
    assert_eq!(hash, info.hash);
    assert_eq!(back, art);
    assert_eq!(bundle_hash(&back), info.hash);

    let a = RomSolver::new(art).unwrap().solve(&[0.7], &[]).unwrap();
    let b = RomSolver::new(back).unwrap().solve(&[0.7], &[]).unwrap();
    assert_eq!(a.slave, b.slave);
}

#[test]
fn tampered_file_is_rejected() {
    let fom = CoupledFom::new(&steady_reaction_diffusion(2, 2, 1, 1)).unwrap();
    let art = run_offline(&fom, &TrainingOptions::new(3, 1), Tolerances::uniform(1e-3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let info = save_bundle(dir.path(), &art).unwrap();
    let p = info.dir.join("V2.romb");
    let mut bytes = fs::read(&p).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    fs::write(&p, bytes).unwrap();
    let err = load_bundle(&info.dir).unwrap_err().to_string();
    assert!(err.contains("digest"), "{err}");
}

#[test]
fn failed_write_leaves_no_partial_bundle() {
    let fom = CoupledFom::new(&steady_reaction_diffusion(2, 2, 1, 1)).unwrap();
    let art = run_offline(&fom, &TrainingOptions::new(3, 1), Tolerances::uniform(1e-3)).unwrap();
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("b");
    save_bundle(&dir, &art).unwrap();
    // a directory in place of a matrix file makes the second write fail midway
    fs::remove_file(dir.join("V2.romb")).unwrap();
    fs::create_dir(dir.join("V2.romb")).unwrap();
    assert!(save_bundle(&dir, &art).is_err());
    assert!(!dir.join("manifest.json").exists());
    assert!(!dir.join("V1.romb").exists());
    assert!(read_manifest(&dir).is_err());

    // a target that cannot be created fails before anything is written
    let file = root.path().join("plain");
    fs::write(&file, b"x").unwrap();
    assert!(save_bundle(file.join("b"), &art).is_err());
    assert_eq!(fs::read(&file).unwrap(), b"x");
}

#[test]
fn offline_config_is_deterministic() {
    let root = tempfile::tempdir().unwrap();
    let a = run_offline_config(&steady_config(&root.path().join("a"))).unwrap();
    let b = run_offline_config(&steady_config(&root.path().join("b"))).unwrap();
    assert_eq!(a.len(), 1);
    assert_eq!(a[0].hash, b[0].hash);
    let m = &a[0].manifest;
    assert_eq!(m.training_seed, 11);
    assert!(m.files.contains_key("V1.romb") && m.files.contains_key("PhiD.romb"));
}

#[test]
fn one_point_sweep_writes_single_row() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = steady_config(root.path());
    cfg.training.tolerances = None;
    cfg.training.grid = Some(ToleranceGrid { master: vec![1e-4], deim: vec![1e-4], slave: vec![1e-4] });
    let res = run_sweep(&cfg, true).unwrap();
    assert_eq!(res.rows.len(), 1);
    let rows = read_csv(root.path().join("sweep.csv")).unwrap();
    assert_eq!(rows, res.rows);
    assert!(rows[0].mean_bound >= rows[0].mean_error);
    assert!(res.queries[0].iter().all(|q| q.bound_valid == Some(true)));
}
