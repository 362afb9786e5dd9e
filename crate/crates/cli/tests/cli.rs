//! End-to-end command tests through the compiled binary.

use std::path::Path;
use std::process::Command;

fn crysflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crysflow"))
}

/// A configuration small enough for smoke tests.
fn smoke_config(seed: u64, epochs: usize) -> String {
    let base = include_str!("data/smoke.toml");
    base.replace("seed = 0", &format!("seed = {seed}"))
        .replace("epochs = 4", &format!("epochs = {epochs}"))
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = crysflow()
        .args(["train", "--config", "/nonexistent/cfg.toml"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("reading config"), "{stderr}");
}

#[test]
fn train_smoke_produces_checkpoint_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, smoke_config(5, 4)).unwrap();
    let out_dir = dir.path().join("run");
    let out = crysflow()
        .args(["train", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = std::fs::read_to_string(out_dir.join("metrics.jsonl")).unwrap();
    assert_eq!(metrics.lines().count(), 4);
    assert!(out_dir.join("checkpoints/ckpt_final.cftn").exists());
    assert!(out_dir.join("config.toml").exists());
    // every line parses and carries the contract fields
    for line in metrics.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["epoch", "mean_reward", "modes", "states_visited", "loss", "logZ"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn same_seed_training_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, smoke_config(9, 3)).unwrap();
    let mut logs = Vec::new();
    for run in 0..2 {
        let out_dir = dir.path().join(format!("run{run}"));
        let out = crysflow()
            .args(["train", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        logs.push(std::fs::read(out_dir.join("metrics.jsonl")).unwrap());
    }
    assert_eq!(logs[0], logs[1]);
}

#[test]
fn sample_writes_ranked_cifs_that_reparse_and_rescore() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, smoke_config(11, 3)).unwrap();
    let out_dir = dir.path().join("run");
    assert!(crysflow()
        .args(["train", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap()
        .status
        .success());

    let samples = dir.path().join("samples");
    let out = crysflow()
        .args(["sample", "--config"])
        .arg(&cfg)
        .arg("--checkpoint")
        .arg(out_dir.join("checkpoints/ckpt_final.cftn"))
        .args(["-n", "10", "--seed", "4", "--out"])
        .arg(&samples)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let index: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(samples.join("index.json")).unwrap())
            .unwrap();
    let entries = index.as_array().unwrap();
    assert_eq!(entries.len(), 10);
    // sorted by composite reward, descending
    let composites: Vec<f64> = entries
        .iter()
        .map(|e| e["reward"]["composite"].as_f64().unwrap())
        .collect();
    for w in composites.windows(2) {
        assert!(w[0] >= w[1], "index not sorted: {composites:?}");
    }
    // every emitted structure re-parses, and its recomputed reward matches
    // the index entry
    let stats = crysflow_reward::BondStatsTable::default_table();
    let reward_cfg = crysflow_reward::RewardConfig::default();
    let oracle = crysflow_reward::SurrogatePotential::with_default_stats();
    for e in entries {
        let file = samples.join(e["file"].as_str().unwrap());
        let text = std::fs::read_to_string(&file).unwrap();
        let s = crysflow_xtal::parse_cif(&text).unwrap();
        assert!(!s.is_empty());
        let b =
            crysflow_reward::composite_reward(&s, &reward_cfg, &stats, &oracle, None).unwrap();
        let recorded = e["reward"]["composite"].as_f64().unwrap();
        // coordinates pass through 9-decimal CIF text, so allow tiny drift
        assert!(
            (b.composite - recorded).abs() < 1e-4,
            "recomputed {} vs recorded {}",
            b.composite,
            recorded
        );
    }
}

#[test]
fn evaluate_reports_zero_diversity_for_identical_structures() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples");
    std::fs::create_dir_all(&samples).unwrap();
    let s = crysflow_xtal::CrystalStructure::new(
        crysflow_xtal::Lattice::cubic(5.64).unwrap(),
        vec![
            crysflow_xtal::Atom::new(11, [0.0; 3]).unwrap(),
            crysflow_xtal::Atom::new(17, [0.5; 3]).unwrap(),
        ],
    )
    .unwrap();
    for i in 0..3 {
        std::fs::write(
            samples.join(format!("s{i}.cif")),
            crysflow_xtal::export_cif(&s, None),
        )
        .unwrap();
    }
    let report_path = dir.path().join("report.json");
    let out = crysflow()
        .args(["evaluate", "--dir"])
        .arg(&samples)
        .arg("--out")
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["diversity_structure"].as_f64().unwrap(), 0.0);
    assert_eq!(report["structure_validity_rate"].as_f64().unwrap(), 1.0);
    assert_eq!(report["composition_validity_rate"].as_f64().unwrap(), 1.0);
    assert!(report["match_rate"].is_null());
}

#[test]
fn evaluate_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("empty");
    std::fs::create_dir_all(&samples).unwrap();
    let out = crysflow().args(["evaluate", "--dir"]).arg(&samples).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn bond_stats_rejects_bad_rows_with_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bonds.csv");
    std::fs::write(&csv, "Li,O,3.5,1.0\n").unwrap();
    let out = crysflow()
        .args(["bond-stats", "--csv"])
        .arg(&csv)
        .arg("--out")
        .arg(dir.path().join("out.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 1"), "{stderr}");

    // a valid table installs and reproduces the bond-term constants
    std::fs::write(&csv, "Li,O,1.63,3.02\n").unwrap();
    let installed = dir.path().join("installed.csv");
    let out = crysflow()
        .args(["bond-stats", "--csv"])
        .arg(&csv)
        .arg("--out")
        .arg(&installed)
        .output()
        .unwrap();
    assert!(out.status.success());
    let table = crysflow_reward::BondStatsTable::parse_csv(
        &std::fs::read_to_string(&installed).unwrap(),
    )
    .unwrap();
    assert_eq!(table.get(3, 8), Some((1.63, 3.02)));
}

#[test]
fn export_converts_between_cif_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let s = crysflow_xtal::CrystalStructure::new(
        crysflow_xtal::Lattice::new(4.0, 5.0, 6.0, 80.0, 95.0, 110.0).unwrap(),
        vec![crysflow_xtal::Atom::new(14, [0.25, 0.5, 0.75]).unwrap()],
    )
    .unwrap();
    let cif = dir.path().join("s.cif");
    std::fs::write(&cif, crysflow_xtal::export_cif(&s, None)).unwrap();
    let json = dir.path().join("s.json");
    assert!(crysflow()
        .args(["export", "--input"])
        .arg(&cif)
        .arg("--output")
        .arg(&json)
        .output()
        .unwrap()
        .status
        .success());
    let back = crysflow_xtal::structure_from_json(&std::fs::read_to_string(&json).unwrap())
        .unwrap();
    assert_eq!(back.len(), 1);
    assert!((back.lattice.gamma - 110.0).abs() < 1e-6);
    // unknown extension is an error
    let out = crysflow()
        .args(["export", "--input"])
        .arg(&cif)
        .arg("--output")
        .arg(dir.path().join("s.xyz"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn default_config_prints_and_reloads() {
    let out = crysflow().arg("default-config").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("default.toml");
    std::fs::write(&path, &text).unwrap();
    // reloads and resolves
    let reparsed: toml::Value = toml::from_str(&text).unwrap();
    assert_eq!(reparsed["version"].as_integer(), Some(1));
    assert_eq!(reparsed["train"]["batch_size"].as_integer(), Some(32));
    assert_eq!(reparsed["reward"]["w_bond"].as_float(), Some(0.5));
    let _ = Path::new(&path);
}
