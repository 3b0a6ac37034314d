use std::path::Path;
use std::process::{Command, Output};

use dumbbell_lab::config::ExperimentConfig;
use dumbbell_lab::manifest::{sha256_hex, Manifest};

fn dumbbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dumbbell")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "geometry": {"epsilons": [0.12, 0.08]},
  "mesh": {"h_max": 0.08},
  "output": {"formats": ["csv", "json"]}
}"#;

#[test]
fn print_defaults_round_trips() {
    let out = dumbbell(&["--print-defaults"]);
    assert!(out.status.success());
    let cfg = ExperimentConfig::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
}

#[test]
fn malformed_config_lists_problems_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"mesh": {"h_max": -1}, "solver": {"k": 0}}"#);
    let out_dir = dir.path().join("out");
    let out = dumbbell(&["mesh", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("mesh.h_max") && err.contains("solver.k"), "{err}");
    assert!(!out_dir.exists());

    let config = write_config(dir.path(), r#"{"mesh": {"hmax": 0.1}}"#);
    let out = dumbbell(&["mesh", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
}

#[test]
fn nodal_requires_neumann() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = dumbbell(&["nodal", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("neumann"));
    assert!(!out_dir.exists());
}

#[test]
fn sweep_writes_schema_and_complete_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out =
        dumbbell(&["sweep-eps", "--config", &config, "--out", out_dir.to_str().unwrap(), "--jobs", "2", "--seed", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eps,lambda1,mass_o1,mass_o2,mass_conn,hotspot_dist,sup_o2,mu2,alpha_dev1,alpha_dev2,nodal_contained,decay_violations"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("1.20000000000e-1,"));
    assert_eq!(rows[1].split(',').count(), 12);

    let manifest: Manifest =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.command, "sweep-eps");
    assert_eq!(manifest.seeds["solver"], 9);
    let mut on_disk: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    assert_eq!(on_disk, manifest.files.keys().cloned().collect::<Vec<_>>());
    for (name, hash) in &manifest.files {
        assert_eq!(&sha256_hex(&std::fs::read(out_dir.join(name)).unwrap()), hash, "{name}");
    }
    assert!(!on_disk.iter().any(|n| n.ends_with(".svg")), "svg not requested");
}

#[test]
fn failed_check_exits_two_and_keeps_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"geometry": {"epsilons": [0.12, 0.08]}, "mesh": {"h_max": 0.08},
            "analysis": {"thresholds": {"mass_o2": -1.0}}, "output": {"formats": ["json"]}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = dumbbell(&["report", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("dirichlet_mass_o2"));
    let report = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"pass\": false"));
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn mesh_command_files_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"geometry": {"epsilons": [0.1]}, "mesh": {"h_max": 0.1}}"#);
    let out_dir = dir.path().join("out");
    let out = dumbbell(&["mesh", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_dir.join("mesh_eps0.1.mesh")).unwrap();
    let mesh = dumbbell_lab::io::read_mesh(&text, None).unwrap();
    assert_eq!(mesh.holes, 0);
    let geometry =
        dumbbell_lab::io::read_geometry(&std::fs::read_to_string(out_dir.join("geometry_eps0.1.json")).unwrap())
            .unwrap();
    assert!((geometry.area() - mesh.area()).abs() < 1e-9);
    assert!(out_dir.join("mesh_eps0.1.svg").exists());
}
