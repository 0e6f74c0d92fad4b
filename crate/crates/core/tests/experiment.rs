use std::path::Path;
use std::process::Command;

use pixel_isac::experiment::{
    read_error_sweep, read_pixel_sweep, read_reconstruction, run_pipeline, ExperimentConfig,
};
use pixel_isac::matfile::read_matrix_file;

const SMALL: &str = r#"{
  "roi": { "L": 0.6, "W": 0.4 },
  "pixel": { "l_s": 0.1, "w_s": 0.1 },
  "antennas": {
    "tx": { "side": "left", "count": 4, "standoff": 0.5 },
    "rx": { "side": "right", "count": 4, "standoff": 0.5 }
  },
  "carriers": { "center_hz": 30e9, "K": 2, "spacing_hz": 100e6 },
  "pilots": { "T": 4 },
  "snr_db": 30,
  "snr_reference": "multipath",
  "targets": [ { "kind": "rectangle", "center": [0.25, 0.2], "l_t": 0.1, "w_t": 0.2 } ],
  "oracle": { "subdivision": 3 },
  "gamp": { "max_iters": 40 },
  "seed": 1
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pixel-isac"))
}

fn write_small(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("small.json");
    std::fs::write(&p, SMALL).unwrap();
    p
}

#[test]
fn desk_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/desk.json");
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.grid().unwrap().n_pixels(), 900);
    let arrays = cfg.arrays().unwrap();
    assert_eq!((arrays.n_tx(), arrays.n_rx()), (10, 10));
    assert_eq!(cfg.carrier_set().unwrap().count, 4);
}

#[test]
fn hash_ignores_out_dir_and_tracks_content() {
    let mut a = ExperimentConfig::from_json(SMALL).unwrap();
    let h = a.hash();
    a.out_dir = Some("elsewhere".into());
    assert_eq!(a.hash(), h);
    a.seed = 2;
    assert_ne!(a.hash(), h);
}

#[test]
fn serialized_config_reloads_identically() {
    let a = ExperimentConfig::from_json(SMALL).unwrap();
    let text = serde_json::to_string(&a).unwrap();
    let b = ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.hash(), b.hash());
}

#[test]
fn unknown_keys_rejected() {
    let bad = SMALL.replacen("\"seed\"", "\"sead\"", 1);
    assert!(ExperimentConfig::from_json(&bad).is_err());
}

#[test]
fn pipeline_writes_documented_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(SMALL).unwrap();
    let res = run_pipeline(&cfg, dir.path()).unwrap();
    let rows = read_reconstruction(&dir.path().join("reconstruction.csv")).unwrap();
    assert_eq!(rows.len(), 24);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!((r.row, r.col), (i / 6, i % 6));
        assert!((0.0..=1.0).contains(&r.x_hat));
        assert!(r.detected <= 1);
    }
    let text = std::fs::read_to_string(dir.path().join("reconstruction.csv")).unwrap();
    assert!(text.starts_with(&format!("# config_hash={}\n", cfg.hash())));

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    for key in ["config_hash", "version", "md", "fa", "nmse_db", "threshold", "flags"] {
        assert!(metrics.get(key).is_some(), "missing {key}");
    }
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["n_pixels"], 24);
    assert!(diag["gamp"]["iterations"].as_u64().unwrap() <= 40);
    assert_eq!(res.reconstruction.x_hat.len(), 24);
}

#[test]
fn cli_pipeline_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path());
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = bin()
            .args(["pipeline", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--seed", "5", "--model", "conventional"])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(
            ["reconstruction.csv", "metrics.json", "diagnostics.json"]
                .map(|f| std::fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
    let diag = String::from_utf8(outputs[0][2].clone()).unwrap();
    assert!(diag.contains("\"model\": \"conventional\""));
}

#[test]
fn cli_reports_errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{ "pixel": { "l_s": 0.07, "w_s": 0.1 } }"#).unwrap();
    let out = bin().args(["pipeline", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string());
    assert!(err["message"].is_string());
}

#[test]
fn cli_analyze_error_writes_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["analyze-error", "--out"]).arg(dir.path()).status().unwrap();
    assert!(status.success());
    let rows = read_error_sweep(&dir.path().join("error_sweep.csv")).unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.e2_proposed >= 0.0 && r.dp >= r.d0));
}

#[test]
fn cli_sweep_and_assemble() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path());
    let status = bin()
        .args(["sweep-pixel-size", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .args(["--sizes", "0.05,0.1"])
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_pixel_sweep(&dir.path().join("pixel_sweep.csv")).unwrap();
    let models: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(models, ["conventional", "integral", "conventional", "integral"]);
    assert_eq!(rows[2].size, 0.1);

    let out = bin().args(["assemble-matrix", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("assemble.json")).unwrap()).unwrap();
    assert_eq!(manifest["rows"], 2 * 4 * 4);
    assert_eq!(manifest["cols"], 24);
    let records = read_matrix_file(Path::new(manifest["path"].as_str().unwrap())).unwrap();
    assert!(!records.is_empty());
}

fn schema_covers(schema: &serde_json::Value, root: &serde_json::Value, value: &serde_json::Value, path: &str) {
    let schema = match schema.get("$ref").and_then(|r| r.as_str()) {
        Some(r) => root.pointer(r.trim_start_matches('#')).unwrap(),
        None => schema,
    };
    if let (Some(obj), Some(props)) = (value.as_object(), schema.get("properties")) {
        for (k, v) in obj {
            let sub = props.get(k).unwrap_or_else(|| panic!("{path}.{k} missing from schema"));
            schema_covers(sub, root, v, &format!("{path}.{k}"));
        }
    }
}

#[test]
fn schema_lists_every_serialized_key() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("schema/experiment.schema.json")).unwrap()).unwrap();
    for cfg in [ExperimentConfig::default(), ExperimentConfig::load(&dir.join("configs/desk.json")).unwrap()] {
        let value = serde_json::to_value(&cfg).unwrap();
        schema_covers(&schema, &schema, &value, "");
    }
}
