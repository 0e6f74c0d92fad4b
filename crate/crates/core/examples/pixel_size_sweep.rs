//! MD/FA of both models over pixel sizes on a small scene.

use pixel_isac::experiment::{pixel_size_rows, ExperimentConfig};

const CONFIG: &str = r#"{
  "roi": { "L": 1.0, "W": 1.0 },
  "pixel": { "l_s": 0.1, "w_s": 0.1 },
  "antennas": {
    "tx": { "side": "left", "count": 6, "standoff": 0.5 },
    "rx": { "side": "right", "count": 6, "standoff": 0.5 }
  },
  "carriers": { "center_hz": 30e9, "K": 2, "spacing_hz": 100e6 },
  "pilots": { "T": 8 },
  "snr_db": 25,
  "targets": [ { "kind": "rectangle", "center": [0.5, 0.5], "l_t": 0.2, "w_t": 0.2 } ],
  "oracle": { "subdivision": 5 },
  "seed": 2
}"#;

fn main() -> pixel_isac::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    println!("  size         model     MD     FA");
    for row in pixel_size_rows(&cfg, &[0.05, 0.1, 0.2], None)? {
        println!("{:>6.2} {:>13} {:>6} {:>6}", row.size, row.model, fmt(row.md), fmt(row.fa));
    }
    Ok(())
}

fn fmt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.3}"))
}
