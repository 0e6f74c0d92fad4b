//! Full pipeline on the bundled desk config with both gain models.
//!
//! `cargo run --release --example desk_pipeline [out_dir]`

use std::path::{Path, PathBuf};

use pixel_isac::experiment::pipeline::write_outputs;
use pixel_isac::experiment::{channel_for, reconstruct, ExperimentConfig, Scenario};
use pixel_isac::GainModel;

fn main() -> pixel_isac::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/desk.json");
    let out: PathBuf = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| "out/desk".into());
    let cfg = ExperimentConfig::load(&path)?;
    let scenario = Scenario::build(&cfg)?;
    for model in [GainModel::Conventional, GainModel::Integral] {
        let channel = channel_for(&scenario, &cfg, model, None)?;
        let mut run_cfg = cfg.clone();
        run_cfg.model = model;
        let rec = reconstruct(&scenario, &run_cfg, &channel)?;
        let m = &rec.metrics;
        println!(
            "{:>12}: MD {:?} FA {:?} NMSE {:?} dB, mismatch {:?}",
            model.as_str(),
            m.md,
            m.fa,
            m.nmse_db,
            rec.diagnostics.model_mismatch
        );
        write_outputs(&run_cfg, &scenario, &rec, &out.join(model.as_str()))?;
    }
    Ok(())
}
