//! Experiment harness: JSON configs, end-to-end runs, sweeps and result files.

pub mod config;
pub mod output;
pub mod pipeline;
pub mod sweep;

pub use config::{ExperimentConfig, VERSION};
pub use pipeline::{channel_for, reconstruct, run_pipeline, PipelineDiagnostics, PipelineResult, Reconstruction, Scenario};
pub use sweep::{analyze_error, assemble_matrix, pixel_size_rows, sweep_pixel_size};
pub use output::{
    read_error_sweep, read_pixel_sweep, read_reconstruction, write_error_sweep, write_json, write_pixel_sweep,
    write_reconstruction, PixelSweepRow, Provenance, ReconstructionRow,
};
