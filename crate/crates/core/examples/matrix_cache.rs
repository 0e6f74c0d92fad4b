//! Assembles a measurement matrix once, then reloads it from the cache.

use std::time::Instant;

use pixel_isac::matfile::{read_matrix_file, ChannelCache};
use pixel_isac::propagation::{AntennaArray, CarrierSet};
use pixel_isac::quadrature::QuadratureSpec;
use pixel_isac::scene::PixelGrid;
use pixel_isac::{GainModel, Point2};

fn main() -> pixel_isac::Result<()> {
    let dir = std::env::temp_dir().join("pixel-isac-example-cache");
    let cache = ChannelCache::new(&dir);
    let grid = PixelGrid::new(1.0, 1.0, 0.05, 0.05)?;
    let arrays = AntennaArray::new(
        (0..8).map(|i| Point2::new(-0.5, 0.1 * i as f64 + 0.15)).collect(),
        (0..8).map(|i| Point2::new(1.5, 0.1 * i as f64 + 0.15)).collect(),
    );
    let carriers = CarrierSet::new(30e9, 4, 100e6)?;
    let q = QuadratureSpec::default();

    for pass in ["first", "second"] {
        let t = Instant::now();
        let ch = cache.get_or_assemble(&grid, &arrays, &carriers, GainModel::Integral, &q)?;
        println!("{pass} pass: {:?} matrix in {:.2?}", ch.measurement.shape(), t.elapsed());
    }
    let key = ChannelCache::key(&grid, &arrays, &carriers, GainModel::Integral, &q);
    let records = read_matrix_file(&cache.path_for(&key))?;
    for r in records.iter().take(3) {
        println!("{:<16} {}x{}", r.label, r.matrix.nrows(), r.matrix.ncols());
    }
    println!("... {} records in {}", records.len(), cache.dir().display());
    Ok(())
}
