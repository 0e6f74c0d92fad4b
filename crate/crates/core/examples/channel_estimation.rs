//! LS channel estimation with orthogonal pilots and LOS removal.

use pixel_isac::estimation::{cancel_los, estimate_all, stack_measurements};
use pixel_isac::forward::{make_pilots, simulate_received, true_channel, Coupling, NoiseSpec, SnrReference};
use pixel_isac::propagation::{los_matrices, AntennaArray, CarrierSet};
use pixel_isac::scene::{PixelGrid, ScatterField, TargetShape};
use pixel_isac::Point2;

fn main() -> pixel_isac::Result<()> {
    let grid = PixelGrid::new(1.0, 1.0, 0.1, 0.1)?;
    let field = ScatterField::place_targets(&grid, &[TargetShape::rectangle(Point2::new(0.5, 0.5), 0.2, 0.2, 1.0)])?;
    let cloud = field.rasterize_fine(9)?;
    let arrays = AntennaArray::new(
        (0..4).map(|i| Point2::new(-0.5, 0.2 + 0.2 * i as f64)).collect(),
        (0..4).map(|i| Point2::new(1.5, 0.2 + 0.2 * i as f64)).collect(),
    );
    let carriers = CarrierSet::new(30e9, 2, 100e6)?;
    let pilots = make_pilots(arrays.n_tx(), 16, carriers.count, 3)?;
    let los = los_matrices(&arrays, &carriers)?;
    let nlos = true_channel(&cloud, &arrays, &carriers, Coupling::PerPoint)?;

    for snr in [10.0, 20.0, 30.0] {
        let rx = simulate_received(&nlos, &los, &pilots, NoiseSpec::SnrDb(snr), SnrReference::Multipath, 3)?;
        let est = cancel_los(&estimate_all(&rx.y, &pilots)?, &los)?;
        let err: f64 = est.iter().zip(&nlos).map(|(e, h)| (e - h).norm_squared()).sum();
        let energy: f64 = nlos.iter().map(|h| h.norm_squared()).sum();
        println!("SNR {snr:>4} dB: NLOS estimate error {:+.2} dB", 10.0 * (err / energy).log10());
        if snr == 30.0 {
            println!("stacked measurement length {}", stack_measurements(&est)?.len());
        }
    }
    Ok(())
}
