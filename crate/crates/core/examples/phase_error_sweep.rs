//! Planar phase error versus the fraction of the pixel a target covers.
//!
//! Run with `cargo run --release --example phase_error_sweep`.

use pixel_isac::analysis::{default_proportions, error_report, sweep_proportion, ErrorConfig};
use pixel_isac::geometry::{Point2, Rect};
use pixel_isac::quadrature::QuadratureSpec;

fn main() -> pixel_isac::error::Result<()> {
    let cfg = ErrorConfig {
        antenna: Point2::new(0.0, -0.12),
        pixel: Rect::new(Point2::new(0.0, 0.0), 0.1, 0.1),
        target_length: 0.1,
        target_width: 0.1,
        wavelength: 0.01,
        quadrature: QuadratureSpec::default(),
    };
    let report = error_report(&cfg)?;
    println!("d0 = {:.6} m, dp = {:.6} m", report.d0, report.dp);
    println!("point target:  conventional {:.4} rad, proposed {:.4} rad", report.e1_conventional, report.e1_proposed);
    println!("proportion  e2_conventional  e2_proposed");
    for row in sweep_proportion(&cfg, &default_proportions())? {
        println!("{:>10.1}  {:>15.4}  {:>11.4}", row.proportion, row.e2_conventional, row.e2_proposed);
    }
    Ok(())
}
