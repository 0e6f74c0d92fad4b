//! Point gain at the pixel center against the area-averaged gain as the pixel grows.

use pixel_isac::propagation::{integral_gain, point_gain};
use pixel_isac::quadrature::QuadratureSpec;
use pixel_isac::{Point2, Rect};

fn main() -> pixel_isac::Result<()> {
    let antenna = Point2::new(-1.0, 0.2);
    let center = Point2::new(0.5, 0.5);
    let lambda = 0.01;
    let p = point_gain(antenna, center, lambda)?;
    println!("point gain {:.4e} (phase {:+.4} rad)", p.norm(), p.arg());
    println!("   size      |integral|   phase     rel.diff");
    for size in [1e-4, 1e-3, 5e-3, 1e-2, 5e-2, 0.1] {
        let g = integral_gain(antenna, &Rect::new(center, size, size), lambda, &QuadratureSpec::default())?;
        println!("{size:>8.0e}  {:.4e}  {:+.4}  {:.3e}", g.norm(), g.arg(), (g - p).norm() / p.norm());
    }
    Ok(())
}
