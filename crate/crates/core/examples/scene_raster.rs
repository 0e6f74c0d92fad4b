//! Places a cross on a small grid and prints the coefficient map.

use pixel_isac::scene::{PixelGrid, ScatterField, TargetShape};
use pixel_isac::Point2;

fn main() -> pixel_isac::Result<()> {
    let grid = PixelGrid::new(1.0, 1.0, 0.1, 0.1)?;
    let cross = TargetShape::cross(Point2::new(0.5, 0.5), 0.55, 0.15, 1.0);
    let field = ScatterField::place_targets(&grid, &[cross])?;
    for row in (0..grid.n_rows()).rev() {
        let line: Vec<String> =
            (0..grid.n_cols()).map(|col| format!("{:4.2}", field.coefficients()[grid.index(row, col)])).collect();
        println!("{}", line.join(" "));
    }
    let cloud = field.rasterize_fine(5)?;
    println!("{} fine scatterers, total weight {:.4}", cloud.len(), cloud.total_weight());
    Ok(())
}
