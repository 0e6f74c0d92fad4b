use pixel_isac::scene::{PixelGrid, ScatterField, TargetShape};
use pixel_isac::{Error, Point2};
use proptest::prelude::*;

#[test]
fn cross_on_desk_grid() {
    let grid = PixelGrid::new(3.0, 3.0, 0.1, 0.1).unwrap();
    let field = ScatterField::place_targets(&grid, &[TargetShape::cross(Point2::new(1.5, 1.5), 1.0, 0.2, 1.0)]).unwrap();
    // Two 10x2 bars sharing a 2x2 center.
    assert_eq!(field.occupancy().iter().filter(|o| **o).count(), 36);
    assert!(field.coefficients().iter().all(|c| *c == 0.0 || (*c - 1.0).abs() < 1e-12));
}

#[test]
fn partial_cover_gets_area_fraction() {
    let grid = PixelGrid::new(1.0, 1.0, 0.5, 0.5).unwrap();
    let field = ScatterField::place_targets(&grid, &[TargetShape::rectangle(Point2::new(0.25, 0.25), 0.25, 0.5, 0.8)]).unwrap();
    assert!((field.coefficients()[0] - 0.4).abs() < 1e-12);
    assert_eq!(field.occupancy(), &[true, false, false, false]);
}

#[test]
fn target_outside_roi_rejected() {
    let grid = PixelGrid::new(1.0, 1.0, 0.5, 0.5).unwrap();
    let err = ScatterField::place_targets(&grid, &[TargetShape::point(Point2::new(2.0, 0.5), 1.0)]).unwrap_err();
    assert!(matches!(err, Error::TargetOutOfBounds { index: 0 }));
}

#[test]
fn aligned_rectangle_fine_weights_sum_exactly() {
    let grid = PixelGrid::new(1.0, 1.0, 0.1, 0.1).unwrap();
    let t = TargetShape::rectangle(Point2::new(0.5, 0.5), 0.4, 0.2, 0.7);
    let field = ScatterField::place_targets(&grid, &[t]).unwrap();
    for s in [1, 2, 5, 8] {
        let cloud = field.rasterize_fine(s).unwrap();
        assert_eq!(cloud.len(), 8 * s * s);
        assert!((cloud.total_weight() - 8.0 * 0.7).abs() < 1e-9);
        assert!(cloud.points().iter().all(|p| field.occupancy()[p.pixel]));
    }
}

proptest! {
    #[test]
    fn index_round_trip(n_cols in 1usize..40, n_rows in 1usize..40, pick in 0usize..10_000) {
        let grid = PixelGrid::new(n_cols as f64 * 0.1, n_rows as f64 * 0.1, 0.1, 0.1).unwrap();
        prop_assert_eq!(grid.n_pixels(), n_cols * n_rows);
        let idx = pick % grid.n_pixels();
        let (r, c) = grid.row_col(idx);
        prop_assert_eq!(grid.index(r, c), idx);
        prop_assert_eq!(grid.index_of(&grid.center(idx)), Some(idx));
    }

    #[test]
    fn coefficients_in_unit_interval(
        cx in 0.2f64..0.8, cy in 0.2f64..0.8,
        len in 0.01f64..0.4, wid in 0.01f64..0.4,
        coef in 0.0f64..1.0, cross in any::<bool>(),
    ) {
        let grid = PixelGrid::new(1.0, 1.0, 0.1, 0.1).unwrap();
        let t = if cross {
            TargetShape::cross(Point2::new(cx, cy), len, wid.min(len), coef)
        } else {
            TargetShape::rectangle(Point2::new(cx, cy), len, wid, coef)
        };
        let field = ScatterField::place_targets(&grid, &[t]).unwrap();
        for (c, o) in field.coefficients().iter().zip(field.occupancy()) {
            prop_assert!((0.0..=1.0).contains(c));
            if coef > 0.0 {
                prop_assert_eq!(*o, *c > 0.0);
            }
        }
    }

    #[test]
    fn rectangle_mass_is_conserved(
        cx in 0.3f64..0.7, cy in 0.3f64..0.7,
        len in 0.01f64..0.5, wid in 0.01f64..0.5,
    ) {
        let grid = PixelGrid::new(1.0, 1.0, 0.1, 0.1).unwrap();
        let field = ScatterField::place_targets(&grid, &[TargetShape::rectangle(Point2::new(cx, cy), len, wid, 1.0)]).unwrap();
        let mass: f64 = field.coefficients().iter().sum::<f64>() * 0.01;
        prop_assert!((mass - len * wid).abs() < 1e-9);
    }
}
