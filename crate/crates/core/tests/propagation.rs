mod common;

use num_complex::Complex64;
use pixel_isac::propagation::{
    assemble_channel, integral_gain, integral_gains, point_gain, AntennaArray, CarrierSet, GainModel,
};
use pixel_isac::quadrature::QuadratureSpec;
use pixel_isac::scene::PixelGrid;
use pixel_isac::{Error, Point2, Rect};
use proptest::prelude::*;

const LAMBDA: f64 = 0.01;

#[test]
fn point_gain_magnitude_and_phase() {
    let g = point_gain(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0), LAMBDA).unwrap();
    let expected = common::gain(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0), LAMBDA);
    assert!((g - expected).norm() <= 1e-15 * expected.norm());
    assert!((g.norm() - LAMBDA / (4.0 * std::f64::consts::PI * 5.0)).abs() < 1e-18);
}

#[test]
fn coincident_points_rejected() {
    let p = Point2::new(1.0, 1.0);
    assert!(matches!(point_gain(p, p, LAMBDA), Err(Error::CoincidentPoints { .. })));
}

#[test]
fn antenna_inside_pixel_rejected() {
    let r = Rect::new(Point2::new(0.0, 0.0), 0.1, 0.1);
    let err = integral_gain(Point2::new(0.01, 0.0), &r, LAMBDA, &QuadratureSpec::default()).unwrap_err();
    assert!(matches!(err, Error::AntennaInsidePixel { .. }));
}

#[test]
fn integral_gain_matches_monte_carlo() {
    let antenna = Point2::new(-0.7, 0.3);
    let rect = Rect::new(Point2::new(0.5, 0.45), 0.1, 0.1);
    let g = integral_gain(antenna, &rect, LAMBDA, &QuadratureSpec::default()).unwrap();
    let (mc, se) = common::mc_mean_complex(&rect, 1_000_000, 11, |p| common::gain(antenna, p, LAMBDA));
    assert!((g - mc).norm() <= 4.0 * se, "quad {g} mc {mc} se {se}");
}

#[test]
fn integral_gain_matches_richardson() {
    let antenna = Point2::new(0.2, -1.0);
    for (len, wid) in [(0.02, 0.02), (0.05, 0.1), (0.1, 0.03)] {
        let rect = Rect::new(Point2::new(0.4, 0.6), len, wid);
        let g = integral_gain(antenna, &rect, LAMBDA, &QuadratureSpec::default()).unwrap();
        let scale = common::gain(antenna, rect.center, LAMBDA).norm();
        let r = common::richardson_mean(&rect, 32, 1e-10, scale * 1e-3, |p| common::gain(antenna, p, LAMBDA));
        assert!((g - r).norm() <= 1e-6 * r.norm().max(1e-3 * scale), "{len}x{wid}: {g} vs {r}");
    }
}

#[test]
fn vanishing_pixel_tends_to_point_gain() {
    let antenna = Point2::new(-1.0, 0.0);
    let c = Point2::new(0.3, 0.2);
    let p = point_gain(antenna, c, LAMBDA).unwrap();
    // Leading error is quadratic in the pixel size.
    let mut last = f64::INFINITY;
    for size in [1e-3, 1e-4, 1e-5] {
        let g = integral_gain(antenna, &Rect::new(c, size, size), LAMBDA, &QuadratureSpec::default()).unwrap();
        let err = (g - p).norm() / p.norm();
        assert!(err * 50.0 < last, "{size}: {err} after {last}");
        last = err;
    }
    assert!(last < 1e-5);
}

#[test]
fn multi_wavelength_matches_single() {
    let antenna = Point2::new(-0.5, 0.5);
    let rect = Rect::new(Point2::new(0.5, 0.5), 0.1, 0.1);
    let q = QuadratureSpec::default();
    let ls = [0.0099, 0.01, 0.0101];
    let multi = integral_gains(antenna, &rect, &ls, &q).unwrap();
    for (l, m) in ls.iter().zip(&multi) {
        let single = integral_gain(antenna, &rect, *l, &q).unwrap();
        assert!((single - m).norm() <= 1e-7 * single.norm().max(1e-9));
    }
}

fn small_setup() -> (PixelGrid, AntennaArray, CarrierSet) {
    let grid = PixelGrid::new(0.3, 0.2, 0.1, 0.1).unwrap();
    let arrays = AntennaArray::new(
        vec![Point2::new(-0.5, 0.05), Point2::new(-0.5, 0.15)],
        vec![Point2::new(0.8, 0.0), Point2::new(0.8, 0.1), Point2::new(0.8, 0.2)],
    );
    let carriers = CarrierSet::new(30e9, 2, 100e6).unwrap();
    (grid, arrays, carriers)
}

#[test]
fn stacked_row_layout() {
    let (grid, arrays, carriers) = small_setup();
    let ch = assemble_channel(&grid, &arrays, &carriers, GainModel::Conventional, &QuadratureSpec::default()).unwrap();
    let (n_t, n_r) = (arrays.n_tx(), arrays.n_rx());
    assert_eq!(ch.measurement.shape(), (2 * n_t * n_r, grid.n_pixels()));
    let lambdas = carriers.wavelengths();
    for k in 0..2 {
        for t in 0..n_t {
            for r in 0..n_r {
                for n in 0..grid.n_pixels() {
                    let c = grid.center(n);
                    let want = common::gain(arrays.rx[r], c, lambdas[k]) * common::gain(arrays.tx[t], c, lambdas[k]);
                    let got = ch.measurement[((k * n_t + t) * n_r + r, n)];
                    assert!((got - want).norm() <= 1e-12 * want.norm());
                }
            }
        }
    }
}

#[test]
fn predicted_multipath_equals_stacked_product() {
    let (grid, arrays, carriers) = small_setup();
    let ch = assemble_channel(&grid, &arrays, &carriers, GainModel::Integral, &QuadratureSpec::default()).unwrap();
    let x: Vec<f64> = (0..grid.n_pixels()).map(|i| (i % 3) as f64 / 2.0).collect();
    let xv = nalgebra::DVector::from_iterator(x.len(), x.iter().map(|v| Complex64::new(*v, 0.0)));
    let stacked = &ch.measurement * xv;
    for k in 0..ch.n_carriers() {
        let h = ch.predicted_multipath(k, &x);
        for t in 0..ch.n_tx() {
            for r in 0..ch.n_rx() {
                let s = stacked[(k * ch.n_tx() + t) * ch.n_rx() + r];
                assert!((s - h[(r, t)]).norm() <= 1e-12 * s.norm().max(1e-20));
            }
        }
    }
}

#[test]
fn antenna_in_roi_rejected() {
    let (grid, _, carriers) = small_setup();
    let arrays = AntennaArray::new(vec![Point2::new(0.15, 0.05)], vec![Point2::new(0.8, 0.0)]);
    assert!(assemble_channel(&grid, &arrays, &carriers, GainModel::Integral, &QuadratureSpec::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integral_gain_bounded_by_nearest_point(
        ax in -2.0f64..-0.2, ay in -1.0f64..1.0,
        len in 0.001f64..0.2, wid in 0.001f64..0.2,
        lambda in 0.003f64..0.05,
    ) {
        let rect = Rect::new(Point2::new(0.2, 0.0), len, wid);
        let antenna = Point2::new(ax, ay);
        let g = integral_gain(antenna, &rect, lambda, &QuadratureSpec::default()).unwrap();
        let nearest = rect.distance_to(&antenna);
        prop_assert!(g.norm() <= lambda / (4.0 * std::f64::consts::PI * nearest) * (1.0 + 1e-9));
    }

    #[test]
    fn mirrored_geometry_gives_same_gain(
        ax in -2.0f64..-0.2, ay in -1.0f64..1.0,
        len in 0.001f64..0.1, wid in 0.001f64..0.1,
    ) {
        let q = QuadratureSpec::default();
        let rect = Rect::new(Point2::new(0.2, 0.3), len, wid);
        let mirrored = Rect::new(Point2::new(0.2, -0.3), len, wid);
        let g = integral_gain(Point2::new(ax, ay), &rect, LAMBDA, &q).unwrap();
        let m = integral_gain(Point2::new(ax, -ay), &mirrored, LAMBDA, &q).unwrap();
        prop_assert!((g - m).norm() <= 1e-7 * g.norm().max(1e-9));
    }
}
