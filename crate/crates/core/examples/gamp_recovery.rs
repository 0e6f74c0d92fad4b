//! Sparse recovery on a random Gaussian system.

use pixel_isac::gamp::{run_gamp, GampConfig, PriorParams, RMatrix, RVector};
use pixel_isac::metrics::nmse_db;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> pixel_isac::Result<()> {
    let (m, n, k) = (300, 400, 25);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = RMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal) / (m as f64).sqrt());
    let mut x = vec![0.0; n];
    for i in rand::seq::index::sample(&mut rng, n, k) {
        x[i] = rng.random_range(0.3..1.0);
    }
    let h = &a * RVector::from_column_slice(&x);
    let prior = PriorParams::new(k as f64 / n as f64, 0.6, 0.3)?;
    for sigma_w in [1e-6f64, 1e-4, 1e-3] {
        let noisy = h.map(|v| v + sigma_w.sqrt() * rng.sample::<f64, _>(StandardNormal));
        let cfg = GampConfig { sigma_w, tolerance: 1e-9, ..GampConfig::default() };
        let out = run_gamp(&a, &noisy, &prior, &cfg)?;
        println!(
            "sigma_w {sigma_w:.0e}: NMSE {:+.1} dB after {} iterations",
            nmse_db(&out.x, &x)?,
            out.diagnostics.iterations
        );
    }
    Ok(())
}
