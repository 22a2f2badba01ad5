//! Drift-free multi-modal diffusion dX = sigma / sqrt(f(X)) dB.
//!
//! Ergodic with invariant density f: here the modes are produced
//! purely by state-dependent noise (small fluctuations near the mode
//! points, large ones in between), with no restoring drift at all.
//! Euler simulation only; the model exists for comparison, not
//! inference.

use crate::densities::MixtureDensity;
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::series::Path;
use crate::simulate::simulate_euler;

/// Coefficients (0, sigma / sqrt(f(y))).
pub fn pure_diffusion_coefficients(d: &MixtureDensity, sigma: f64, y: f64) -> Result<(f64, f64)> {
    let f = d.pdf(y);
    if f < 1e-300 {
        return Err(Error::OutOfRange(format!("density underflows at y = {y}")));
    }
    Ok((0.0, sigma / f.sqrt()))
}

pub fn simulate_pure_diffusion(
    d: &MixtureDensity,
    sigma: f64,
    n: usize,
    delta: f64,
    substeps: usize,
    y0: f64,
    rng: &mut SimRng,
) -> Result<Path> {
    if !(sigma > 0.0) {
        return Err(Error::Invalid(format!("sigma must be positive, got {sigma}")));
    }
    let diff = |y: f64| {
        let f = d.pdf(y);
        if f < 1e-300 {
            f64::NAN
        } else {
            sigma / f.sqrt()
        }
    };
    simulate_euler(|_| 0.0, diff, n, delta, substeps, y0, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::stats;

    fn symmetric() -> MixtureDensity {
        MixtureDensity::bimodal(0.5, -1.5, 1.0, 1.5, 1.0).unwrap()
    }

    #[test]
    fn coefficient_minimal_at_modes() {
        let d = symmetric();
        let modes = d.modes();
        for &m in &modes {
            let (_, at_mode) = pure_diffusion_coefficients(&d, 1.0, m).unwrap();
            // scan a neighbourhood: the coefficient is locally minimal
            for i in 1..=20 {
                let off = 0.05 * i as f64;
                for &y in &[m - off, m + off] {
                    let (_, v) = pure_diffusion_coefficients(&d, 1.0, y).unwrap();
                    assert!(v >= at_mode, "sigma( {y} ) = {v} < {at_mode}");
                }
            }
        }
    }

    #[test]
    fn sigma_scales_linearly() {
        let d = symmetric();
        let (_, one) = pure_diffusion_coefficients(&d, 1.0, 0.4).unwrap();
        let (_, two) = pure_diffusion_coefficients(&d, 2.0, 0.4).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12);
    }

    #[test]
    fn zero_drift() {
        let d = symmetric();
        assert_eq!(pure_diffusion_coefficients(&d, 0.7, 1.0).unwrap().0, 0.0);
    }

    #[test]
    fn invariant_density_preserved() {
        // the long-run marginal is f itself
        let d = symmetric();
        let mut rng = SimRng::seed_from(19);
        // sigma small keeps Euler steps well resolved
        let p = simulate_pure_diffusion(&d, 0.4, 1_000_000, 0.25, 64, -1.5, &mut rng).unwrap();
        let ks = stats::ks_statistic(&p.values[20_000..], |y| d.cdf(y));
        assert!(ks < 0.02, "KS {ks}");
    }
}
