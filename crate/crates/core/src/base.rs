//! Tractable stationary base diffusions.
//!
//! A base diffusion dX_t = mu(X_t) dt + sigma(X_t) dB_t on (l, r) is
//! stationary when both scale-density integrals diverge at the
//! boundaries and the speed integral is finite. The transform layer
//! needs the stationary law (pdf, its derivative, cdf, quantile) on top
//! of the coefficients; the Ornstein-Uhlenbeck process
//!
//! ```text
//! dX_t = -nu X_t dt + sqrt(2 nu) dB_t
//! ```
//!
//! ships fully (standard normal stationary law, exact transitions,
//! Hermite eigenfunctions with eigenvalues j nu). Other Pearson-type
//! members can plug in through the same traits.

use crate::error::{Error, Result};
use crate::math::poly::{hermite, Poly};
use crate::math::{normal, quad};
use crate::rng::SimRng;

/// Coefficients and state space of a scalar SDE.
pub trait Sde {
    fn drift(&self, x: f64) -> f64;
    /// sigma(x), strictly positive on the interior.
    fn diffusion(&self, x: f64) -> f64;
    fn state_space(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    /// Reference point x# for the scale integral.
    fn ref_point(&self) -> f64 {
        0.0
    }

    /// Scale density s(x) = exp(-2 int_{x#}^x mu/sigma^2); the default
    /// evaluates the exponent by quadrature.
    fn scale_density(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.state_space();
        if x <= lo || x >= hi {
            return Err(Error::OutOfRange(format!("{x} outside state space")));
        }
        let expo = quad::integrate(
            |y| {
                let s = self.diffusion(y);
                self.drift(y) / (s * s)
            },
            self.ref_point(),
            x,
            1e-11,
        )?;
        Ok((-2.0 * expo).exp())
    }

    /// Speed density 1/(s(x) sigma^2(x)), unnormalized.
    fn speed_density(&self, x: f64) -> Result<f64> {
        let s = self.diffusion(x);
        Ok(1.0 / (self.scale_density(x)? * s * s))
    }
}

/// A stationary base diffusion exposing its invariant law.
pub trait BaseDiffusion: Sde {
    fn stationary_pdf(&self, x: f64) -> f64;
    fn stationary_pdf_deriv(&self, x: f64) -> f64;
    fn stationary_cdf(&self, x: f64) -> f64;
    fn stationary_quantile(&self, p: f64) -> f64;
}

/// Stationary Ornstein-Uhlenbeck process with rate `nu` (1/time units):
/// standard normal invariant law, autocorrelation e^{-nu t}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuProcess {
    nu: f64,
}

impl OuProcess {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::Invalid(format!("OU rate must be positive, got {nu}")));
        }
        Ok(Self { nu })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Autocorrelation e^{-nu t}.
    pub fn autocorrelation(&self, t: f64) -> f64 {
        (-self.nu * t).exp()
    }

    /// Conditional law of X_{t+dt} given X_t = x0 is
    /// N(e^{-nu dt} x0, 1 - e^{-2 nu dt}).
    pub fn transition_mean_var(&self, x0: f64, dt: f64) -> (f64, f64) {
        let a = (-self.nu * dt).exp();
        (a * x0, 1.0 - a * a)
    }

    pub fn transition_density(&self, x: f64, x0: f64, dt: f64) -> f64 {
        assert!(dt > 0.0);
        let (m, v) = self.transition_mean_var(x0, dt);
        let sd = v.sqrt();
        normal::pdf((x - m) / sd) / sd
    }

    pub fn transition_log_density(&self, x: f64, x0: f64, dt: f64) -> f64 {
        let (m, v) = self.transition_mean_var(x0, dt);
        normal::log_pdf((x - m) / v.sqrt()) - 0.5 * v.ln()
    }

    /// One exact transition step.
    pub fn sample_transition(&self, x0: f64, dt: f64, rng: &mut SimRng) -> f64 {
        let (m, v) = self.transition_mean_var(x0, dt);
        m + v.sqrt() * rng.standard_normal()
    }

    pub fn sample_stationary(rng: &mut SimRng) -> f64 {
        rng.standard_normal()
    }

    /// First k eigenpairs of the generator: probabilists' Hermite
    /// polynomials He_j with eigenvalues j nu (He_1 = x with eigenvalue
    /// nu, He_2 = x^2 - 1 with eigenvalue 2 nu, ...).
    pub fn eigenpairs(&self, k: usize) -> Vec<EigenPair> {
        (1..=k)
            .map(|j| EigenPair { poly: hermite(j), eigenvalue: j as f64 * self.nu })
            .collect()
    }
}

impl Sde for OuProcess {
    fn drift(&self, x: f64) -> f64 {
        -self.nu * x
    }
    fn diffusion(&self, _x: f64) -> f64 {
        (2.0 * self.nu).sqrt()
    }
    /// s(x) = e^{x^2/2} with x# = 0.
    fn scale_density(&self, x: f64) -> Result<f64> {
        Ok((0.5 * x * x).exp())
    }
}

impl BaseDiffusion for OuProcess {
    fn stationary_pdf(&self, x: f64) -> f64 {
        normal::pdf(x)
    }
    fn stationary_pdf_deriv(&self, x: f64) -> f64 {
        -x * normal::pdf(x)
    }
    fn stationary_cdf(&self, x: f64) -> f64 {
        normal::cdf(x)
    }
    fn stationary_quantile(&self, p: f64) -> f64 {
        normal::quantile(p)
    }
}

/// Eigenfunction of the generator L = mu d/dx + (sigma^2/2) d^2/dx^2,
/// stored as a polynomial: L g = -lambda g.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub poly: Poly,
    pub eigenvalue: f64,
}

impl EigenPair {
    /// Residual L g(x) + lambda g(x); zero for a true eigenpair.
    pub fn generator_residual<B: Sde>(&self, base: &B, x: f64) -> f64 {
        let g1 = self.poly.derivative();
        let g2 = g1.derivative();
        let sigma = base.diffusion(x);
        base.drift(x) * g1.eval(x) + 0.5 * sigma * sigma * g2.eval(x)
            + self.eigenvalue * self.poly.eval(x)
    }
}

/// An SDE defined by closures; the extension point for other bases and
/// the subject of the stationarity check tests.
pub struct GenericSde<D, S>
where
    D: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    pub drift_fn: D,
    pub sigma_fn: S,
    pub space: (f64, f64),
    pub x_ref: f64,
}

impl<D: Fn(f64) -> f64, S: Fn(f64) -> f64> Sde for GenericSde<D, S> {
    fn drift(&self, x: f64) -> f64 {
        (self.drift_fn)(x)
    }
    fn diffusion(&self, x: f64) -> f64 {
        (self.sigma_fn)(x)
    }
    fn state_space(&self) -> (f64, f64) {
        self.space
    }
    fn ref_point(&self) -> f64 {
        self.x_ref
    }
}

/// Numeric stationarity diagnosis.
///
/// The conditions are: the scale integrals diverge toward both
/// boundaries and the speed integral is finite. Divergence is
/// undecidable numerically, so a window integral exceeding
/// `DIVERGENCE_THRESHOLD` counts as divergent; a speed integral whose
/// expanding-window increments die out counts as finite.
#[derive(Clone, Debug)]
pub struct StationaryCheck {
    pub ok: bool,
    pub left_scale_integral: f64,
    pub right_scale_integral: f64,
    pub speed_integral: f64,
    pub left_divergent: bool,
    pub right_divergent: bool,
    pub speed_finite: bool,
}

pub const DIVERGENCE_THRESHOLD: f64 = 1e8;

pub fn stationary_check<B: Sde>(b: &B) -> StationaryCheck {
    let (lo, hi) = b.state_space();
    let x0 = b.ref_point();
    let clamped = |f: f64| if f.is_finite() { f.min(1e300) } else { 1e300 };

    let scale_side = |toward_hi: bool| -> (f64, bool) {
        let mut total = 0.0;
        let mut a = x0;
        let mut width = 1.0;
        for _ in 0..70 {
            let bdry = if toward_hi { hi } else { lo };
            let b_end = if toward_hi {
                (a + width).min(if bdry.is_finite() { bdry } else { a + width })
            } else {
                (a - width).max(if bdry.is_finite() { bdry } else { a - width })
            };
            let part = quad::integrate(|x| clamped(b.scale_density(x).unwrap_or(1e300)), a, b_end, 1e-9)
                .unwrap_or(f64::INFINITY)
                .abs();
            total += part;
            if total > DIVERGENCE_THRESHOLD {
                return (total, true);
            }
            if bdry.is_finite() && (b_end - bdry).abs() < 1e-12 {
                // reached a finite boundary with a finite integral
                return (total, false);
            }
            if part < 1e-10 * total.max(1e-30) && width > 64.0 {
                return (total, false);
            }
            a = b_end;
            width *= 2.0;
        }
        (total, false)
    };

    let (right_scale_integral, right_divergent) = scale_side(true);
    let (left_scale_integral, left_divergent) = scale_side(false);

    let speed = |toward_hi: bool| -> (f64, bool) {
        let mut total = 0.0;
        let mut a = x0;
        let mut width = 1.0;
        for _ in 0..70 {
            let bdry = if toward_hi { hi } else { lo };
            let b_end = if toward_hi {
                if bdry.is_finite() { (a + width).min(bdry) } else { a + width }
            } else if bdry.is_finite() {
                (a - width).max(bdry)
            } else {
                a - width
            };
            let part = quad::integrate(|x| clamped(b.speed_density(x).unwrap_or(1e300)), a, b_end, 1e-10)
                .unwrap_or(f64::INFINITY)
                .abs();
            total += part;
            if total > DIVERGENCE_THRESHOLD {
                return (total, false);
            }
            if bdry.is_finite() && (b_end - bdry).abs() < 1e-12 {
                return (total, true);
            }
            if part < 1e-9 * total.max(1e-30) && width > 64.0 {
                return (total, true);
            }
            a = b_end;
            width *= 2.0;
        }
        (total, false)
    };

    let (speed_hi, fin_hi) = speed(true);
    let (speed_lo, fin_lo) = speed(false);
    let speed_finite = fin_hi && fin_lo;

    StationaryCheck {
        ok: left_divergent && right_divergent && speed_finite,
        left_scale_integral,
        right_scale_integral,
        speed_integral: speed_hi + speed_lo,
        left_divergent,
        right_divergent,
        speed_finite,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::stats;

    #[test]
    fn ou_scale_density() {
        let ou = OuProcess::new(1.0).unwrap();
        assert_eq!(ou.scale_density(0.0).unwrap(), 1.0);
        assert!((ou.scale_density(2.0).unwrap() - 2.0_f64.exp().powi(2)).abs() < 1e-12);
        assert!(
            (ou.scale_density(1.3).unwrap() - ou.scale_density(-1.3).unwrap()).abs() < 1e-12
        );
        // generic quadrature route agrees with the closed form
        let gen = GenericSde {
            drift_fn: |x| -1.0 * x,
            sigma_fn: |_| (2.0_f64).sqrt(),
            space: (f64::NEG_INFINITY, f64::INFINITY),
            x_ref: 0.0,
        };
        for &x in &[-2.0, 0.4, 2.0] {
            let want = (0.5 * x * x).exp();
            assert!((gen.scale_density(x).unwrap() - want).abs() / want < 1e-8);
        }
    }

    #[test]
    fn transition_sampling_moments() {
        let ou = OuProcess::new(0.071).unwrap();
        let mut rng = SimRng::seed_from(11);
        let n = 1_000_000;
        let x0 = 1.0;
        let dt = 1.0;
        let mut draws = Vec::with_capacity(n);
        for _ in 0..n {
            draws.push(ou.sample_transition(x0, dt, &mut rng));
        }
        let (want_m, want_v) = ou.transition_mean_var(x0, dt);
        assert!((want_m - (-0.071_f64).exp()).abs() < 1e-15);
        let m = stats::mean(&draws);
        let v = stats::variance(&draws);
        let se_m = (want_v / n as f64).sqrt();
        assert!((m - want_m).abs() < 4.0 * se_m, "mean {m} vs {want_m}");
        let se_v = want_v * (2.0 / n as f64).sqrt();
        assert!((v - want_v).abs() < 4.0 * se_v, "var {v} vs {want_v}");
    }

    #[test]
    fn transition_limits() {
        let ou = OuProcess::new(50.0).unwrap();
        let mut rng = SimRng::seed_from(3);
        // nu dt = 50: the draw forgets x0 entirely
        let (m, v) = ou.transition_mean_var(1000.0, 1.0);
        assert!(m.abs() < 1e-18 * 1000.0 + 1e-12);
        assert!((v - 1.0).abs() < 1e-12);
        // nu dt tiny: the draw stays at x0
        let slow = OuProcess::new(1e-10).unwrap();
        let x = slow.sample_transition(5.0, 1.0, &mut rng);
        assert!((x - 5.0).abs() < 1e-4);
    }

    #[test]
    fn transition_density_normalizes_and_reaches_stationary() {
        let ou = OuProcess::new(1.0).unwrap();
        let mass = quad::integrate(|x| ou.transition_density(x, 0.7, 0.5), -10.0, 10.0, 1e-10).unwrap();
        assert!((mass - 1.0).abs() < 1e-8);
        // dt -> inf: density -> phi(x)
        for &x in &[-1.0, 0.0, 2.0] {
            assert!((ou.transition_density(x, 3.0, 80.0) - normal::pdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        let ou = OuProcess::new(1.0).unwrap();
        let (x0, x, dt) = (0.5, -0.2, 0.7);
        let lhs = ou.transition_density(x, x0, 2.0 * dt);
        let rhs = quad::integrate(
            |z| ou.transition_density(x, z, dt) * ou.transition_density(z, x0, dt),
            -10.0,
            10.0,
            1e-10,
        )
        .unwrap();
        assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
    }

    #[test]
    fn eigenpairs_are_hermite() {
        let ou = OuProcess::new(0.7).unwrap();
        let pairs = ou.eigenpairs(2);
        assert_eq!(pairs[0].poly.0, vec![0.0, 1.0]);
        assert!((pairs[0].eigenvalue - 0.7).abs() < 1e-15);
        assert_eq!(pairs[1].poly.0, vec![-1.0, 0.0, 1.0]);
        assert!((pairs[1].eigenvalue - 1.4).abs() < 1e-15);
    }

    #[test]
    fn generator_identity_on_grid() {
        let ou = OuProcess::new(1.3).unwrap();
        for pair in ou.eigenpairs(4) {
            for i in 0..20 {
                let x = -3.0 + 6.0 * i as f64 / 19.0;
                let r = pair.generator_residual(&ou, x);
                assert!(r.abs() < 1e-10, "j with lambda {}: residual {r} at {x}", pair.eigenvalue);
            }
        }
    }

    #[test]
    fn conditional_expectation_of_eigenfunctions() {
        // E[g_j(X_dt) | X_0 = x] = e^{-lambda_j dt} g_j(x), Monte Carlo
        let ou = OuProcess::new(1.0).unwrap();
        let (x, dt) = (0.8, 0.5);
        let n = 1_000_000;
        for pair in ou.eigenpairs(2) {
            let mut rng = SimRng::seed_from(17 + pair.poly.degree() as u64);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..n {
                let v = pair.poly.eval(ou.sample_transition(x, dt, &mut rng));
                sum += v;
                sumsq += v * v;
            }
            let mc = sum / n as f64;
            let sd = (sumsq / n as f64 - mc * mc).sqrt() / (n as f64).sqrt();
            let want = (-pair.eigenvalue * dt).exp() * pair.poly.eval(x);
            assert!((mc - want).abs() < 4.0 * sd, "lambda {}: {mc} vs {want}", pair.eigenvalue);
        }
    }

    #[test]
    fn stationary_law_round_trip() {
        let ou = OuProcess::new(2.0).unwrap();
        for i in 1..40 {
            let x = -4.0 + 8.0 * i as f64 / 40.0;
            let p = ou.stationary_cdf(x);
            assert!((ou.stationary_quantile(p) - x).abs() < 1e-10);
        }
    }

    #[test]
    fn stationary_check_verdicts() {
        let ou = OuProcess::new(1.0).unwrap();
        let chk = stationary_check(&ou);
        assert!(chk.ok, "{chk:?}");

        // anti-OU: scale density e^{-x^2/2} is integrable -> fail
        let anti = GenericSde {
            drift_fn: |x| 1.0 * x,
            sigma_fn: |_| (2.0_f64).sqrt(),
            space: (f64::NEG_INFINITY, f64::INFINITY),
            x_ref: 0.0,
        };
        let chk = stationary_check(&anti);
        assert!(!chk.ok);
        assert!(!chk.left_divergent && !chk.right_divergent);

        // driftless diffusion (Brownian motion): speed integral infinite -> fail
        let bm = GenericSde {
            drift_fn: |_| 0.0,
            sigma_fn: |_| (2.0_f64).sqrt(),
            space: (f64::NEG_INFINITY, f64::INFINITY),
            x_ref: 0.0,
        };
        let chk = stationary_check(&bm);
        assert!(!chk.ok);
        assert!(chk.left_divergent && chk.right_divergent);
        assert!(!chk.speed_finite);
    }
}
