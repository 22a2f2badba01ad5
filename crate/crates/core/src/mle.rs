//! Exact maximum likelihood for the discretely observed transformed OU
//! process.
//!
//! With x_i = tau^{-1}(y_i) and a = e^{-nu delta} the conditional
//! likelihood of a path is
//!
//! ```text
//! prod_i  phi((x_{i+1} - a x_i)/sqrt(1-a^2)) / sqrt(1-a^2)
//!         * f(y_{i+1}) / phi(x_{i+1}),
//! ```
//!
//! i.e. the Gaussian AR(1) likelihood of the latent chain times the
//! Jacobian of the transform. Given the mixture parameters, the rate
//! enters only through a, so the fit profiles nu out with a
//! one-dimensional search over a and runs Nelder-Mead on the mixture
//! parameters alone (in log/logit coordinates), followed by a Newton
//! polish of the joint optimum. Standard errors come from the observed
//! information (finite differences in the transformed coordinates,
//! mapped back by the delta method).

use crate::base::OuProcess;
use crate::densities::MixtureDensity;
use crate::error::{Error, Result};
use crate::math::linalg::Mat;
use crate::math::optim::{brent_min, nelder_mead, NmOptions};
use crate::math::{normal, stats};
use crate::rng::SimRng;
use crate::transform::{Transformed, TransformedOu, TAIL_EPS};
use serde::{Deserialize, Serialize};

pub const PARAM_NAMES: [&str; 6] = ["nu", "alpha", "mu1", "sigma1", "mu2", "sigma2"];

/// Full parameter vector theta = (nu, psi) of the bimodal transformed
/// OU model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuMixtureParams {
    pub nu: f64,
    pub alpha: f64,
    pub mu1: f64,
    pub sigma1: f64,
    pub mu2: f64,
    pub sigma2: f64,
}

impl OuMixtureParams {
    pub fn new(nu: f64, alpha: f64, mu1: f64, sigma1: f64, mu2: f64, sigma2: f64) -> Self {
        Self { nu, alpha, mu1, sigma1, mu2, sigma2 }
    }

    pub fn mixture(&self) -> Result<MixtureDensity> {
        MixtureDensity::bimodal(self.alpha, self.mu1, self.sigma1, self.mu2, self.sigma2)
    }

    pub fn build(&self) -> Result<TransformedOu> {
        Ok(Transformed::new(OuProcess::new(self.nu)?, self.mixture()?))
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.nu, self.alpha, self.mu1, self.sigma1, self.mu2, self.sigma2]
    }

    /// Unconstrained coordinates (ln nu, logit alpha, mu1, ln sigma1,
    /// mu2, ln sigma2).
    pub fn to_unconstrained(&self) -> [f64; 6] {
        [
            self.nu.ln(),
            (self.alpha / (1.0 - self.alpha)).ln(),
            self.mu1,
            self.sigma1.ln(),
            self.mu2,
            self.sigma2.ln(),
        ]
    }

    pub fn from_unconstrained(z: &[f64]) -> Self {
        Self {
            nu: z[0].exp(),
            alpha: 1.0 / (1.0 + (-z[1]).exp()),
            mu1: z[2],
            sigma1: z[3].exp(),
            mu2: z[4],
            sigma2: z[5].exp(),
        }
    }

    /// Jacobian diag d theta / d z at this point.
    pub fn unconstrained_jacobian(&self) -> [f64; 6] {
        [
            self.nu,
            self.alpha * (1.0 - self.alpha),
            1.0,
            self.sigma1,
            1.0,
            self.sigma2,
        ]
    }

    /// Relabel so mu1 < mu2; returns whether components were swapped.
    pub fn normalized(mut self) -> (Self, bool) {
        if self.mu1 > self.mu2 {
            self = Self {
                nu: self.nu,
                alpha: 1.0 - self.alpha,
                mu1: self.mu2,
                sigma1: self.sigma2,
                mu2: self.mu1,
                sigma2: self.sigma1,
            };
            (self, true)
        } else {
            (self, false)
        }
    }
}

/// Estimate with provenance shared by the likelihood and
/// estimating-function routes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub method: String,
    pub params: OuMixtureParams,
    pub stderr: OuMixtureParams,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub delta: f64,
    pub n_obs: usize,
    /// Scaled sup-norm of the score (per observation, transformed
    /// coordinates) at the reported optimum.
    pub score_norm: f64,
    /// Root residual norm, for estimating-function fits.
    pub residual_norm: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct MleOptions {
    /// Also add log f(y_0) for a stationary initial observation.
    pub stationary_init: bool,
    /// Number of jittered starts (1 = just the supplied init).
    pub n_starts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { stationary_init: false, n_starts: 1, max_iter: 4000, seed: 171 }
    }
}

/// Log-likelihood of the displayed product; `Err(Saturated)` carries
/// the index of the first observation whose transform saturates.
pub fn loglik(params: &OuMixtureParams, values: &[f64], delta: f64, stationary_init: bool) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Invalid("need at least two observations".into()));
    }
    let t = params.build()?;
    let a = (-params.nu * delta).exp();
    let v = 1.0 - a * a;
    if !(v > 0.0) {
        return Err(Error::OutOfRange("nu delta too small: transition variance underflows".into()));
    }
    let sd = v.sqrt();
    let mut x_prev = t.tau_inv_strict(values[0], 0)?;
    let mut ll = if stationary_init { t.target().log_pdf(values[0]) } else { 0.0 };
    for (i, &y) in values.iter().enumerate().skip(1) {
        let x = t.tau_inv_strict(y, i)?;
        ll += normal::log_pdf((x - a * x_prev) / sd) - sd.ln() + t.target().log_pdf(y)
            - normal::log_pdf(x);
        x_prev = x;
    }
    Ok(ll)
}

/// Latent coordinates and the sufficient statistics of the AR(1) part:
/// (S0, S1, S2, sum log f(y_i) i>=1, n transitions, log f(y_0)).
struct ProfileStats {
    s0: f64,
    s1: f64,
    s2: f64,
    sum_log_f: f64,
    n: f64,
    log_f0: f64,
}

fn profile_stats(mix: &MixtureDensity, values: &[f64]) -> Result<ProfileStats> {
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut sum_log_f = 0.0;
    let mut x_prev = {
        let p = mix.cdf(values[0]);
        if !(p > TAIL_EPS && p < 1.0 - TAIL_EPS) {
            return Err(Error::Saturated { index: 0, value: values[0] });
        }
        normal::quantile(p)
    };
    for (i, &y) in values.iter().enumerate().skip(1) {
        let p = mix.cdf(y);
        if !(p > TAIL_EPS && p < 1.0 - TAIL_EPS) {
            return Err(Error::Saturated { index: i, value: y });
        }
        let x = normal::quantile(p);
        s0 += x_prev * x_prev;
        s1 += x_prev * x;
        s2 += x * x;
        sum_log_f += mix.log_pdf(y);
        x_prev = x;
    }
    Ok(ProfileStats {
        s0,
        s1,
        s2,
        sum_log_f,
        n: (values.len() - 1) as f64,
        log_f0: mix.log_pdf(values[0]),
    })
}

/// Profile log-likelihood in a = e^{-nu delta}, up to the psi-only
/// terms; the additive constant from the Jacobian of the latent
/// coordinates is included so the value matches [`loglik`].
fn profile_loglik(st: &ProfileStats, a: f64, stationary_init: bool) -> f64 {
    let v = 1.0 - a * a;
    let quad_form = st.s2 - 2.0 * a * st.s1 + a * a * st.s0;
    // sum log phi(x_i) over i >= 1 equals -S2/2 - n/2 log(2 pi)
    let mut ll = -quad_form / (2.0 * v) - 0.5 * st.n * v.ln() + 0.5 * st.s2 + st.sum_log_f;
    if stationary_init {
        ll += st.log_f0;
    }
    ll
}

fn best_a(st: &ProfileStats, stationary_init: bool) -> (f64, f64) {
    let (a, neg) = brent_min(|a| -profile_loglik(st, a, stationary_init), 1e-9, 1.0 - 1e-9, 1e-12, 200);
    (a, -neg)
}

/// Device for turning data plus mixture parameters into the profiled
/// likelihood value; shared by the fit and its initial multi-start.
fn profiled_objective(values: &[f64], delta: f64, stationary_init: bool, zpsi: &[f64]) -> f64 {
    // zpsi = (logit alpha, mu1, ln s1, mu2, ln s2)
    let full = [0.0, zpsi[0], zpsi[1], zpsi[2], zpsi[3], zpsi[4]];
    let p = OuMixtureParams::from_unconstrained(&full);
    let mix = match p.mixture() {
        Ok(m) => m,
        Err(_) => return f64::INFINITY,
    };
    match profile_stats(&mix, values) {
        Ok(st) => {
            let (_, ll) = best_a(&st, stationary_init);
            let _ = delta;
            -ll
        }
        Err(_) => f64::INFINITY,
    }
}

#[derive(Clone, Debug)]
pub struct InitResult {
    pub params: OuMixtureParams,
    /// Set when the marginal looks unimodal or the path is (nearly)
    /// constant; the init is still returned but fits should be treated
    /// with suspicion.
    pub degenerate: bool,
}

/// Starting values: two-component EM on the marginal plus a rate read
/// off the lag-1 autocorrelation of the latent coordinates.
pub fn auto_init(values: &[f64], delta: f64) -> Result<InitResult> {
    if values.len() < 10 {
        return Err(Error::Invalid("need at least 10 observations for an init".into()));
    }
    let var = stats::variance(values);
    let m = stats::mean(values);
    if var < 1e-12 * (1.0 + m * m) {
        return Ok(InitResult {
            params: OuMixtureParams::new(1.0 / delta, 0.5, m - 1e-3, 1e-3, m + 1e-3, 1e-3),
            degenerate: true,
        });
    }
    let em = em_two_component(values, 300, 1e-9);
    let mix = MixtureDensity::bimodal(em.alpha, em.mu1, em.sd1, em.mu2, em.sd2)?;
    // latent lag-1 correlation -> rate
    let xs: Vec<f64> = values
        .iter()
        .map(|&y| normal::quantile(mix.cdf(y).clamp(TAIL_EPS, 1.0 - TAIL_EPS)))
        .collect();
    let rho1 = stats::acf(&xs, 1)[1].clamp(1e-4, 1.0 - 1e-6);
    let nu = -rho1.ln() / delta;
    let (params, _) = OuMixtureParams::new(nu, em.alpha, em.mu1, em.sd1, em.mu2, em.sd2).normalized();
    Ok(InitResult { params, degenerate: em.degenerate })
}

struct EmFit {
    alpha: f64,
    mu1: f64,
    sd1: f64,
    mu2: f64,
    sd2: f64,
    degenerate: bool,
    iterations: usize,
}

/// Plain two-component EM treating the data as iid.
fn em_two_component(values: &[f64], max_iter: usize, tol: f64) -> EmFit {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let half = n / 2;
    let lower = &sorted[..half];
    let upper = &sorted[half..];
    let mut alpha: f64 = 0.5;
    let mut mu1 = stats::mean(lower);
    let mut mu2 = stats::mean(upper);
    let sd_all = stats::variance(values).sqrt();
    let mut sd1 = (stats::variance(lower).sqrt()).max(0.05 * sd_all);
    let mut sd2 = (stats::variance(upper).sqrt()).max(0.05 * sd_all);
    let mut last_ll = f64::NEG_INFINITY;
    let mut iterations = 0;
    let floor = 1e-6 * sd_all;
    for it in 0..max_iter {
        iterations = it + 1;
        let mut w_sum = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut v1 = 0.0;
        let mut v2 = 0.0;
        let mut ll = 0.0;
        for &y in values {
            let l1 = alpha * normal::pdf((y - mu1) / sd1) / sd1;
            let l2 = (1.0 - alpha) * normal::pdf((y - mu2) / sd2) / sd2;
            let tot = (l1 + l2).max(1e-300);
            let r = l1 / tot;
            ll += tot.ln();
            w_sum += r;
            m1 += r * y;
            m2 += (1.0 - r) * y;
            v1 += r * y * y;
            v2 += (1.0 - r) * y * y;
        }
        let w2 = n as f64 - w_sum;
        if w_sum < 1e-8 || w2 < 1e-8 {
            break;
        }
        mu1 = m1 / w_sum;
        mu2 = m2 / w2;
        sd1 = ((v1 / w_sum - mu1 * mu1).max(floor * floor)).sqrt();
        sd2 = ((v2 / w2 - mu2 * mu2).max(floor * floor)).sqrt();
        alpha = (w_sum / n as f64).clamp(1e-6, 1.0 - 1e-6);
        if (ll - last_ll).abs() < tol * (1.0 + ll.abs()) {
            break;
        }
        last_ll = ll;
    }
    let degenerate = alpha.min(1.0 - alpha) < 0.02
        || sd1 <= 1.01 * floor
        || sd2 <= 1.01 * floor
        || (mu1 - mu2).abs() < 0.25 * sd1.max(sd2);
    EmFit { alpha, mu1, sd1, mu2, sd2, degenerate, iterations }
}

/// Maximum-likelihood fit. `init = None` uses [`auto_init`].
pub fn fit_mle(
    values: &[f64],
    delta: f64,
    init: Option<OuMixtureParams>,
    opts: &MleOptions,
) -> Result<FitResult> {
    if values.len() < 50 {
        return Err(Error::Invalid(format!(
            "need at least 50 observations for a fit, got {}",
            values.len()
        )));
    }
    let init = match init {
        Some(p) => p,
        None => {
            let ir = auto_init(values, delta)?;
            if ir.degenerate {
                return Err(Error::Degenerate(
                    "marginal looks unimodal or constant; supply explicit initial values".into(),
                ));
            }
            ir.params
        }
    };

    let z0 = init.to_unconstrained();
    let zpsi0 = [z0[1], z0[2], z0[3], z0[4], z0[5]];
    let mut rng = SimRng::seed_from(opts.seed);
    let mut best: Option<(f64, Vec<f64>, usize, bool)> = None;
    for start in 0..opts.n_starts.max(1) {
        let mut z = zpsi0;
        if start > 0 {
            for zi in &mut z {
                *zi += 0.15 * rng.standard_normal();
            }
        }
        let nm = nelder_mead(
            |zp| profiled_objective(values, delta, opts.stationary_init, zp),
            &z,
            &NmOptions { max_iter: opts.max_iter, step: 0.15, ..Default::default() },
        );
        if best.as_ref().map_or(true, |(f, ..)| nm.fx < *f) {
            best = Some((nm.fx, nm.x, nm.iterations, nm.converged));
        }
    }
    let (neg_ll, zpsi, mut iterations, nm_converged) =
        best.ok_or_else(|| Error::NonConvergence("no start succeeded".into()))?;
    if !neg_ll.is_finite() {
        return Err(Error::NonConvergence(
            "likelihood not finite anywhere near the initial values".into(),
        ));
    }

    // recover the profiled rate
    let psi_params = OuMixtureParams::from_unconstrained(&[0.0, zpsi[0], zpsi[1], zpsi[2], zpsi[3], zpsi[4]]);
    let mix = psi_params.mixture()?;
    let st = profile_stats(&mix, values)?;
    let (a_hat, _) = best_a(&st, opts.stationary_init);
    let nu_hat = -a_hat.ln() / delta;
    let mut params = OuMixtureParams::new(
        nu_hat,
        psi_params.alpha,
        psi_params.mu1,
        psi_params.sigma1,
        psi_params.mu2,
        psi_params.sigma2,
    );

    // Newton polish on the joint 6-dim likelihood
    let f = |z: &[f64]| -> f64 {
        let p = OuMixtureParams::from_unconstrained(z);
        loglik(&p, values, delta, opts.stationary_init).unwrap_or(f64::NEG_INFINITY)
    };
    let mut z = params.to_unconstrained().to_vec();
    let mut ll = f(&z);
    for _ in 0..6 {
        let g = fd_gradient(&f, &z);
        let h = fd_hessian(&f, &z);
        let step = match Mat::solve(h.clone(), {
            let mut b = Mat::zeros(6, 1);
            for i in 0..6 {
                b.set(i, 0, -g[i]);
            }
            b
        }) {
            Ok(s) => s,
            Err(_) => break,
        };
        let mut improved = false;
        let mut scale = 1.0;
        for _ in 0..8 {
            let zt: Vec<f64> = (0..6).map(|i| z[i] + scale * step.get(i, 0)).collect();
            let lt = f(&zt);
            if lt > ll {
                z = zt;
                ll = lt;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        iterations += 1;
        if !improved || g.iter().all(|gi| gi.abs() < 1e-10 * values.len() as f64) {
            break;
        }
    }
    params = OuMixtureParams::from_unconstrained(&z);
    let (params, _swapped) = params.normalized();

    // observed information in transformed coordinates at the optimum
    let z = params.to_unconstrained().to_vec();
    let ll_final = f(&z);
    let grad = fd_gradient(&f, &z);
    let score_norm = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs())) / values.len() as f64;
    let hess = fd_hessian(&f, &z);
    let mut neg_h = hess;
    neg_h.scale(-1.0);
    let (stderr, info_ok) = match neg_h.inverse() {
        Ok(cov_z) => {
            let jac = params.unconstrained_jacobian();
            let mut se = [0.0; 6];
            let mut ok = true;
            for i in 0..6 {
                let v = cov_z.get(i, i) * jac[i] * jac[i];
                if v.is_finite() && v >= 0.0 {
                    se[i] = v.sqrt();
                } else {
                    ok = false;
                }
            }
            (se, ok)
        }
        Err(_) => ([f64::NAN; 6], false),
    };

    let converged = nm_converged && info_ok && score_norm < 1e-5;
    Ok(FitResult {
        method: "mle".into(),
        params,
        stderr: OuMixtureParams::new(stderr[0], stderr[1], stderr[2], stderr[3], stderr[4], stderr[5]),
        loglik: ll_final,
        iterations,
        converged,
        delta,
        n_obs: values.len(),
        score_norm,
        residual_norm: None,
    })
}

const FD_STEP: f64 = 1e-4;

pub(crate) fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut g = vec![0.0; n];
    for i in 0..n {
        let h = FD_STEP * (1.0 + z[i].abs());
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[i] += h;
        zm[i] -= h;
        g[i] = (f(&zp) - f(&zm)) / (2.0 * h);
    }
    g
}

pub(crate) fn fd_hessian<F: Fn(&[f64]) -> f64>(f: &F, z: &[f64]) -> Mat {
    let n = z.len();
    let f0 = f(z);
    let hs: Vec<f64> = z.iter().map(|zi| FD_STEP * (1.0 + zi.abs())).collect();
    let mut h = Mat::zeros(n, n);
    for i in 0..n {
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[i] += hs[i];
        zm[i] -= hs[i];
        h.set(i, i, (f(&zp) - 2.0 * f0 + f(&zm)) / (hs[i] * hs[i]));
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut zpp = z.to_vec();
            let mut zpm = z.to_vec();
            let mut zmp = z.to_vec();
            let mut zmm = z.to_vec();
            zpp[i] += hs[i];
            zpp[j] += hs[j];
            zpm[i] += hs[i];
            zpm[j] -= hs[j];
            zmp[i] -= hs[i];
            zmp[j] += hs[j];
            zmm[i] -= hs[i];
            zmm[j] -= hs[j];
            let v = (f(&zpp) - f(&zpm) - f(&zmp) + f(&zmm)) / (4.0 * hs[i] * hs[j]);
            h.set(i, j, v);
            h.set(j, i, v);
        }
    }
    h
}
