//! Derivative-free optimizers and a damped least-squares root finder.
//!
//! Everything works in unconstrained coordinates; the callers apply
//! log/logit transforms before handing objectives over.

use crate::error::{Error, Result};
use crate::math::linalg::Mat;

#[derive(Clone, Debug)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct NmOptions {
    pub max_iter: usize,
    pub x_tol: f64,
    pub f_tol: f64,
    /// Initial simplex edge length per coordinate.
    pub step: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self { max_iter: 4000, x_tol: 1e-9, f_tol: 1e-11, step: 0.25 }
    }
}

/// Nelder-Mead simplex minimization. Objectives may return None for
/// infeasible points, which are treated as +inf.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NmOptions) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1e-8 { opts.step * v[i].abs().max(0.2) } else { opts.step };
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        // order
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let ordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let ordered_f: Vec<f64> = idx.iter().map(|&i| fvals[i]).collect();
        simplex = ordered;
        fvals = ordered_f;

        let spread = fvals[n] - fvals[0];
        let size: f64 = (0..n)
            .map(|j| {
                let lo = simplex.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
                let hi = simplex.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0, f64::max);
        if spread.abs() < opts.f_tol * (1.0 + fvals[0].abs()) && size < opts.x_tol {
            converged = true;
            break;
        }

        // centroid of all but worst
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, &vi) in centroid.iter_mut().zip(v) {
                *c += vi / n as f64;
            }
        }

        let lerp = |from: &[f64], coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(&c, &w)| c + coef * (c - w))
                .collect()
        };

        let reflected = lerp(&simplex[n], alpha);
        let fr = f(&reflected);
        if fr < fvals[0] {
            let expanded = lerp(&simplex[n], gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                fvals[n] = fe;
            } else {
                simplex[n] = reflected;
                fvals[n] = fr;
            }
        } else if fr < fvals[n - 1] {
            simplex[n] = reflected;
            fvals[n] = fr;
        } else {
            let contracted = if fr < fvals[n] {
                lerp(&simplex[n], rho) // outside
            } else {
                lerp(&simplex[n], -rho) // inside
            };
            let fc = f(&contracted);
            if fc < fvals[n].min(fr) {
                simplex[n] = contracted;
                fvals[n] = fc;
            } else {
                // shrink toward best
                for i in 1..=n {
                    let best = simplex[0].clone();
                    for (v, &b) in simplex[i].iter_mut().zip(&best) {
                        *v = b + sigma * (*v - b);
                    }
                    fvals[i] = f(&simplex[i]);
                }
            }
        }
    }

    NmResult { x: simplex[0].clone(), fx: fvals[0], iterations, converged }
}

/// Brent-style 1-D minimization over [a, b].
pub fn brent_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let golden = 0.381_966_011_250_105_1;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x = lo + golden * (hi - lo);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..max_iter {
        let m = 0.5 * (lo + hi);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // parabolic fit
            let r = (x - w) * (fx - fv);
            let q2 = (x - v) * (fx - fw);
            let mut p = (x - v) * q2 - (x - w) * r;
            let mut q = 2.0 * (q2 - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            e = d;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (lo - x) && p < q * (hi - x) {
                d = p / q;
                let u = x + d;
                if (u - lo) < tol2 || (hi - u) < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { hi - x } else { lo - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + if d > 0.0 { tol1 } else { -tol1 } };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                hi = x;
            } else {
                lo = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

#[derive(Clone, Debug)]
pub struct RootResult {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct RootOptions {
    pub max_iter: usize,
    /// Converged when ||g||_inf falls below this.
    pub g_tol: f64,
    pub fd_step: f64,
    pub max_step: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { max_iter: 60, g_tol: 1e-9, fd_step: 1e-6, max_step: 1.0 }
    }
}

/// Damped Gauss-Newton root finder for square systems g(x) = 0.
///
/// The Jacobian comes from forward differences and is reused via
/// Broyden updates between full refreshes; steps are Levenberg-damped
/// until the squared norm decreases.
pub fn gauss_newton_root<G>(mut g: G, x0: &[f64], opts: &RootOptions) -> Result<RootResult>
where
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut gx = g(&x)?;
    if gx.len() != n {
        return Err(Error::Invalid("root finder requires a square system".into()));
    }
    let norm2 = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
    let norm_inf = |v: &[f64]| v.iter().fold(0.0_f64, |m, a| m.max(a.abs()));

    let fd_jacobian = |g: &mut G, x: &[f64], gx: &[f64], h: f64| -> Result<Mat> {
        let mut jac = Mat::zeros(n, n);
        for j in 0..n {
            let mut xp = x.to_vec();
            let hj = h * (1.0 + x[j].abs());
            xp[j] += hj;
            let gp = g(&xp)?;
            for i in 0..n {
                jac.set(i, j, (gp[i] - gx[i]) / hj);
            }
        }
        Ok(jac)
    };

    let mut jac = fd_jacobian(&mut g, &x, &gx, opts.fd_step)?;
    let mut since_refresh = 0;
    let mut iterations = 0;

    for _ in 0..opts.max_iter {
        iterations += 1;
        if norm_inf(&gx) < opts.g_tol {
            return Ok(RootResult {
                norm: norm2(&gx).sqrt(),
                x,
                residual: gx,
                iterations,
                converged: true,
            });
        }
        // solve (J^T J + lambda D) step = -J^T g with increasing damping
        let jt = jac.transpose();
        let jtj = jt.matmul(&jac);
        let mut rhs = Mat::zeros(n, 1);
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += jt.get(i, k) * gx[k];
            }
            rhs.set(i, 0, -s);
        }
        let mut lambda = 1e-10;
        let mut accepted = false;
        let f0 = norm2(&gx);
        for _ in 0..14 {
            let mut a = jtj.clone();
            for i in 0..n {
                a.add_to(i, i, lambda * (1.0 + jtj.get(i, i).abs()));
            }
            let step = match Mat::solve(a, rhs.clone()) {
                Ok(s) => s,
                Err(_) => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut xs = x.clone();
            let mut scale = 1.0;
            let step_norm = (0..n).map(|i| step.get(i, 0).powi(2)).sum::<f64>().sqrt();
            if step_norm > opts.max_step {
                scale = opts.max_step / step_norm;
            }
            for i in 0..n {
                xs[i] += scale * step.get(i, 0);
            }
            match g(&xs) {
                Ok(gs) if norm2(&gs) < f0 => {
                    // Broyden update: J += (dg - J dx) dx^T / (dx^T dx)
                    let dx: Vec<f64> = (0..n).map(|i| xs[i] - x[i]).collect();
                    let dg: Vec<f64> = (0..n).map(|i| gs[i] - gx[i]).collect();
                    let dx2 = norm2(&dx);
                    if dx2 > 0.0 {
                        for i in 0..n {
                            let mut jdx = 0.0;
                            for k in 0..n {
                                jdx += jac.get(i, k) * dx[k];
                            }
                            let coef = (dg[i] - jdx) / dx2;
                            for k in 0..n {
                                jac.add_to(i, k, coef * dx[k]);
                            }
                        }
                    }
                    x = xs;
                    gx = gs;
                    accepted = true;
                    since_refresh += 1;
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if !accepted || since_refresh >= 2 * n {
            jac = fd_jacobian(&mut g, &x, &gx, opts.fd_step)?;
            since_refresh = 0;
            if !accepted {
                // one more damped attempt with the fresh Jacobian next loop;
                // if the norm is already tiny treat as converged
                if norm_inf(&gx) < opts.g_tol * 10.0 {
                    return Ok(RootResult {
                        norm: norm2(&gx).sqrt(),
                        x,
                        residual: gx,
                        iterations,
                        converged: true,
                    });
                }
            }
        }
    }

    let converged = norm_inf(&gx) < opts.g_tol;
    Ok(RootResult { norm: norm2(&gx).sqrt(), x, residual: gx, iterations, converged })
}
