//! Adaptive quadrature.
//!
//! Adaptive Simpson with the usual |S_fine - S_coarse|/15 error
//! criterion. Good enough for the smooth one-dimensional integrands in
//! this crate (densities, scale functions, passage-time kernels).

use crate::error::{Error, Result};

struct Ctx<'a> {
    f: &'a dyn Fn(f64) -> f64,
    abs_tol: f64,
    evals: usize,
    max_evals: usize,
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt(ctx: &mut Ctx, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = (ctx.f)(lm);
    let frm = (ctx.f)(rm);
    ctx.evals += 2;
    if ctx.evals > ctx.max_evals {
        return Err(Error::Quadrature(format!(
            "evaluation budget exhausted on [{a}, {b}]"
        )));
    }
    if !flm.is_finite() || !frm.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand near x = {lm} or {rm}"
        )));
    }
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let err = left + right - whole;
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "max recursion depth reached on [{a}, {b}]"
        )));
    }
    if err.abs() <= 15.0 * tol || (b - a).abs() < 1e-14 * (a.abs() + b.abs() + 1.0) {
        return Ok(left + right + err / 15.0);
    }
    let half = 0.5 * tol;
    Ok(adapt(ctx, a, m, fa, flm, fm, left, half, depth - 1)?
        + adapt(ctx, m, b, fm, frm, fb, right, half, depth - 1)?)
}

/// Integrate f over [a, b] to absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut ctx = Ctx {
        f: &f,
        abs_tol,
        evals: 0,
        max_evals: 2_000_000,
    };
    // Seed with a fixed 8-panel pass so narrow features are not missed
    // by the very first Simpson estimate.
    let n0 = 8;
    let h = (hi - lo) / n0 as f64;
    let mut total = 0.0;
    let mut xs = Vec::with_capacity(n0 + 1);
    for i in 0..=n0 {
        let x = lo + i as f64 * h;
        let v = (ctx.f)(x);
        if !v.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand at x = {x}")));
        }
        xs.push(v);
    }
    ctx.evals = n0 + 1;
    let tol_panel = ctx.abs_tol / n0 as f64;
    for i in 0..n0 {
        let a_i = lo + i as f64 * h;
        let b_i = a_i + h;
        let m_i = 0.5 * (a_i + b_i);
        let fm = (ctx.f)(m_i);
        ctx.evals += 1;
        if !fm.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand at x = {m_i}")));
        }
        let whole = simpson(xs[i], fm, xs[i + 1], h);
        total += adapt(&mut ctx, a_i, b_i, xs[i], fm, xs[i + 1], whole, tol_panel, 48)?;
    }
    Ok(sign * total)
}

/// Integrate a nonnegative, eventually decaying integrand over
/// [a, +inf) by expanding windows; stops when a window adds less than
/// `abs_tol` and the window integrand has clearly died off.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut left = a;
    let mut width = 1.0_f64.max(a.abs() * 0.5);
    for _ in 0..80 {
        let part = integrate(&f, left, left + width, abs_tol * 0.25)?;
        total += part;
        if part.abs() < abs_tol && f(left + width).abs() * width < abs_tol {
            return Ok(total);
        }
        left += width;
        width *= 2.0;
    }
    Err(Error::Quadrature("tail integral did not converge".into()))
}

/// Mirror of [`integrate_to_inf`] over (-inf, b].
pub fn integrate_from_neg_inf<F: Fn(f64) -> f64>(f: F, b: f64, abs_tol: f64) -> Result<f64> {
    integrate_to_inf(move |x| f(-x), -b, abs_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::normal;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_mass() {
        let v = integrate(normal::pdf, -10.0, 10.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillatory() {
        let v = integrate(|x| (10.0 * x).sin(), 0.0, 1.0, 1e-12).unwrap();
        let want = (1.0 - (10.0_f64).cos()) / 10.0;
        assert!((v - want).abs() < 1e-10);
    }

    #[test]
    fn orientation() {
        let fwd = integrate(|x| x, 0.0, 1.0, 1e-12).unwrap();
        let bwd = integrate(|x| x, 1.0, 0.0, 1e-12).unwrap();
        assert!((fwd + bwd).abs() < 1e-14);
    }

    #[test]
    fn tail_integral() {
        let v = integrate_to_inf(normal::pdf, 0.0, 1e-10).unwrap();
        assert!((v - 0.5).abs() < 1e-8);
        let w = integrate_from_neg_inf(normal::pdf, 0.0, 1e-10).unwrap();
        assert!((w - 0.5).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(integrate(|x| 1.0 / x, -1.0, 1.0, 1e-8).is_err());
    }
}
