//! Cubic Hermite interpolation on a sorted grid.
//!
//! Slopes may be supplied (when an analytic derivative is available) or
//! estimated with the Fritsch-Carlson limiter, which keeps the
//! interpolant monotone wherever the data are.

#[derive(Clone, Debug)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
    uniform_step: Option<f64>,
}

impl CubicHermite {
    /// Interpolant with caller-supplied slopes, limited so that each
    /// segment stays monotone when its endpoints are.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, mut ds: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len() && ys.len() == ds.len());
        // Fritsch-Carlson: cap |d| at 3 |secant| on each side.
        for i in 0..xs.len() - 1 {
            let sec = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
            if sec == 0.0 {
                continue;
            }
            for d in [&mut ds[i], &mut ds[i + 1]] {
                let r = **d / sec;
                if r < 0.0 {
                    **d = 0.0;
                } else if r > 3.0 {
                    **d = 3.0 * sec;
                }
            }
        }
        let uniform_step = detect_uniform(&xs);
        Self { xs, ys, ds, uniform_step }
    }

    /// Monotone interpolant with Fritsch-Carlson slopes built from the
    /// data alone (PCHIP).
    pub fn pchip(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        assert!(n >= 2 && n == ys.len());
        let mut secants = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            secants.push((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        }
        let mut ds = vec![0.0; n];
        ds[0] = secants[0];
        ds[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (s0, s1) = (secants[i - 1], secants[i]);
            if s0 * s1 > 0.0 {
                // weighted harmonic mean
                let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                ds[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
            }
        }
        Self::with_slopes(xs, ys, ds)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    fn segment(&self, x: f64) -> usize {
        if let Some(h) = self.uniform_step {
            let i = ((x - self.xs[0]) / h) as usize;
            return i.min(self.xs.len() - 2);
        }
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Evaluate at x; clamps to the boundary segments outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x.clamp(self.xs[0], *self.xs.last().unwrap()));
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h * (h10 * self.ds[i] + h11 * self.ds[i + 1]) + h01 * self.ys[i + 1]
    }
}

fn detect_uniform(xs: &[f64]) -> Option<f64> {
    let h = xs[1] - xs[0];
    let span = xs[xs.len() - 1] - xs[0];
    for i in 1..xs.len() - 1 {
        if ((xs[i + 1] - xs[i]) - h).abs() > 1e-9 * span {
            return None;
        }
    }
    Some(h)
}

/// Piecewise-linear interpolation over a uniform grid; used for the
/// estimating-function weight tables where overshoot-free evaluation
/// matters more than smoothness.
#[derive(Clone, Debug)]
pub struct LinearGrid {
    x0: f64,
    step: f64,
    ys: Vec<f64>,
}

impl LinearGrid {
    pub fn new(x0: f64, step: f64, ys: Vec<f64>) -> Self {
        assert!(ys.len() >= 2 && step > 0.0);
        Self { x0, step, ys }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.ys.len();
        let t = (x - self.x0) / self.step;
        if t <= 0.0 {
            return self.ys[0];
        }
        let i = t as usize;
        if i >= n - 1 {
            return self.ys[n - 1];
        }
        let frac = t - i as f64;
        self.ys[i] + frac * (self.ys[i + 1] - self.ys[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let f = |x: f64| x * x * x - x;
        let d = |x: f64| 3.0 * x * x - 1.0;
        let xs: Vec<f64> = (0..=20).map(|i| -2.0 + 0.2 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let ds: Vec<f64> = xs.iter().map(|&x| d(x)).collect();
        let h = CubicHermite::with_slopes(xs, ys, ds);
        for i in 0..200 {
            let x = -2.0 + 0.02 * i as f64;
            assert!((h.eval(x) - f(x)).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn pchip_is_monotone() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.1, 0.11, 2.0, 2.05];
        let h = CubicHermite::pchip(xs, ys);
        let mut prev = h.eval(0.0);
        for i in 1..=400 {
            let v = h.eval(i as f64 * 0.01);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn linear_grid_clamps() {
        let g = LinearGrid::new(0.0, 1.0, vec![1.0, 2.0, 4.0]);
        assert_eq!(g.eval(-5.0), 1.0);
        assert_eq!(g.eval(10.0), 4.0);
        assert!((g.eval(0.5) - 1.5).abs() < 1e-15);
        assert!((g.eval(1.25) - 2.5).abs() < 1e-15);
    }
}
