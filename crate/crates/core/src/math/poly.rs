//! Dense univariate polynomials and Gaussian moment algebra.
//!
//! The estimating-function layer needs exact conditional moments of
//! polynomial eigenfunctions under a normal transition law, so the
//! basic operations here are polynomial arithmetic, Hermite
//! polynomials, and E[p(W)] for W ~ N(m, v).

/// Polynomial with ascending coefficients: p(x) = sum c[i] x^i.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i + 1) as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    /// E[p(W)] for W ~ N(mean, var).
    pub fn gaussian_mean(&self, mean: f64, var: f64) -> f64 {
        let moments = normal_raw_moments(self.degree(), mean, var);
        self.0.iter().zip(&moments).map(|(c, m)| c * m).sum()
    }
}

/// Raw moments E[W^k], k = 0..=order, of W ~ N(mean, var), by the
/// recursion m_k = mean m_{k-1} + (k-1) var m_{k-2}.
pub fn normal_raw_moments(order: usize, mean: f64, var: f64) -> Vec<f64> {
    let mut m = Vec::with_capacity(order + 1);
    m.push(1.0);
    if order >= 1 {
        m.push(mean);
    }
    for k in 2..=order {
        let v = mean * m[k - 1] + (k - 1) as f64 * var * m[k - 2];
        m.push(v);
    }
    m
}

/// Probabilists' Hermite polynomial He_j (He_1 = x, He_2 = x^2 - 1, ...),
/// by the recursion He_{j+1} = x He_j - j He_{j-1}.
pub fn hermite(j: usize) -> Poly {
    let mut prev = Poly(vec![1.0]);
    if j == 0 {
        return prev;
    }
    let mut cur = Poly(vec![0.0, 1.0]);
    for n in 1..j {
        // next = x*cur - n*prev
        let mut next = vec![0.0; cur.0.len() + 1];
        for (i, &c) in cur.0.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, &c) in prev.0.iter().enumerate() {
            next[i] -= n as f64 * c;
        }
        prev = cur;
        cur = Poly(next);
    }
    cur
}
