//! Small dense matrices (row major) with just enough linear algebra
//! for weight matrices, information matrices and local regressions.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_assign(&mut self, other: &Mat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Solve A X = B with partial pivoting; A is consumed as workspace.
    pub fn solve(mut a: Mat, mut b: Mat) -> Result<Mat> {
        assert_eq!(a.rows, a.cols);
        assert_eq!(a.rows, b.rows);
        let n = a.rows;
        let m = b.cols;
        let mut max_pivot = 0.0_f64;
        let mut min_pivot = f64::INFINITY;
        for col in 0..n {
            let mut piv = col;
            let mut best = a.get(col, col).abs();
            for r in col + 1..n {
                let v = a.get(r, col).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix {
                    condition: f64::INFINITY,
                });
            }
            max_pivot = max_pivot.max(best);
            min_pivot = min_pivot.min(best);
            if piv != col {
                for j in 0..n {
                    let tmp = a.get(col, j);
                    a.set(col, j, a.get(piv, j));
                    a.set(piv, j, tmp);
                }
                for j in 0..m {
                    let tmp = b.get(col, j);
                    b.set(col, j, b.get(piv, j));
                    b.set(piv, j, tmp);
                }
            }
            let d = a.get(col, col);
            for r in col + 1..n {
                let factor = a.get(r, col) / d;
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = a.get(r, j) - factor * a.get(col, j);
                    a.set(r, j, v);
                }
                for j in 0..m {
                    let v = b.get(r, j) - factor * b.get(col, j);
                    b.set(r, j, v);
                }
            }
        }
        if min_pivot / max_pivot < 1e-14 {
            return Err(Error::SingularMatrix {
                condition: max_pivot / min_pivot,
            });
        }
        // back substitution
        let mut x = Mat::zeros(n, m);
        for col in 0..m {
            for i in (0..n).rev() {
                let mut s = b.get(i, col);
                for j in i + 1..n {
                    s -= a.get(i, j) * x.get(j, col);
                }
                x.set(i, col, s / a.get(i, i));
            }
        }
        Ok(x)
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn inverse(&self) -> Result<Mat> {
        Mat::solve(self.clone(), Mat::identity(self.rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_2x2() {
        let a = Mat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]);
        let b = Mat::from_rows(vec![vec![5.0], vec![10.0]]);
        let x = Mat::solve(a, b).unwrap();
        assert!((x.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((x.get(1, 0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        let a = Mat::from_rows(vec![
            vec![4.0, 1.0, 0.3],
            vec![1.0, 3.0, -0.5],
            vec![0.3, -0.5, 2.0],
        ]);
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_detected() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(Mat::solve(a, Mat::identity(2)).is_err());
    }
}
