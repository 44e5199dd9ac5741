//! Symmetric positive definite banded matrices and their Cholesky factors.
//!
//! Storage keeps the lower band only: `band[i * (kd + 1) + k] = A[i][i - k]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    n: usize,
    kd: usize,
    band: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, kd: usize) -> Self {
        SymBanded { n, kd, band: vec![0.0; n * (kd + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    /// Entry `A[i][j]`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.kd {
            0.0
        } else {
            self.band[i * (self.kd + 1) + (i - j)]
        }
    }

    /// Adds `v` to `A[i][j]` (and its mirror). Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.kd, "entry ({i}, {j}) outside bandwidth {}", self.kd);
        self.band[i * (self.kd + 1) + (i - j)] += v;
    }

    /// `a·self + b·other`, both of the same shape.
    pub fn combine(&self, a: f64, other: &SymBanded, b: f64) -> SymBanded {
        assert_eq!((self.n, self.kd), (other.n, other.kd));
        let band = self.band.iter().zip(&other.band).map(|(x, y)| a * x + b * y).collect();
        SymBanded { n: self.n, kd: self.kd, band }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let w = self.kd + 1;
        for v in y.iter_mut() {
            *v = 0.0;
        }
        for i in 0..self.n {
            let row = &self.band[i * w..(i + 1) * w];
            y[i] += row[0] * x[i];
            for k in 1..=self.kd.min(i) {
                let j = i - k;
                y[i] += row[k] * x[j];
                y[j] += row[k] * x[i];
            }
        }
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let y = self.mul_vec(x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// Cholesky factorization `A = L Lᵀ`, keeping the band structure.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let (n, kd) = (self.n, self.kd);
        let w = kd + 1;
        let mut l = self.band.clone();
        for i in 0..n {
            for k in (1..=kd.min(i)).rev() {
                let j = i - k;
                // L[i][j] = (A[i][j] - Σ_{m<j} L[i][m] L[j][m]) / L[j][j]
                let mut s = l[i * w + k];
                for m in 1..=(kd - k).min(j) {
                    let c = j - m;
                    s -= l[i * w + (i - c)] * l[j * w + m];
                }
                l[i * w + k] = s / l[j * w];
            }
            let mut d = l[i * w];
            for k in 1..=kd.min(i) {
                d -= l[i * w + k] * l[i * w + k];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite(i));
            }
            l[i * w] = d.sqrt();
        }
        Ok(BandedCholesky { n, kd, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    kd: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let w = self.kd + 1;
        for i in 0..self.n {
            let mut s = b[i];
            for k in 1..=self.kd.min(i) {
                s -= self.l[i * w + k] * b[i - k];
            }
            b[i] = s / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for k in 1..=self.kd.min(self.n - 1 - i) {
                s -= self.l[(i + k) * w + k] * b[i + k];
            }
            b[i] = s / self.l[i * w];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
