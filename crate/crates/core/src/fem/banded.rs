//! Symmetric positive definite banded matrices and their Cholesky solve.

use crate::error::{Error, Result};

/// Symmetric matrix with half-bandwidth `bw`, lower band stored row-major:
/// entry `(i, i - d)` lives at `i * (bw + 1) + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBanded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymmetricBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bw
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        (r < self.n && d <= self.bw).then_some(r * (self.bw + 1) + d)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to the symmetric pair `(i, j)`, `(j, i)`.
    ///
    /// Panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band {}", self.bw));
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place Cholesky factorisation `A = L L^T`.
    pub fn cholesky(mut self) -> Result<BandedCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let scale = (0..n).map(|i| self.data[i * w].abs()).fold(0.0, f64::max);
        for j in 0..n {
            for i in j..(j + w).min(n) {
                let lo = i.saturating_sub(bw);
                let mut s = self.data[i * w + (i - j)];
                for p in lo..j {
                    s -= self.data[i * w + (i - p)] * self.data[j * w + (j - p)];
                }
                if i == j {
                    if !(s.is_finite() && s > f64::EPSILON * scale) {
                        return Err(Error::SingularSystem { row: j, pivot: s });
                    }
                    self.data[j * w] = s.sqrt();
                } else {
                    self.data[i * w + (i - j)] = s / self.data[j * w];
                }
            }
        }
        Ok(BandedCholesky { factor: self })
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    factor: SymmetricBanded,
}

impl BandedCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let SymmetricBanded { n, bw, ref data } = self.factor;
        assert_eq!(rhs.len(), n);
        let w = bw + 1;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for p in i.saturating_sub(bw)..i {
                s -= data[i * w + (i - p)] * y[p];
            }
            y[i] = s / data[i * w];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for r in (i + 1)..(i + w).min(n) {
                s -= data[r * w + (r - i)] * y[r];
            }
            y[i] = s / data[i * w];
        }
        y
    }
}
