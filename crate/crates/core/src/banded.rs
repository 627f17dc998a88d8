//! Symmetric positive-definite pentadiagonal systems.
//!
//! The matrix is held by its three distinct diagonals and factored as
//! `L D Lᵀ` with `L` unit lower-triangular of bandwidth 2. Factorization and
//! each solve are O(n).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPentadiagonal {
    /// Main diagonal, length n.
    pub diag: Vec<f64>,
    /// First sub/super diagonal, length n - 1.
    pub off1: Vec<f64>,
    /// Second sub/super diagonal, length n - 2.
    pub off2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl SymmetricPentadiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off1: vec![0.0; n.saturating_sub(1)],
            off2: vec![0.0; n.saturating_sub(2)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i >= 1 {
                acc += self.off1[i - 1] * x[i - 1];
            }
            if i >= 2 {
                acc += self.off2[i - 2] * x[i - 2];
            }
            if i + 1 < n {
                acc += self.off1[i] * x[i + 1];
            }
            if i + 2 < n {
                acc += self.off2[i] * x[i + 2];
            }
            y[i] = acc;
        }
        y
    }

    pub fn factor(&self) -> Result<LdlFactor> {
        let n = self.len();
        if n == 0 || self.off1.len() + 1 != n.max(1) || self.off2.len() + 2 != n.max(2) {
            return Err(Error::Size(format!(
                "inconsistent pentadiagonal shape: diag {}, off1 {}, off2 {}",
                n,
                self.off1.len(),
                self.off2.len()
            )));
        }
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n.saturating_sub(1)];
        let mut l2 = vec![0.0; n.saturating_sub(2)];
        for i in 0..n {
            let mut di = self.diag[i];
            if i >= 1 {
                di -= l1[i - 1] * l1[i - 1] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i - 2] * l2[i - 2] * d[i - 2];
            }
            if !(di > 0.0) || !di.is_finite() {
                return Err(Error::Numerical(format!(
                    "matrix is not positive definite (pivot {di} at row {i})"
                )));
            }
            d[i] = di;
            if i + 1 < n {
                let mut e = self.off1[i];
                if i >= 1 {
                    e -= l2[i - 1] * d[i - 1] * l1[i - 1];
                }
                l1[i] = e / di;
            }
            if i + 2 < n {
                l2[i] = self.off2[i] / di;
            }
        }
        Ok(LdlFactor { d, l1, l2 })
    }
}

impl LdlFactor {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.d.len();
        if rhs.len() != n {
            return Err(Error::Size(format!(
                "right-hand side has length {}, system has {n}",
                rhs.len()
            )));
        }
        let mut x = rhs.to_vec();
        for i in 0..n {
            if i >= 1 {
                x[i] -= self.l1[i - 1] * x[i - 1];
            }
            if i >= 2 {
                x[i] -= self.l2[i - 2] * x[i - 2];
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                x[i] -= self.l1[i] * x[i + 1];
            }
            if i + 2 < n {
                x[i] -= self.l2[i] * x[i + 2];
            }
        }
        Ok(x)
    }
}
