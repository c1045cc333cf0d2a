//! Small dense matrices and the spectral radius routine used for growth rates.

use crate::error::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("matrix is not square".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            data.extend_from_slice(r);
        }
        Ok(Mat { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().cloned().fold(0.0_f64, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= 0.0 && x.is_finite())
    }

    /// y = M x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * n..(i + 1) * n];
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// M^k by repeated squaring.
    pub fn pow(&self, mut k: u32) -> Mat {
        let mut base = self.clone();
        let mut acc = Mat::identity(self.n);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.matmul(&base);
            }
            base = base.matmul(&base);
            k >>= 1;
        }
        acc
    }

    /// max over rows of the row sum.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().sum::<f64>())
            .fold(0.0_f64, f64::max)
    }
}

/// Spectral radius of a nonnegative square matrix.
///
/// Power iteration on `M + eps*I` (the shift breaks periodicity so the
/// iteration converges for stochastic-like matrices with complex peripheral
/// spectrum). If the iteration stalls and the matrix is small enough, falls
/// back to a dense eigenvalue computation.
pub fn spectral_radius(m: &Mat) -> Result<f64> {
    if !m.is_nonnegative() {
        return Err(Error::InvalidParameter(
            "spectral radius requires a finite nonnegative matrix".into(),
        ));
    }
    let n = m.n();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let max = m.max_entry();
    if max == 0.0 {
        return Ok(0.0);
    }

    let eps = 1e-8 * max;
    let mut shifted = m.clone();
    for i in 0..n {
        let v = shifted.get(i, i);
        shifted.set(i, i, v + eps);
    }

    const MAX_ITER: usize = 100_000;
    const REL_TOL: f64 = 1e-13;

    // Iterate with the shifted matrix (convergence), but measure the
    // Rayleigh quotient on the original one: the shift does not move the
    // eigenvectors, and this avoids the cancellation in r(M + eps I) - eps,
    // which matters when r(M) sits exactly on a threshold like 1.
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut lambda_prev = f64::NAN;
    let mut stable = 0usize;
    let mut best = 0.0;
    for it in 0..MAX_ITER {
        m.matvec(&x, &mut y);
        let lambda: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        shifted.matvec(&x, &mut y);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        best = lambda;
        if (lambda - lambda_prev).abs() <= REL_TOL * lambda.abs().max(1e-300) {
            stable += 1;
            if stable >= 3 && it >= 10 {
                return Ok(lambda.max(0.0));
            }
        } else {
            stable = 0;
        }
        lambda_prev = lambda;
    }

    if n <= 64 {
        return dense_spectral_radius(m);
    }
    Err(Error::NoConvergence {
        estimate: best.max(0.0),
        iterations: MAX_ITER,
    })
}

fn dense_spectral_radius(m: &Mat) -> Result<f64> {
    let n = m.n();
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let eig = dm.complex_eigenvalues();
    Ok(eig.iter().map(|c| c.norm()).fold(0.0_f64, f64::max))
}

/// Solve A x = b for small dense A by LU with partial pivoting.
pub fn solve_linear(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let rhs = nalgebra::DVector::from_column_slice(b);
    let lu = dm.lu();
    match lu.solve(&rhs) {
        Some(x) => Ok(x.iter().cloned().collect()),
        None => Err(Error::InvalidParameter("singular linear system".into())),
    }
}
