//! Dense complex helpers shared by the solvers and the Monte Carlo oracle.
//!
//! Everything here works on Hermitian (or Hermitian-intended) matrices. Inputs
//! are symmetrized before eigendecomposition so that round-off asymmetry never
//! leaks complex eigenvalues.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Cholesky, Complex, ComplexField, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Eigenpairs of a Hermitian matrix, eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue magnitude, i.e. the spectral norm.
    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// `U f(Λ) U^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            for i in 0..n {
                scaled[(i, j)] *= fv;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(values[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// `max |a_ij - conj(a_ji)|`; zero for an exactly Hermitian matrix.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).modulus());
        }
    }
    worst
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m: f64, z| m.max(z.modulus()))
}

pub fn max_off_diagonal(a: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if i != j {
                worst = worst.max(a[(i, j)].modulus());
            }
        }
    }
    worst
}

pub fn hermitian_eigen(a: &CMatrix) -> HermitianEigen {
    let n = a.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// Hermitian square root of a PSD matrix; negative eigenvalues are clamped to 0.
pub fn psd_sqrt(a: &CMatrix) -> CMatrix {
    hermitian_eigen(a).reconstruct_with(|v| v.max(0.0).sqrt())
}

/// Eigenvalues of a PSD matrix, clamped at 0.
pub fn psd_eigenvalues(a: &CMatrix) -> Vec<f64> {
    hermitian_eigen(a)
        .values
        .into_iter()
        .map(|v| v.max(0.0))
        .collect()
}

/// `log det A` for Hermitian positive definite `A` as the sum of log eigenvalues.
pub fn logdet_eig(a: &CMatrix) -> Result<f64> {
    let eig = hermitian_eigen(a);
    let mut acc = 0.0;
    for v in eig.values {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!(
                "log-determinant of a matrix with eigenvalue {v:e}"
            )));
        }
        acc += v.ln();
    }
    Ok(acc)
}

/// `log det A` from the Cholesky factor, `2 Σ log L_ii`.
pub fn logdet_cholesky(a: &CMatrix) -> Result<f64> {
    let chol = Cholesky::new(hermitian_part(a))
        .ok_or_else(|| Error::domain("Cholesky factorization of a non-positive-definite matrix"))?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        acc += l[(i, i)].re.ln();
    }
    Ok(2.0 * acc)
}

pub fn hpd_cholesky(a: &CMatrix) -> Result<Cholesky<C64, nalgebra::Dyn>> {
    Cholesky::new(hermitian_part(a))
        .ok_or_else(|| Error::domain("Cholesky factorization of a non-positive-definite matrix"))
}

pub fn hpd_inverse(a: &CMatrix) -> Result<CMatrix> {
    Ok(hpd_cholesky(a)?.inverse())
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().copied().sum()
}
