//! Dense complex linear algebra used throughout the simulator.
//!
//! Everything here is a pure function over `nalgebra` matrices. Problem sizes
//! stay in the low hundreds, so no attempt is made to exploit sparsity.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Dense complex matrix, stored column-major by `nalgebra`.
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

/// Default relative threshold for rank and null-space decisions.
pub const DEFAULT_NULL_TOL: f64 = 1e-10;

/// Asymmetry tolerated by [`logdet_identity_plus`], relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Orthonormal basis of a right null space together with its quality.
#[derive(Debug, Clone)]
pub struct NullSpaceResult {
    /// Columns form an orthonormal basis of the null space (may have zero columns).
    pub basis: ComplexMatrix,
    /// `‖M·basis‖_F / ‖M‖_F`, zero when `M` is the zero matrix.
    pub residual: f64,
    pub tolerance_used: f64,
}

impl NullSpaceResult {
    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }
}

/// `exp(-j·2π·m/n)`, the basic DFT twiddle factor.
#[inline]
pub fn twiddle(m: usize, n: usize) -> Complex64 {
    let phase = -2.0 * PI * ((m % n) as f64) / n as f64;
    Complex64::from_polar(1.0, phase)
}

/// Unitary `n×n` DFT matrix with `F[k][l] = exp(-j2πkl/n)/√n`.
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |k, l| twiddle(k * l % n, n) * scale))
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_asymmetry(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Orthonormal basis for the right null space of `m`.
///
/// Uses a full SVD; singular directions with `σ ≤ tol·σ_max` are treated as
/// null. Wide inputs are padded with zero rows so the SVD returns the full
/// right singular basis.
pub fn null_space_basis(m: &ComplexMatrix, tol: f64) -> Result<NullSpaceResult> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyDimension);
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    ensure_finite(m)?;

    let padded = if rows < cols {
        let mut p = ComplexMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    let threshold = tol * sigma_max;

    let null_rows: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= threshold).collect();
    let mut basis = ComplexMatrix::zeros(cols, null_rows.len());
    for (c, &i) in null_rows.iter().enumerate() {
        for r in 0..cols {
            basis[(r, c)] = v_t[(i, r)].conj();
        }
    }

    let m_norm = m.norm();
    let residual = if m_norm == 0.0 || basis.ncols() == 0 {
        0.0
    } else {
        (m * &basis).norm() / m_norm
    };
    Ok(NullSpaceResult {
        basis,
        residual,
        tolerance_used: tol,
    })
}

/// Numerical rank of `m` at threshold `tol·σ_max`.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sigma = m.clone().singular_values();
    let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol * sigma_max).count()
}

/// `log2 det(I + m)` for Hermitian positive semidefinite `m`.
///
/// The matrix is symmetrised, checked for semidefiniteness with a shifted
/// Cholesky attempt, and the determinant is read off the Cholesky factor of
/// `I + m`.
pub fn logdet_identity_plus(m: &ComplexMatrix) -> Result<f64> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyDimension);
    }
    ensure_finite(m)?;
    let scale = max_abs(m).max(1.0);
    let asym = hermitian_asymmetry(m);
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(asym));
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);

    let shift = HERMITIAN_TOL * scale * rows as f64;
    let shifted = &sym + ComplexMatrix::identity(rows, rows) * Complex64::new(shift, 0.0);
    if positive_cholesky_diag(shifted).is_none() {
        return Err(Error::Indefinite);
    }
    let diag = positive_cholesky_diag(sym + ComplexMatrix::identity(rows, rows))
        .ok_or(Error::Indefinite)?;
    let logdet: f64 = diag.iter().map(|d| 2.0 * d.log2()).sum();
    Ok(logdet.max(0.0))
}

/// Diagonal of the Cholesky factor, or `None` if the matrix is not positive
/// definite. The complex factorisation happily takes square roots of negative
/// pivots, so the pivots are checked explicitly.
fn positive_cholesky_diag(m: ComplexMatrix) -> Option<Vec<f64>> {
    let n = m.nrows();
    let chol = cholesky_pd(m)?;
    let l = chol.l_dirty();
    Some((0..n).map(|i| l[(i, i)].re).collect())
}

/// Cholesky factorisation of the Hermitian part of `m`; fails on
/// non-positive or non-finite pivots.
pub fn cholesky_pd(m: ComplexMatrix) -> Option<Cholesky<Complex64, Dyn>> {
    let n = m.nrows();
    let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let chol = herm.cholesky()?;
    let l = chol.l_dirty();
    let ok = (0..n).all(|i| {
        let d = l[(i, i)];
        d.re.is_finite() && d.re > 0.0 && d.im.abs() <= 1e-12 * d.re
    });
    ok.then_some(chol)
}

/// `‖offdiag(m)‖_F / ‖m‖_F`; zero for the zero matrix.
pub fn offdiag_ratio(m: &ComplexMatrix) -> f64 {
    let total = m.norm();
    if total == 0.0 {
        return 0.0;
    }
    let mut off = 0.0;
    for j in 0..m.ncols() {
        for i in (0..m.nrows()).filter(|&i| i != j) {
            off += m[(i, j)].norm_sqr();
        }
    }
    off.sqrt() / total
}

/// `F·m·Fᴴ` for square `m`.
pub fn to_frequency_domain(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let f = dft_matrix(rows)?;
    Ok(&f * m * f.adjoint())
}
