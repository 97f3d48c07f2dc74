//! Dense `f64` reference linear algebra backed by `nalgebra`.
//!
//! These routines are the independent side of every oracle comparison; none
//! of the circuit builders or analytic formulas call them.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sim::CMatrix;

pub type C64 = Complex<f64>;

pub fn to_nalgebra(m: &CMatrix<f64>) -> DMatrix<C64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |r, c| m.get(r, c))
}

pub fn from_nalgebra(m: &DMatrix<C64>) -> CMatrix<f64> {
    CMatrix::from_fn(m.nrows(), |r, c| m[(r, c)])
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix<f64>) -> f64 {
    let svd = to_nalgebra(m).svd(false, false);
    svd.singular_values.iter().copied().fold(0.0, f64::max)
}

/// Ascending eigenvalues of a real symmetric row-major matrix.
pub fn symmetric_eigenvalues(dense: &[f64], n: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, dense);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// LU solve of a real row-major system.
pub fn lu_solve(dense: &[f64], n: usize, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = DMatrix::from_row_slice(n, n, dense);
    m.lu()
        .solve(&DVector::from_column_slice(rhs))
        .map(|x| x.iter().copied().collect())
        .ok_or(Error::SingularSystem { index: 0 })
}

/// `e^{iHt}` for Hermitian `H` through its eigendecomposition.
pub fn expm_i_hermitian(h: &CMatrix<f64>, t: f64) -> CMatrix<f64> {
    let eig = to_nalgebra(h).symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        h.dim(),
        eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, l * t)),
    ));
    from_nalgebra(&(v * d * v.adjoint()))
}

/// Real symmetric row-major matrix as a complex matrix.
pub fn real_to_complex(dense: &[f64], n: usize) -> CMatrix<f64> {
    CMatrix::from_real_fn(n, |r, c| dense[r * n + c])
}
