//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance on the relative Hermitian residual `‖A − Aᴴ‖_F / max(1, ‖A‖_F)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn is_hermitian(a: &CMatrix) -> bool {
    if !a.is_square() {
        return false;
    }
    let residual = (a - a.adjoint()).norm();
    residual <= HERMITIAN_TOL * a.norm().max(1.0)
}

/// Eigen-decomposition based square-root factor `L` with `L Lᴴ = A` for a
/// Hermitian positive semi-definite `A`. Works for singular `A` where a
/// Cholesky factorization would not.
pub fn psd_factor(a: &CMatrix) -> Option<CMatrix> {
    if !is_hermitian(a) {
        return None;
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
        return None;
    }
    let mut factor = eig.eigenvectors;
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    Some(factor)
}

pub fn is_psd(a: &CMatrix) -> bool {
    psd_factor(a).is_some()
}

/// Solves `A x = b` for Hermitian positive definite `A`.
pub fn hpd_solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let chol = a.clone().cholesky().ok_or(Error::Singular)?;
    Ok(chol.solve(b))
}

/// `bᴴ A⁻¹ b` for Hermitian positive definite `A`.
pub fn hpd_quadratic_form(a: &CMatrix, b: &CVector) -> Result<f64> {
    let x = hpd_solve(a, b)?;
    Ok(b.dotc(&x).re)
}

/// Draws a vector of i.i.d. `CN(0, 1)` entries.
pub fn standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}
