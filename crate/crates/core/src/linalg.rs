//! Small dense complex helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

/// Largest tolerated imaginary part of a trace that must be real.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Factor a Hermitian positive-definite matrix.
pub fn hpd_factor(p: CMat) -> Result<Cholesky<Complex64, Dyn>> {
    if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite entry in covariance".into()));
    }
    let chol = p
        .cholesky()
        .ok_or_else(|| Error::Numeric("covariance is not positive definite".into()))?;
    // complex square roots never fail, so a negative pivot shows up as an
    // imaginary diagonal entry in the factor
    let ok = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|d| d.re > 0.0 && d.im.abs() <= 1e-12 * d.re);
    if ok {
        Ok(chol)
    } else {
        Err(Error::Numeric("covariance is not positive definite".into()))
    }
}

/// `tr(A^H B)` without forming the product.
pub fn inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Returns the real part of `z` after checking the imaginary residue.
///
/// The residue bound scales with `max(1, |z|)` so that large traces at high
/// SNR are judged on relative round-off.
pub fn real_part(z: Complex64, what: &str) -> Result<f64> {
    let bound = IMAG_RESIDUE_TOL * z.norm().max(1.0);
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Numeric(format!("{what}: non-finite trace")));
    }
    if z.im.abs() > bound {
        return Err(Error::Numeric(format!(
            "{what}: imaginary residue {:e} exceeds {:e}",
            z.im, bound
        )));
    }
    Ok(z.re)
}

/// Induced 1-norm: maximum absolute column sum.
pub fn norm1(m: &CMat) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frob2(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max_hermitian(m: &CMat) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn lambda_min_hermitian(m: &CMat) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Dense Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm1_is_max_column_sum() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, -2.0),
                Complex64::new(-3.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        assert_eq!(norm1(&m), 4.0);
    }

    #[test]
    fn real_part_rejects_imaginary_residue() {
        assert!(real_part(Complex64::new(1.0, 1e-6), "x").is_err());
        assert_eq!(real_part(Complex64::new(2.0, 1e-14), "x").unwrap(), 2.0);
    }

    #[test]
    fn non_pd_factor_fails() {
        let m = CMat::from_diagonal_element(2, 2, Complex64::new(-1.0, 0.0));
        assert!(hpd_factor(m).is_err());
    }
}
