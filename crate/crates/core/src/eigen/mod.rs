//! Dense complex linear algebra: Hessenberg reduction, shifted QR for
//! non-normal spectra, Hermitian eigensolver, singular values and LU.
//!
//! Everything runs single-threaded in a fixed operation order, so repeated
//! decompositions of the same matrix are bitwise identical.

mod hermitian;
mod hessenberg;
pub mod lu;
mod schur;

pub use hermitian::{hermitian_eigenvalues, hermitian_spectrum, HermitianEigen};
pub use hessenberg::hessenberg_reduce;
pub use lu::{determinant, inverse, Lu};
pub use schur::{eigenvalues, eigenvalues_with, schur, EigenOptions, EigenReport};

use crate::{DenseOperator, Result};

/// Singular values, descending: square roots of the eigenvalues of `A†A`,
/// with negative roundoff clipped to zero.
pub fn singular_values(a: &DenseOperator) -> Result<Vec<f64>> {
    let gram = a.adjoint().matmul(a);
    let mut s: Vec<f64> = hermitian_eigenvalues(&gram)?
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    s.reverse();
    Ok(s)
}

/// Largest singular value.
pub fn operator_norm(a: &DenseOperator) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::test_util::*;
    use num_complex::Complex64;

    #[test]
    fn singular_value_examples() {
        let a = DenseOperator::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
        assert_eq!(singular_values(&a).unwrap(), vec![1.0, 0.0]);
        let d = DenseOperator::from_diagonal(&[c(3.0, 0.0), c(0.0, 4.0)]);
        let s = singular_values(&d).unwrap();
        assert!((s[0] - 4.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
        let (_, q) = hessenberg_reduce(&random_matrix(16, 2));
        for x in singular_values(&q).unwrap() {
            assert!((x - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn norm_examples() {
        assert!((operator_norm(&DenseOperator::identity(5)).unwrap() - 1.0).abs() < 1e-14);
        let (_, q) = hessenberg_reduce(&random_matrix(8, 3));
        let cq = q.scaled(c(0.3, -0.4));
        assert!((operator_norm(&cq).unwrap() - 0.5).abs() < 1e-12);
        // rank one u vᵀ
        let u = [c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 1.0)];
        let v = [c(0.3, 0.0), c(2.0, -1.0), c(1.0, 1.0)];
        let uv = DenseOperator::from_fn(3, |j, k| u[j] * v[k]);
        let nu: f64 = u.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        assert!((operator_norm(&uv).unwrap() - nu * nv).abs() < 1e-12);
    }
}
