use num_complex::Complex64;

use crate::{DenseOperator, Error, Result};

/// LU factorization with partial pivoting, `P A = L U` packed in one matrix.
pub struct Lu {
    lu: DenseOperator,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &DenseOperator) -> Self {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        let m = lu.as_mut_slice();
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|i| (i, m[i * n + k].norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if best == 0.0 {
                singular = true;
                continue;
            }
            if piv != k {
                for j in 0..n {
                    m.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let inv = 1.0 / m[k * n + k];
            for i in k + 1..n {
                let f = m[i * n + k] * inv;
                m[i * n + k] = f;
                if f.norm() != 0.0 {
                    for j in k + 1..n {
                        let u = m[k * n + j];
                        m[i * n + j] -= f * u;
                    }
                }
            }
        }
        Self {
            lu,
            perm,
            sign,
            singular,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        if self.singular {
            return Complex64::new(0.0, 0.0);
        }
        let diag: Complex64 = self.lu.diagonal().iter().product();
        diag * self.sign
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.singular {
            return Err(Error::Singular);
        }
        let n = self.lu.dim();
        let m = self.lu.as_slice();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = m[i * n + j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = m[i * n + j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= m[i * n + i];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<DenseOperator> {
        let n = self.lu.dim();
        let mut inv = DenseOperator::zeros(n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            e.fill(Complex64::new(0.0, 0.0));
            e[k] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e)?;
            for (j, x) in col.into_iter().enumerate() {
                inv[(j, k)] = x;
            }
        }
        Ok(inv)
    }
}

pub fn determinant(a: &DenseOperator) -> Complex64 {
    Lu::new(a).determinant()
}

pub fn inverse(a: &DenseOperator) -> Result<DenseOperator> {
    Lu::new(a).inverse()
}
