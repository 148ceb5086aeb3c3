use num_complex::Complex64;

use super::hessenberg::{apply_right, householder};
use crate::{DenseOperator, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HERMITIAN_TOLERANCE: f64 = 1e-10;
const MAX_QL_ITERATIONS: usize = 60;

/// Eigen-decomposition `A = V Λ V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` belongs to `values[k]`.
    pub vectors: DenseOperator,
}

impl HermitianEigen {
    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseOperator {
        let d: Vec<Complex64> = self.values.iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
        self.vectors.scale_cols(&d).matmul(&self.vectors.adjoint())
    }
}

fn check_hermitian(a: &DenseOperator) -> Result<()> {
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Householder tridiagonalization of a Hermitian matrix, using only the
/// lower triangle. Returns the real diagonal and the complex subdiagonal; `q`
/// receives `Q` with `A = Q T Q†` when given.
fn tridiagonalize(
    a: &mut [Complex64],
    n: usize,
    mut q: Option<&mut [Complex64]>,
) -> (Vec<f64>, Vec<Complex64>) {
    if let Some(q) = q.as_deref_mut() {
        q.fill(ZERO);
        for i in 0..n {
            q[i * n + i] = Complex64::new(1.0, 0.0);
        }
    }
    // symmetrize from the lower triangle so both halves agree exactly
    for j in 0..n {
        a[j * n + j] = Complex64::new(a[j * n + j].re, 0.0);
        for k in 0..j {
            a[k * n + j] = a[j * n + k].conj();
        }
    }
    let mut sub = vec![ZERO; n.saturating_sub(1)];
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let v = &mut v[..len];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = a[(k + 1 + i) * n + k];
        }
        let Some((beta, alpha)) = householder(v) else {
            sub[k] = a[(k + 1) * n + k];
            continue;
        };
        sub[k] = alpha;
        // p = β A₂₂ v over the trailing block
        let p = &mut p[..len];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            let s: Complex64 = row.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
            *pi = s * beta;
        }
        let vp: Complex64 = v.iter().zip(p.iter()).map(|(x, y)| x.conj() * y).sum();
        let kk = vp.re * beta * 0.5;
        for (pi, vi) in p.iter_mut().zip(v.iter()) {
            *pi -= vi * kk;
        }
        // A₂₂ ← A₂₂ − v w† − w v†
        for i in 0..len {
            let vi = v[i];
            let wi = p[i];
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for ((x, vj), wj) in row.iter_mut().zip(v.iter()).zip(p.iter()) {
                *x -= vi * wj.conj() + wi * vj.conj();
            }
        }
        if let Some(q) = q.as_deref_mut() {
            apply_right(q, n, 0..n, k + 1, v, beta);
        }
    }
    if n >= 2 {
        sub[n - 2] = a[(n - 1) * n + n - 2];
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    (diag, sub)
}

/// Implicit QL on a real symmetric tridiagonal matrix. `zt`, when given,
/// holds the transposed eigenvector matrix (row `i` is eigenvector `i`).
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence {
                    sweeps: iter,
                    dim: n,
                    partial: d[..l]
                        .iter()
                        .map(|&x| Complex64::new(x, 0.0))
                        .collect(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(zt) = zt.as_deref_mut() {
                    let (lo, hi) = zt.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..(i + 1) * n];
                    let zi1 = &mut hi[..n];
                    for (x, y) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *y;
                        *y = s * *x + c * f;
                        *x = c * *x - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Real tridiagonal data plus the unit phases `δ` making the complex
/// subdiagonal real: `T = D S D†` with `S` real symmetric.
fn realify(sub: &[Complex64], n: usize) -> (Vec<f64>, Vec<Complex64>) {
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for i in 0..sub.len() {
        let mag = sub[i].norm();
        e[i] = mag;
        phases[i + 1] = if mag == 0.0 {
            phases[i]
        } else {
            phases[i] * sub[i] / mag
        };
    }
    (e, phases)
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &DenseOperator) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let n = a.dim();
    let mut work = a.clone();
    let (mut d, sub) = tridiagonalize(work.as_mut_slice(), n, None);
    let (mut e, _) = realify(&sub, n);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_spectrum(a: &DenseOperator) -> Result<HermitianEigen> {
    check_hermitian(a)?;
    let n = a.dim();
    let mut work = a.clone();
    let mut q = DenseOperator::zeros(n);
    let (mut d, sub) = tridiagonalize(work.as_mut_slice(), n, Some(q.as_mut_slice()));
    let (mut e, phases) = realify(&sub, n);
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut d, &mut e, Some(&mut zt))?;

    // V = Q D W, with Wᵀ stored row-wise in zt
    let qd = q.scale_cols(&phases);
    let w = DenseOperator::from_fn(n, |j, k| Complex64::new(zt[k * n + j], 0.0));
    let v = qd.matmul(&w);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DenseOperator::from_fn(n, |j, k| v[(j, order[k])]);
    Ok(HermitianEigen { values, vectors })
}
