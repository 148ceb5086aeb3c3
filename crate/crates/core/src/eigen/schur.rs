use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hessenberg::reduce_in_place;
use crate::{DenseOperator, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Stalled iterations before an exceptional shift.
const EXCEPTIONAL_SHIFT_PERIOD: usize = 10;
/// Sweep budget per matrix dimension.
const SWEEPS_PER_DIM: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Diagonal balancing before the reduction.
    pub balance: bool,
    /// Compute eigenvectors and the true residual `‖Av − λv‖/‖A‖`.
    pub vectors: bool,
    /// Residual above which `EigenReport::residual_ok` is false.
    pub tolerance: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            balance: false,
            vectors: false,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    /// In Schur-diagonal order.
    pub values: Vec<Complex64>,
    /// Residual of the eigenpairs when vectors were computed, otherwise the
    /// largest subdiagonal entry discarded during deflation, relative to ‖A‖_F.
    pub max_residual: f64,
    pub iterations: usize,
    pub residual_ok: bool,
    /// Column `k` is the unit eigenvector of `values[k]`.
    #[serde(skip)]
    pub vectors: Option<DenseOperator>,
}

/// Complex Givens rotation `G = [[c, s], [−s̄, c]]` with `G·(f, g)ᵀ = (r, 0)ᵀ`.
#[inline]
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, ZERO, f);
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn, Complex64::new(gn, 0.0));
    }
    let r = fn_.hypot(gn);
    let phase = f / fn_;
    (fn_ / r, phase * g.conj() / r, phase * r)
}

/// Eigenvalue of the 2×2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let s = a.l1_norm() + b.l1_norm() + c.l1_norm() + d.l1_norm();
    if s == 0.0 {
        return ZERO;
    }
    let (a, b, c, d) = (a / s, b / s, c / s, d / s);
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1 * s
    } else {
        l2 * s
    }
}

struct QrOutcome {
    values: Vec<Complex64>,
    iterations: usize,
    max_neglected: f64,
}

/// Single-shift complex QR on an upper Hessenberg matrix.
///
/// With `want_t` the full matrix is updated so that it ends in Schur form,
/// and `z` (if present) accumulates the rotations. Otherwise only the active
/// window is touched, which is enough for eigenvalues.
fn hessenberg_qr(
    h: &mut [Complex64],
    n: usize,
    want_t: bool,
    mut z: Option<&mut [Complex64]>,
) -> Result<QrOutcome> {
    let mut values = vec![ZERO; n];
    if n == 0 {
        return Ok(QrOutcome {
            values,
            iterations: 0,
            max_neglected: 0.0,
        });
    }
    let eps = f64::EPSILON;
    let small = f64::MIN_POSITIVE / eps;
    let max_sweeps = SWEEPS_PER_DIM * n.max(1);
    let mut total = 0usize;
    let mut stalled = 0usize;
    let mut max_neglected: f64 = 0.0;
    let mut found = vec![false; n];
    let mut hi = n - 1;

    loop {
        // locate the start of the active block
        let mut lo = 0;
        for i in (1..=hi).rev() {
            let sub = h[i * n + i - 1].norm();
            let mut tst = h[(i - 1) * n + i - 1].norm() + h[i * n + i].norm();
            if tst == 0.0 {
                if i >= 2 {
                    tst += h[(i - 1) * n + i - 2].norm();
                }
                if i < hi {
                    tst += h[(i + 1) * n + i].norm();
                }
            }
            if sub <= eps * tst || sub < small {
                max_neglected = max_neglected.max(sub);
                h[i * n + i - 1] = ZERO;
                lo = i;
                break;
            }
        }

        if lo == hi {
            values[hi] = h[hi * n + hi];
            found[hi] = true;
            stalled = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }

        total += 1;
        stalled += 1;
        if total > max_sweeps {
            let partial = (0..n).filter(|&i| found[i]).map(|i| values[i]).collect();
            return Err(Error::NoConvergence {
                sweeps: total - 1,
                dim: n,
                partial,
            });
        }

        let shift = if stalled.is_multiple_of(EXCEPTIONAL_SHIFT_PERIOD) {
            let s = h[hi * n + hi - 1].norm()
                + if hi >= lo + 2 {
                    h[(hi - 1) * n + hi - 2].norm()
                } else {
                    0.0
                };
            h[hi * n + hi] + Complex64::new(0.75 * s, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1) * n + hi - 1],
                h[(hi - 1) * n + hi],
                h[hi * n + hi - 1],
                h[hi * n + hi],
            )
        };

        let col_end = if want_t { n } else { hi + 1 };
        let row_start = if want_t { 0 } else { lo };
        for k in lo..hi {
            let (c, s, r) = if k == lo {
                givens(h[lo * n + lo] - shift, h[(lo + 1) * n + lo])
            } else {
                let g = givens(h[k * n + k - 1], h[(k + 1) * n + k - 1]);
                h[k * n + k - 1] = g.2;
                h[(k + 1) * n + k - 1] = ZERO;
                g
            };
            let _ = r;
            let sc = s.conj();
            // rows k, k+1 from the left
            let (top, bottom) = h.split_at_mut((k + 1) * n);
            let row_k = &mut top[k * n + k..k * n + col_end];
            let row_k1 = &mut bottom[k..col_end];
            for (x, y) in row_k.iter_mut().zip(row_k1.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a * c + s * b;
                *y = b * c - sc * a;
            }
            // columns k, k+1 from the right with G†
            let row_end = (k + 3).min(hi + 1);
            for r in row_start..row_end {
                let base = r * n + k;
                let (a, b) = (h[base], h[base + 1]);
                h[base] = a * c + b * sc;
                h[base + 1] = b * c - a * s;
            }
            if let Some(z) = z.as_deref_mut() {
                for r in 0..n {
                    let base = r * n + k;
                    let (a, b) = (z[base], z[base + 1]);
                    z[base] = a * c + b * sc;
                    z[base + 1] = b * c - a * s;
                }
            }
        }
    }

    Ok(QrOutcome {
        values,
        iterations: total,
        max_neglected,
    })
}

/// Diagonal similarity `D⁻¹ A D` (powers of two) equalizing row and column
/// norms. Returns the scaling `D`.
pub(crate) fn balance_in_place(a: &mut [Complex64], n: usize) -> Vec<f64> {
    let mut d = vec![1.0; n];
    let radix = 2.0f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].l1_norm();
                    r += a[i * n + j].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let rr = r;
            while cc < rr / radix {
                cc *= radix * radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix * radix;
                f /= radix;
            }
            let cc2 = c * f;
            let rr2 = r / f;
            if (cc2 + rr2) < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    a[i * n + j] /= f;
                    a[j * n + i] *= f;
                }
            }
        }
    }
    d
}

/// Complex Schur decomposition `A = Z T Z†`, `T` upper triangular.
pub fn schur(a: &DenseOperator) -> Result<(DenseOperator, DenseOperator)> {
    let n = a.dim();
    let mut t = a.clone();
    let mut z = DenseOperator::zeros(n);
    reduce_in_place(t.as_mut_slice(), n, Some(z.as_mut_slice()));
    hessenberg_qr(t.as_mut_slice(), n, true, Some(z.as_mut_slice()))?;
    // clear the rounding residue below the diagonal
    for j in 1..n {
        for k in 0..j {
            t[(j, k)] = ZERO;
        }
    }
    Ok((t, z))
}

/// Eigenvectors of an upper triangular matrix by back substitution,
/// returned as the columns of a matrix (unnormalized).
fn triangular_eigenvectors(t: &DenseOperator) -> DenseOperator {
    let n = t.dim();
    let tiny = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut y = DenseOperator::zeros(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let s: Complex64 = (j + 1..=k).map(|l| t[(j, l)] * y[(l, k)]).sum();
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < tiny {
                denom = Complex64::new(tiny, 0.0);
            }
            y[(j, k)] = -s / denom;
        }
    }
    y
}

/// All eigenvalues of a square matrix, counted with algebraic multiplicity.
pub fn eigenvalues(a: &DenseOperator) -> Result<EigenReport> {
    eigenvalues_with(a, EigenOptions::default())
}

pub fn eigenvalues_with(a: &DenseOperator, opts: EigenOptions) -> Result<EigenReport> {
    if !a.is_finite() {
        return Err(Error::arg("matrix has non-finite entries"));
    }
    let n = a.dim();
    let scale = a.frobenius_norm();
    let mut work = a.clone();
    let d = if opts.balance {
        balance_in_place(work.as_mut_slice(), n)
    } else {
        vec![1.0; n]
    };

    if !opts.vectors {
        reduce_in_place(work.as_mut_slice(), n, None);
        let out = hessenberg_qr(work.as_mut_slice(), n, false, None)?;
        let max_residual = if scale == 0.0 {
            0.0
        } else {
            out.max_neglected / scale
        };
        return Ok(EigenReport {
            values: out.values,
            max_residual,
            iterations: out.iterations,
            residual_ok: max_residual <= opts.tolerance,
            vectors: None,
        });
    }

    let mut z = DenseOperator::zeros(n);
    reduce_in_place(work.as_mut_slice(), n, Some(z.as_mut_slice()));
    let out = hessenberg_qr(work.as_mut_slice(), n, true, Some(z.as_mut_slice()))?;
    for j in 1..n {
        for k in 0..j {
            work[(j, k)] = ZERO;
        }
    }
    let y = triangular_eigenvectors(&work);
    let mut v = z.matmul(&y);
    // undo balancing and normalize columns
    for k in 0..n {
        let mut norm2 = 0.0;
        for j in 0..n {
            v[(j, k)] *= d[j];
            norm2 += v[(j, k)].norm_sqr();
        }
        let inv = 1.0 / norm2.sqrt().max(f64::MIN_POSITIVE);
        for j in 0..n {
            v[(j, k)] *= inv;
        }
    }
    let av = a.matmul(&v);
    let mut max_residual: f64 = 0.0;
    for k in 0..n {
        let lambda = out.values[k];
        let r: f64 = (0..n)
            .map(|j| (av[(j, k)] - lambda * v[(j, k)]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(r);
    }
    if scale > 0.0 {
        max_residual /= scale;
    }
    Ok(EigenReport {
        values: out.values,
        max_residual,
        iterations: out.iterations,
        residual_ok: max_residual <= opts.tolerance,
        vectors: Some(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::lu::determinant;
    use crate::operator::test_util::*;
    use std::f64::consts::PI;

    /// Greedy one-to-one matching distance between two multisets.
    fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        let mut used = vec![false; b.len()];
        let mut worst: f64 = 0.0;
        for x in a {
            let (idx, d) = b
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, y)| (i, (x - y).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            used[idx] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn diagonal_input() {
        let vals = [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)];
        let r = eigenvalues(&DenseOperator::from_diagonal(&vals)).unwrap();
        assert!(multiset_distance(&r.values, &vals) < 1e-12);
    }

    #[test]
    fn companion_of_z2_minus_1() {
        let a = DenseOperator::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        let r = eigenvalues(&a).unwrap();
        assert!(multiset_distance(&r.values, &[c(1.0, 0.0), c(-1.0, 0.0)]) < 1e-12);
    }

    #[test]
    fn perturbed_jordan_block() {
        let n = 8;
        let eps = 1e-8;
        let mut j = DenseOperator::zeros(n);
        for i in 0..n - 1 {
            j[(i, i + 1)] = ONE;
        }
        j[(n - 1, 0)] = c(eps, 0.0);
        let r = eigenvalues(&j).unwrap();
        let mut angles: Vec<f64> = r.values.iter().map(|z| z.arg().rem_euclid(2.0 * PI)).collect();
        for z in &r.values {
            assert!((z.norm() - 0.1).abs() < 1e-6, "{z}");
        }
        angles.sort_by(f64::total_cmp);
        for w in angles.windows(2) {
            assert!((w[1] - w[0] - 2.0 * PI / 8.0).abs() < 1e-6);
        }
    }

    #[test]
    fn vectors_and_residual() {
        let a = random_matrix(12, 21);
        let r = eigenvalues_with(&a, EigenOptions { vectors: true, ..Default::default() }).unwrap();
        assert!(r.max_residual < 1e-12, "{}", r.max_residual);
        assert!(r.residual_ok);
        let v = r.vectors.unwrap();
        assert_eq!(v.dim(), 12);
    }

    #[test]
    fn balancing_keeps_eigenvalues() {
        let mut a = random_matrix(10, 4);
        for k in 0..10 {
            a[(0, k)] *= 1e6;
            a[(k, 0)] *= 1e-6;
        }
        let plain = eigenvalues(&a).unwrap();
        let bal = eigenvalues_with(&a, EigenOptions { balance: true, vectors: true, ..Default::default() }).unwrap();
        let scale = plain.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(multiset_distance(&plain.values, &bal.values) < 1e-9 * scale);
        assert!(bal.max_residual < 1e-10);
    }

    #[test]
    fn schur_form() {
        let a = random_matrix(9, 31);
        let (t, z) = schur(&a).unwrap();
        assert!(z.matmul(&t).matmul(&z.adjoint()).sub(&a).frobenius_norm() < 1e-12 * a.frobenius_norm());
        for j in 1..9 {
            for k in 0..j {
                assert_eq!(t[(j, k)], ZERO);
            }
        }
    }

    #[test]
    fn unitary_moduli() {
        let (_, q) = crate::eigen::hessenberg_reduce(&random_matrix(24, 5));
        let r = eigenvalues(&q).unwrap();
        for z in r.values {
            assert!((z.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn similarity_invariance() {
        for (n, seed) in [(6, 1u64), (16, 2), (32, 3)] {
            let a = random_matrix(n, seed);
            let (_, q) = crate::eigen::hessenberg_reduce(&random_matrix(n, seed + 100));
            let b = q.matmul(&a).matmul(&q.adjoint());
            let ea = eigenvalues(&a).unwrap().values;
            let eb = eigenvalues(&b).unwrap().values;
            assert!(multiset_distance(&ea, &eb) < 1e-9, "n={n}");
        }
    }

    #[test]
    fn trace_and_determinant() {
        for (n, seed) in [(5, 7u64), (20, 8), (64, 9)] {
            let a = random_matrix(n, seed);
            let e = eigenvalues(&a).unwrap().values;
            let sum: Complex64 = e.iter().sum();
            let prod: Complex64 = e.iter().product();
            let det = determinant(&a);
            let scale = a.frobenius_norm();
            assert!((sum - a.trace()).norm() < 1e-8 * scale);
            assert!((prod - det).norm() < 1e-8 * det.norm().max(1e-300), "n={n}");
        }
    }

    #[test]
    fn weyl_product_bound() {
        for (n, seed) in [(8, 41u64), (24, 42)] {
            let a = random_matrix(n, seed);
            let mut moduli: Vec<f64> = eigenvalues(&a).unwrap().values.iter().map(|z| z.norm()).collect();
            moduli.sort_by(|x, y| y.total_cmp(x));
            let sv = crate::eigen::singular_values(&a).unwrap();
            let (mut pl, mut ps) = (1.0, 1.0);
            for k in 0..n {
                pl *= moduli[k];
                ps *= sv[k];
                assert!(pl <= ps + 1e-9);
            }
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut a = DenseOperator::identity(3);
        a[(1, 2)] = c(f64::NAN, 0.0);
        assert!(eigenvalues(&a).is_err());
    }

    #[test]
    fn empty_and_scalar() {
        assert!(eigenvalues(&DenseOperator::zeros(0)).unwrap().values.is_empty());
        let r = eigenvalues(&DenseOperator::from_diagonal(&[c(0.3, 0.4)])).unwrap();
        assert_eq!(r.values, vec![c(0.3, 0.4)]);
    }
}
