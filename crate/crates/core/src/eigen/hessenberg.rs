use num_complex::Complex64;

use crate::DenseOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Householder vector `v` (with `β = 2/‖v‖²`) mapping `x` to `alpha·e₁`.
/// Returns `None` when `x` already has that shape.
pub(crate) fn householder(x: &mut [Complex64]) -> Option<(f64, Complex64)> {
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if tail == 0.0 {
        return None;
    }
    let xnorm = (x[0].norm_sqr() + tail).sqrt();
    let phase = if x[0] == ZERO {
        Complex64::new(1.0, 0.0)
    } else {
        x[0] / x[0].norm()
    };
    let alpha = -phase * xnorm;
    x[0] -= alpha;
    let vnorm2 = x[0].norm_sqr() + tail;
    Some((2.0 / vnorm2, alpha))
}

/// `rows[r][offset..] ← rows[r][offset..] · (I − β v v†)` for every row.
pub(crate) fn apply_right(
    data: &mut [Complex64],
    n: usize,
    rows: std::ops::Range<usize>,
    offset: usize,
    v: &[Complex64],
    beta: f64,
) {
    for r in rows {
        let row = &mut data[r * n + offset..r * n + offset + v.len()];
        let s: Complex64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
        let s = s * beta;
        for (a, b) in row.iter_mut().zip(v) {
            *a -= s * b.conj();
        }
    }
}

/// Reduce `data` (row-major `n × n`) to upper Hessenberg form in place by
/// unitary similarity. When `q` is given it is overwritten with the
/// accumulated unitary `Q` such that `A = Q H Q†`.
pub(crate) fn reduce_in_place(data: &mut [Complex64], n: usize, mut q: Option<&mut [Complex64]>) {
    if let Some(q) = q.as_deref_mut() {
        q.fill(ZERO);
        for i in 0..n {
            q[i * n + i] = Complex64::new(1.0, 0.0);
        }
    }
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let v = &mut v[..len];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = data[(k + 1 + i) * n + k];
        }
        let Some((beta, alpha)) = householder(v) else {
            continue;
        };

        // left: rows k+1.., columns k+1..
        let w = &mut w[..len];
        w.fill(ZERO);
        for (i, vi) in v.iter().enumerate() {
            let vc = vi.conj();
            let row = &data[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for (wj, a) in w.iter_mut().zip(row) {
                *wj += vc * a;
            }
        }
        for (i, vi) in v.iter().enumerate() {
            let f = vi * beta;
            let row = &mut data[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for (a, wj) in row.iter_mut().zip(w.iter()) {
                *a -= f * wj;
            }
        }
        data[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            data[i * n + k] = ZERO;
        }

        // right: all rows, columns k+1..
        apply_right(data, n, 0..n, k + 1, v, beta);
        if let Some(q) = q.as_deref_mut() {
            apply_right(q, n, 0..n, k + 1, v, beta);
        }
    }
}

/// Unitary reduction to upper Hessenberg form: returns `(H, Q)` with
/// `A = Q H Q†`.
pub fn hessenberg_reduce(a: &DenseOperator) -> (DenseOperator, DenseOperator) {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = DenseOperator::zeros(n);
    reduce_in_place(h.as_mut_slice(), n, Some(q.as_mut_slice()));
    (h, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::test_util::*;

    fn check(a: &DenseOperator) {
        let (h, q) = hessenberg_reduce(a);
        let scale = a.frobenius_norm().max(1e-300);
        assert!(h.below_hessenberg() <= 1e-14 * scale);
        let id = DenseOperator::identity(a.dim());
        assert!(q.adjoint().matmul(&q).sub(&id).max_abs() < 1e-13);
        let back = q.matmul(&h).matmul(&q.adjoint());
        assert!(back.sub(a).frobenius_norm() <= 1e-12 * scale);
    }

    #[test]
    fn two_by_two_is_untouched() {
        let a = random_matrix(2, 11);
        let (h, q) = hessenberg_reduce(&a);
        assert_eq!(h, a);
        assert_eq!(q, DenseOperator::identity(2));
    }

    #[test]
    fn random_reconstruction() {
        check(&random_matrix(5, 7));
        check(&random_matrix(17, 8));
        check(&random_matrix(40, 9));
    }

    #[test]
    fn hermitian_becomes_tridiagonal() {
        let a = random_hermitian(12, 3);
        let (h, _) = hessenberg_reduce(&a);
        let n = h.dim();
        let mut above: f64 = 0.0;
        for j in 0..n {
            for k in j + 2..n {
                above = above.max(h[(j, k)].norm());
            }
        }
        assert!(above < 1e-13, "{above}");
    }

    #[test]
    fn zero_columns_are_skipped() {
        let a = DenseOperator::zeros(4);
        let (h, q) = hessenberg_reduce(&a);
        assert_eq!(h, a);
        assert_eq!(q, DenseOperator::identity(4));
    }
}
