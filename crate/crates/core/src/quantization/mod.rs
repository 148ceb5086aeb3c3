//! Quantum objects on `H_N`: Weyl translations, the quantization `Op_h`,
//! cat and kick propagators, the damped propagator `M = Op_h(a) U_h(κ)` and
//! the defect measurements comparing quantum and classical evolution.
//!
//! Boundary phases are fixed to zero. The Weyl translation convention is
//!
//! ```text
//! (T_{m,n} ψ)_j = e^{−iπmn/N} e^{2iπmj/N} ψ_{(j−n) mod N}
//! ```
//!
//! which gives `Tr T_{μ,ν} = (−1)^{μν/N} N` when `μ ≡ ν ≡ 0 (mod N)` and 0
//! otherwise, and makes `U† Op_h(f) U = Op_h(f ∘ A)` hold exactly for the
//! cat propagator below.

mod symbol;

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalMap, DampingSymbol, SymbolRange, TorusMap};
use crate::eigen::{hermitian_spectrum, inverse, operator_norm};
use crate::{DenseOperator, Error, Result};

pub use symbol::{Composed, FnSymbol, FourierSeries, Mapped, QSymbol, Symbol};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Powers `e^{iπk/N}` for `k = 0 … 2N−1`.
fn half_roots(n: usize) -> Vec<Complex64> {
    (0..2 * n)
        .map(|k| Complex64::from_polar(1.0, PI * k as f64 / n as f64))
        .collect()
}

#[inline]
fn modulo(x: i64, m: i64) -> usize {
    x.rem_euclid(m) as usize
}

/// `T_{m,n} = Op_h(e_{mn})`.
pub fn weyl_translation(dim: usize, m: i64, n: i64) -> DenseOperator {
    let roots = half_roots(dim);
    let two_n = 2 * dim as i64;
    let nn = dim as i64;
    let mut op = DenseOperator::zeros(dim);
    for j in 0..dim {
        let k = modulo(j as i64 - n, nn);
        let phase = modulo(2 * m * j as i64 - m * n, two_n);
        op[(j, k)] = roots[phase];
    }
    op
}

/// Default Fourier cutoff `⌊N/2⌋`.
pub fn default_cutoff(dim: usize) -> i64 {
    (dim / 2) as i64
}

/// Coefficients `f_{m,n}` for `|m|, |n| ≤ cutoff` from samples on a
/// `grid × grid` lattice, via a 2-D FFT. Indexed `[(n + c)·(2c+1) + (m + c)]`.
fn sampled_coefficients(f: &dyn Symbol, cutoff: usize, grid: usize) -> Vec<Complex64> {
    let g = grid;
    let mut buf: Vec<Complex64> = Vec::with_capacity(g * g);
    for a in 0..g {
        for b in 0..g {
            buf.push(f.eval(a as f64 / g as f64, b as f64 / g as f64));
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(g);
    // along p (contiguous rows)
    fft.process(&mut buf);
    // transpose, then along q
    let mut t = vec![ZERO; g * g];
    for a in 0..g {
        for b in 0..g {
            t[b * g + a] = buf[a * g + b];
        }
    }
    fft.process(&mut t);
    // t[b'·g + a'] = Σ f e^{−2iπ(a'a + b'b)/g}; f_{m,n} sits at a' = m, b' = −n
    let c = cutoff as i64;
    let width = 2 * cutoff + 1;
    let norm = 1.0 / (g * g) as f64;
    let mut out = vec![ZERO; width * width];
    for n in -c..=c {
        for m in -c..=c {
            let a = modulo(m, g as i64);
            let b = modulo(-n, g as i64);
            out[(n + c) as usize * width + (m + c) as usize] = t[b * g + a] * norm;
        }
    }
    out
}

/// `Σ c_{m,n} T_{m,n}` over the given modes, dropping `|m|` or `|n|` above
/// `cutoff`.
fn assemble(dim: usize, modes: impl Iterator<Item = (i64, i64, Complex64)>, cutoff: i64) -> DenseOperator {
    let roots = half_roots(dim);
    let two_n = 2 * dim as i64;
    let nn = dim as i64;
    let mut op = DenseOperator::zeros(dim);
    for (m, n, coef) in modes {
        if m.abs() > cutoff || n.abs() > cutoff || coef == ZERO {
            continue;
        }
        let base = modulo(-m * n, two_n) as i64;
        let step = modulo(2 * m, two_n) as i64;
        let mut phase = base;
        for j in 0..dim {
            let k = modulo(j as i64 - n, nn);
            op[(j, k)] += coef * roots[phase as usize];
            phase += step;
            if phase >= two_n {
                phase -= two_n;
            }
        }
    }
    op
}

/// `Op_h(f)`: diagonal `f(j/N)` for q-only symbols, otherwise the Fourier sum
/// truncated at `|m|, |n| ≤ cutoff`. Coefficients come from the symbol when
/// known exactly, else from sampling on a `4·max(N, cutoff)` grid per axis.
pub fn quantize_symbol(dim: usize, f: &dyn Symbol, cutoff: i64) -> Result<DenseOperator> {
    if cutoff < 0 {
        return Err(Error::arg(format!("Fourier cutoff must be nonnegative, got {cutoff}")));
    }
    if f.is_q_only() {
        let diag: Vec<Complex64> = (0..dim).map(|j| f.eval(j as f64 / dim as f64, 0.0)).collect();
        return Ok(DenseOperator::from_diagonal(&diag));
    }
    if let Some(modes) = f.fourier_modes() {
        return Ok(assemble(dim, modes.into_iter(), cutoff));
    }
    let c = cutoff as usize;
    let grid = 4 * dim.max(c).max(1);
    let coefs = sampled_coefficients(f, c, grid);
    let width = 2 * c + 1;
    let modes = coefs.into_iter().enumerate().map(|(idx, coef)| {
        let n = (idx / width) as i64 - cutoff;
        let m = (idx % width) as i64 - cutoff;
        (m, n, coef)
    });
    Ok(assemble(dim, modes, cutoff))
}

/// `quantize_symbol` with the default cutoff.
pub fn quantize(dim: usize, f: &dyn Symbol) -> DenseOperator {
    quantize_symbol(dim, f, default_cutoff(dim)).expect("default cutoff is nonnegative")
}

/// `U_h(A)_{jk} = √h · exp(2iπh[mk² − kj + mj²])` for the cat matrix.
pub fn cat_propagator(dim: usize, m: u32) -> DenseOperator {
    let nn = dim as i128;
    let mm = i128::from(m);
    let roots = half_roots(dim);
    let amp = (1.0 / dim as f64).sqrt();
    DenseOperator::from_fn(dim, |j, k| {
        let (j, k) = (j as i128, k as i128);
        let e = (mm * k * k - k * j + mm * j * j).rem_euclid(nn);
        roots[2 * e as usize] * amp
    })
}

/// Diagonal of `exp(−(2iπ/h) Op_h(H))` for `H = (α/4π²) sin(2πq)`.
pub fn kick_phases(dim: usize, alpha: f64) -> Vec<Complex64> {
    let n = dim as f64;
    (0..dim)
        .map(|j| {
            let h_val = alpha / (4.0 * PI * PI) * (2.0 * PI * j as f64 / n).sin();
            Complex64::from_polar(1.0, -2.0 * PI * n * h_val)
        })
        .collect()
}

pub fn kick_propagator(dim: usize, alpha: f64) -> DenseOperator {
    DenseOperator::from_diagonal(&kick_phases(dim, alpha))
}

/// Unitary quantization of `κ = e^{X_H} ∘ κ_A`: kick after cat.
pub fn unitary_propagator(dim: usize, map: &ClassicalMap) -> DenseOperator {
    cat_propagator(dim, map.m()).scale_rows(&kick_phases(dim, map.alpha()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSpec {
    pub map: ClassicalMap,
    pub damping: DampingSymbol,
    pub dim: usize,
}

impl PropagatorSpec {
    pub fn new(map: ClassicalMap, damping: DampingSymbol, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::arg(format!("N must be at least 2, got {dim}")));
        }
        if map.m() == 0 {
            return Err(Error::arg("propagators need a cat map (m ≥ 1)"));
        }
        Ok(Self { map, damping, dim })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.dim as f64
    }

    /// Damping values `a(j/N)` on the position grid (q-only symbols).
    pub fn grid_damping(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| self.damping.eval_q(j as f64 / self.dim as f64))
            .collect()
    }

    /// `[min_j a(j/N), max_j a(j/N)]` for q-only damping, else the symbol range.
    pub fn grid_range(&self) -> SymbolRange {
        if self.damping.is_q_only() {
            let g = self.grid_damping();
            SymbolRange {
                a_minus: g.iter().copied().fold(f64::INFINITY, f64::min),
                a_plus: g.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        } else {
            self.damping.range()
        }
    }

    fn check_invertible(&self) -> Result<SymbolRange> {
        let range = self.damping.range();
        if !(range.a_minus > 0.0) {
            return Err(Error::NonInvertibleDamping {
                a_minus: range.a_minus,
            });
        }
        Ok(range)
    }
}

/// `M_h(a, κ) = Op_h(a) · U_h(κ)`.
pub fn damped_propagator(spec: &PropagatorSpec) -> Result<DenseOperator> {
    spec.check_invertible()?;
    let u = unitary_propagator(spec.dim, &spec.map);
    if spec.damping.is_q_only() {
        let d: Vec<Complex64> = spec
            .grid_damping()
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        Ok(u.scale_rows(&d))
    } else {
        Ok(quantize(spec.dim, &spec.damping).matmul(&u))
    }
}

/// `M⁻¹ = U⁻¹ Op_h(a)⁻¹`.
pub fn inverse_propagator(spec: &PropagatorSpec) -> Result<DenseOperator> {
    spec.check_invertible()?;
    if spec.damping.is_q_only() {
        let u_adj = unitary_propagator(spec.dim, &spec.map).adjoint();
        let inv: Vec<Complex64> = spec
            .grid_damping()
            .into_iter()
            .map(|x| {
                if x == 0.0 {
                    Err(Error::Singular)
                } else {
                    Ok(Complex64::new(1.0 / x, 0.0))
                }
            })
            .collect::<Result<_>>()?;
        Ok(u_adj.scale_cols(&inv))
    } else {
        inverse(&damped_propagator(spec)?)
    }
}

/// `h · Tr A`.
pub fn normalized_trace(a: &DenseOperator) -> Complex64 {
    a.trace() / a.dim() as f64
}

/// `‖U⁻¹ Op_h(f) U − Op_h(f ∘ κ)‖`, with `f ∘ κ` re-expanded from samples.
pub fn egorov_defect(
    dim: usize,
    f: &dyn Symbol,
    u: &DenseOperator,
    map: &dyn TorusMap,
) -> Result<f64> {
    let evolved = u.adjoint().matmul(&quantize(dim, f)).matmul(u);
    let composed = Composed { symbol: f, map };
    // force the sampled path: the composition has no closed-form modes
    let transported = quantize_symbol(dim, &composed, default_cutoff(dim))?;
    operator_norm(&evolved.sub(&transported))
}

/// `‖g(Op_h(a)) − Op_h(g ∘ a)‖` for a real symbol `a`, with the left side
/// computed through the Hermitian eigendecomposition.
pub fn functional_calculus_defect(
    dim: usize,
    a: &dyn Symbol,
    g: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let op = quantize(dim, a);
    let lhs = hermitian_spectrum(&op)?.map(g);
    let rhs = quantize(dim, &Mapped { symbol: a, g });
    operator_norm(&lhs.sub(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{FourierTerm, LinearMap};
    use crate::eigen::{hermitian_eigenvalues, singular_values};
    use crate::operator::test_util::c;
    use proptest::prelude::*;

    #[test]
    fn translation_basics() {
        assert_eq!(weyl_translation(5, 0, 0), DenseOperator::identity(5));
        assert!(weyl_translation(4, 1, 0).trace().norm() < 1e-15);
        assert!((weyl_translation(2, 2, 2).trace() - c(2.0, 0.0)).norm() < 1e-15);
    }

    fn expected_trace(dim: i64, mu: i64, nu: i64) -> Complex64 {
        if mu.rem_euclid(dim) == 0 && nu.rem_euclid(dim) == 0 {
            let sign = if ((mu / dim) * (nu / dim) * dim).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            c(sign * dim as f64, 0.0)
        } else {
            c(0.0, 0.0)
        }
    }

    #[test]
    fn trace_identity_all_indices() {
        for dim in 2..=5i64 {
            for mu in -2 * dim..=2 * dim {
                for nu in -2 * dim..=2 * dim {
                    let tr = weyl_translation(dim as usize, mu, nu).trace();
                    assert!((tr - expected_trace(dim, mu, nu)).norm() < 1e-12, "N={dim} ({mu},{nu})");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn composition_is_projective(dim in 3usize..=5, m1 in -3i64..=3, n1 in -3i64..=3, m2 in -3i64..=3, n2 in -3i64..=3) {
            let prod = weyl_translation(dim, m1, n1).matmul(&weyl_translation(dim, m2, n2));
            let sum = weyl_translation(dim, m1 + m2, n1 + n2);
            // prod = phase · sum: compare against the first nonzero entry
            let (j, k) = (0, (dim as i64 - (n1 + n2)).rem_euclid(dim as i64) as usize);
            let phase = prod[(j, k)] / sum[(j, k)];
            prop_assert!((phase.norm() - 1.0).abs() < 1e-12);
            prop_assert!(prod.sub(&sum.scaled(phase)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn quantize_examples() {
        let one = QSymbol(|_q: f64| c(1.0, 0.0));
        assert_eq!(quantize(6, &one), DenseOperator::identity(6));
        let a2 = quantize(4, &DampingSymbol::A2);
        let want = [1.0, 0.5, 1.0, 0.5];
        for (j, w) in want.iter().enumerate() {
            assert!((a2[(j, j)] - c(*w, 0.0)).norm() < 1e-15);
        }
        let mode = quantize(8, &FourierSeries::mode(1, 0));
        assert!(mode.sub(&weyl_translation(8, 1, 0)).max_abs() < 1e-15);
        let mode = quantize(8, &FourierSeries::mode(2, -3));
        assert!(mode.sub(&weyl_translation(8, 2, -3)).max_abs() < 1e-15);
        assert!(quantize_symbol(8, &one, -1).is_err());
    }

    #[test]
    fn sampled_path_matches_exact_modes() {
        let series = FourierSeries {
            terms: vec![(1, 2, c(0.3, 0.1)), (-2, 1, c(0.0, -0.2)), (0, 0, c(0.5, 0.0))],
        };
        let exact = quantize(16, &series);
        let sampled = quantize(16, &FnSymbol(|q, p| series.eval(q, p)));
        assert!(exact.sub(&sampled).max_abs() < 1e-13);
    }

    #[test]
    fn real_symbols_are_hermitian() {
        let a = DampingSymbol::Fourier {
            terms: vec![
                FourierTerm { m: 0, n: 0, re: 0.7, im: 0.0 },
                FourierTerm { m: 1, n: 1, re: 0.1, im: 0.05 },
                FourierTerm { m: 0, n: 2, re: 0.05, im: 0.0 },
            ],
        };
        let op = quantize(32, &a);
        assert!(op.hermitian_defect() < 1e-12);
        let sampled = quantize(32, &FnSymbol(|q, p| c(a.eval(q, p), 0.0)));
        assert!(sampled.hermitian_defect() < 1e-12);
        assert!(op.sub(&sampled).max_abs() < 1e-12);
    }

    #[test]
    fn cat_propagator_n2() {
        let u = cat_propagator(2, 1);
        let s = 1.0 / 2f64.sqrt();
        let want = [[s, -s], [-s, -s]];
        for j in 0..2 {
            for k in 0..2 {
                assert!((u[(j, k)] - c(want[j][k], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn propagators_are_unitary() {
        for dim in [16, 100] {
            let id = DenseOperator::identity(dim);
            let tol = 1e-10 * (dim as f64).sqrt();
            let u = cat_propagator(dim, 1);
            assert!(u.adjoint().matmul(&u).sub(&id).max_abs() < tol);
            let k = kick_propagator(dim, 0.05);
            assert!(k.adjoint().matmul(&k).sub(&id).max_abs() < tol);
        }
        assert_eq!(kick_propagator(8, 0.0), DenseOperator::identity(8));
        for z in kick_phases(64, 0.05) {
            assert!((z.norm() - 1.0).abs() < 1e-14);
        }
        let k = kick_phases(4, 0.05);
        let want = Complex64::from_polar(1.0, -4.0 * 0.05 / (2.0 * PI));
        assert!((k[1] - want).norm() < 1e-15);
    }

    #[test]
    fn cat_egorov_is_exact() {
        let dim = 64;
        let u = cat_propagator(dim, 1);
        let a = LinearMap::cat(1);
        for (m, n) in [(1, 0), (0, 1), (2, -1), (-2, 2)] {
            let (m2, n2) = a.pull_back_mode(m, n);
            let lhs = u.adjoint().matmul(&weyl_translation(dim, m, n)).matmul(&u);
            assert!(lhs.sub(&weyl_translation(dim, m2, n2)).max_abs() < 1e-12, "({m},{n})");
        }
        let d = egorov_defect(dim, &FourierSeries::mode(1, 1), &u, &a).unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn egorov_identity_and_kick_trend() {
        let id = DenseOperator::identity(32);
        let d = egorov_defect(32, &FourierSeries::mode(1, 2), &id, &LinearMap::identity()).unwrap();
        assert!(d < 1e-12);
        let map = ClassicalMap::new(1, 0.05);
        let f = FourierSeries::mode(0, 1);
        let d128 = egorov_defect(128, &f, &unitary_propagator(128, &map), &map).unwrap();
        let d512 = egorov_defect(512, &f, &unitary_propagator(512, &map), &map).unwrap();
        assert!(d512 < d128, "{d512} vs {d128}");
    }

    fn a2_spec(dim: usize) -> PropagatorSpec {
        PropagatorSpec::new(ClassicalMap::new(1, 0.05), DampingSymbol::A2, dim).unwrap()
    }

    #[test]
    fn damped_propagator_norms() {
        let spec = PropagatorSpec::new(ClassicalMap::new(1, 0.05), DampingSymbol::constant(1.0), 32).unwrap();
        let m = damped_propagator(&spec).unwrap();
        for s in singular_values(&m).unwrap() {
            assert!((s - 1.0).abs() < 1e-10);
        }
        let spec = a2_spec(64);
        let m = damped_propagator(&spec).unwrap();
        let top = singular_values(&m).unwrap()[0];
        assert!(top <= spec.grid_range().a_plus + 1e-10);
        let bad = PropagatorSpec::new(ClassicalMap::new(1, 0.05), DampingSymbol::constant(0.0), 8).unwrap();
        assert!(matches!(damped_propagator(&bad), Err(Error::NonInvertibleDamping { .. })));
        assert!(PropagatorSpec::new(ClassicalMap::new(1, 0.05), DampingSymbol::A2, 1).is_err());
    }

    #[test]
    fn inverse_propagator_examples() {
        let spec = a2_spec(64);
        let m = damped_propagator(&spec).unwrap();
        let inv = inverse_propagator(&spec).unwrap();
        assert!(m.matmul(&inv).sub(&DenseOperator::identity(64)).max_abs() < 1e-10);
        let bound = 1.0 / spec.grid_range().a_minus;
        assert!(operator_norm(&inv).unwrap() <= bound + 1e-10);

        let cspec = PropagatorSpec::new(ClassicalMap::new(1, 0.05), DampingSymbol::constant(0.4), 16).unwrap();
        let u = unitary_propagator(16, &cspec.map);
        let want = u.adjoint().scaled(c(1.0 / 0.4, 0.0));
        assert!(inverse_propagator(&cspec).unwrap().sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn general_damping_inverse() {
        let a = DampingSymbol::Fourier {
            terms: vec![
                FourierTerm { m: 0, n: 0, re: 0.75, im: 0.0 },
                FourierTerm { m: 1, n: 1, re: 0.1, im: 0.0 },
            ],
        };
        let spec = PropagatorSpec::new(ClassicalMap::new(1, 0.05), a, 24).unwrap();
        let m = damped_propagator(&spec).unwrap();
        let inv = inverse_propagator(&spec).unwrap();
        assert!(m.matmul(&inv).sub(&DenseOperator::identity(24)).max_abs() < 1e-10);
    }

    #[test]
    fn normalized_trace_examples() {
        assert!((normalized_trace(&DenseOperator::identity(7)) - c(1.0, 0.0)).norm() < 1e-15);
        for dim in 3..=40 {
            let t = normalized_trace(&quantize(dim, &DampingSymbol::A2));
            assert!((t - c(0.75, 0.0)).norm() < 1e-14, "N={dim}");
        }
        assert!(normalized_trace(&weyl_translation(4, 1, 0)).norm() < 1e-15);
    }

    #[test]
    fn functional_calculus_examples() {
        let id = |x: f64| x;
        assert!(functional_calculus_defect(32, &DampingSymbol::A2, &id).unwrap() < 1e-12);
        assert!(functional_calculus_defect(32, &DampingSymbol::constant(0.3), &f64::exp).unwrap() < 1e-12);
        assert!(functional_calculus_defect(32, &DampingSymbol::A2, &f64::exp).unwrap() < 1e-12);
        // modes along q and p do not commute
        let a = DampingSymbol::Fourier {
            terms: vec![
                FourierTerm { m: 0, n: 0, re: 0.7, im: 0.0 },
                FourierTerm { m: 1, n: 0, re: 0.1, im: 0.0 },
                FourierTerm { m: 0, n: 1, re: 0.1, im: 0.0 },
            ],
        };
        let d16 = functional_calculus_defect(16, &a, &f64::exp).unwrap();
        let d32 = functional_calculus_defect(32, &a, &f64::exp).unwrap();
        let d64 = functional_calculus_defect(64, &a, &f64::exp).unwrap();
        assert!(d32 < d16 && d64 < d32, "{d16} {d32} {d64}");
    }

    #[test]
    fn garding_bound() {
        // q-only: exact containment
        let r = DampingSymbol::A2.range();
        for dim in [64, 128, 256] {
            let vals = hermitian_eigenvalues(&quantize(dim, &DampingSymbol::A2)).unwrap();
            assert!(vals[0] >= r.a_minus - 1e-14 && vals[dim - 1] <= r.a_plus + 1e-14);
        }
        // a(q, p) = 0.7 + 0.15 cos(2π(q − p)) + 0.05 cos(4πp): |a''| ≤ 4π²(0.3 + 0.2)
        let a = DampingSymbol::Fourier {
            terms: vec![
                FourierTerm { m: 0, n: 0, re: 0.7, im: 0.0 },
                FourierTerm { m: 1, n: 1, re: 0.15, im: 0.0 },
                FourierTerm { m: 0, n: 2, re: 0.05, im: 0.0 },
            ],
        };
        let r = a.range();
        let c2 = 10.0 * 4.0 * PI * PI * 0.5;
        for dim in [64, 128, 256] {
            let h = 1.0 / dim as f64;
            let vals = hermitian_eigenvalues(&quantize(dim, &a)).unwrap();
            assert!(vals[0] >= r.a_minus - c2 * h && vals[dim - 1] <= r.a_plus + c2 * h);
        }
    }
}
