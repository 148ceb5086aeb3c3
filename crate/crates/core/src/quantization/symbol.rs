use std::f64::consts::PI;

use num_complex::Complex64;

use crate::classical::{DampingSymbol, TorusMap, TorusPoint};

/// A smooth biperiodic function on the torus that can be quantized.
pub trait Symbol {
    fn eval(&self, q: f64, p: f64) -> Complex64;

    /// Symbols of `q` alone quantize to diagonal matrices.
    fn is_q_only(&self) -> bool {
        false
    }

    /// Exact Fourier coefficients `(m, n, f_{m,n})`, when known in closed form.
    fn fourier_modes(&self) -> Option<Vec<(i64, i64, Complex64)>> {
        None
    }
}

impl<S: Symbol + ?Sized> Symbol for &S {
    fn eval(&self, q: f64, p: f64) -> Complex64 {
        (**self).eval(q, p)
    }
    fn is_q_only(&self) -> bool {
        (**self).is_q_only()
    }
    fn fourier_modes(&self) -> Option<Vec<(i64, i64, Complex64)>> {
        (**self).fourier_modes()
    }
}

impl Symbol for DampingSymbol {
    fn eval(&self, q: f64, p: f64) -> Complex64 {
        Complex64::new(DampingSymbol::eval(self, q, p), 0.0)
    }

    fn is_q_only(&self) -> bool {
        DampingSymbol::is_q_only(self)
    }

    fn fourier_modes(&self) -> Option<Vec<(i64, i64, Complex64)>> {
        self.real_fourier_terms()
    }
}

/// Finite sum `Σ c · e_{mn}`, `e_{mn}(q, p) = e^{2iπ(mq − np)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    pub terms: Vec<(i64, i64, Complex64)>,
}

impl FourierSeries {
    pub fn mode(m: i64, n: i64) -> Self {
        Self {
            terms: vec![(m, n, Complex64::new(1.0, 0.0))],
        }
    }
}

impl Symbol for FourierSeries {
    fn eval(&self, q: f64, p: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(m, n, c)| c * Complex64::from_polar(1.0, 2.0 * PI * (m as f64 * q - n as f64 * p)))
            .sum()
    }

    fn is_q_only(&self) -> bool {
        self.terms.iter().all(|t| t.1 == 0)
    }

    fn fourier_modes(&self) -> Option<Vec<(i64, i64, Complex64)>> {
        Some(self.terms.clone())
    }
}

/// A general symbol given by a closure in `(q, p)`.
pub struct FnSymbol<F>(pub F);

impl<F: Fn(f64, f64) -> Complex64> Symbol for FnSymbol<F> {
    fn eval(&self, q: f64, p: f64) -> Complex64 {
        (self.0)(q, p)
    }
}

/// A symbol depending on `q` only.
pub struct QSymbol<F>(pub F);

impl<F: Fn(f64) -> Complex64> Symbol for QSymbol<F> {
    fn eval(&self, q: f64, _p: f64) -> Complex64 {
        (self.0)(q)
    }

    fn is_q_only(&self) -> bool {
        true
    }
}

/// `f ∘ κ`.
pub struct Composed<'a, S: ?Sized, M: ?Sized> {
    pub symbol: &'a S,
    pub map: &'a M,
}

impl<S: Symbol + ?Sized, M: TorusMap + ?Sized> Symbol for Composed<'_, S, M> {
    fn eval(&self, q: f64, p: f64) -> Complex64 {
        let y = self.map.apply(TorusPoint::new(q, p));
        self.symbol.eval(y.q(), y.p())
    }
}

/// `g ∘ a` for a real symbol `a`; stays q-only when `a` is.
pub struct Mapped<'a, S: ?Sized, G> {
    pub symbol: &'a S,
    pub g: G,
}

impl<S: Symbol + ?Sized, G: Fn(f64) -> f64> Symbol for Mapped<'_, S, G> {
    fn eval(&self, q: f64, p: f64) -> Complex64 {
        Complex64::new((self.g)(self.symbol.eval(q, p).re), 0.0)
    }

    fn is_q_only(&self) -> bool {
        self.symbol.is_q_only()
    }
}
