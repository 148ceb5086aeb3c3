use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reduce a real number into `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    // x - floor(x) rounds up to 1.0 for tiny negative x
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance between two residues mod 1.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    d.min(1.0 - d)
}

/// A point of `(R/Z)²`, always stored with both coordinates in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    q: f64,
    p: f64,
}

impl TorusPoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self {
            q: wrap_unit(q),
            p: wrap_unit(p),
        }
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Sup-distance on the torus.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        circle_distance(self.q, other.q).max(circle_distance(self.p, other.p))
    }
}

/// Anything that moves points around the torus.
pub trait TorusMap {
    fn apply(&self, x: TorusPoint) -> TorusPoint;
}

impl<F: Fn(TorusPoint) -> TorusPoint> TorusMap for F {
    fn apply(&self, x: TorusPoint) -> TorusPoint {
        self(x)
    }
}

/// Linear automorphism `X -> A X mod 1` for `A ∈ SL(2, Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearMap {
    a: [[i64; 2]; 2],
}

impl LinearMap {
    pub fn new(a: [[i64; 2]; 2]) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det != 1 {
            return Err(Error::arg(format!("linear part must have det 1, got {det}")));
        }
        Ok(Self { a })
    }

    /// The cat matrix `[[2m, 1], [4m² − 1, 2m]]`.
    pub fn cat(m: u32) -> Self {
        let m = i64::from(m);
        Self {
            a: [[2 * m, 1], [4 * m * m - 1, 2 * m]],
        }
    }

    pub fn identity() -> Self {
        Self { a: [[1, 0], [0, 1]] }
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.a
    }

    pub fn trace(&self) -> i64 {
        self.a[0][0] + self.a[1][1]
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.a;
        Self {
            a: [[d, -b], [-c, a]],
        }
    }

    pub(crate) fn as_f64(&self) -> [[f64; 2]; 2] {
        let [[a, b], [c, d]] = self.a;
        [[a as f64, b as f64], [c as f64, d as f64]]
    }

    /// Pull a Fourier mode back: `e_{μν} ∘ A = e_{μ'ν'}` with
    /// `e_{μν}(q, p) = exp(2iπ(μq − νp))`.
    pub fn pull_back_mode(&self, mu: i64, nu: i64) -> (i64, i64) {
        let [[a, b], [c, d]] = self.a;
        (mu * a - nu * c, nu * d - mu * b)
    }
}

impl TorusMap for LinearMap {
    fn apply(&self, x: TorusPoint) -> TorusPoint {
        let [[a, b], [c, d]] = self.as_f64();
        TorusPoint::new(a * x.q + b * x.p, c * x.q + d * x.p)
    }
}

/// `(q, p) -> (2m q + p, (4m² − 1) q + 2m p) mod 1`.
pub fn cat_apply(m: u32, x: TorusPoint) -> TorusPoint {
    LinearMap::cat(m).apply(x)
}

/// Time-one flow of `H(q) = (α/4π²) sin(2πq)`, which integrates in closed
/// form because `H` depends on `q` only.
pub fn kick_apply(alpha: f64, x: TorusPoint) -> TorusPoint {
    TorusPoint::new(x.q, x.p - alpha / (2.0 * PI) * (2.0 * PI * x.q).cos())
}

pub(crate) fn kick_inverse(alpha: f64, x: TorusPoint) -> TorusPoint {
    TorusPoint::new(x.q, x.p + alpha / (2.0 * PI) * (2.0 * PI * x.q).cos())
}

/// Perturbed cat map `κ = e^{X_H} ∘ κ_A`: the linear step first, then the kick.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalMap {
    linear: LinearMap,
    alpha: f64,
    m: u32,
}

impl ClassicalMap {
    /// # Panics
    /// if `m == 0`.
    pub fn new(m: u32, alpha: f64) -> Self {
        assert!(m >= 1, "cat parameter must be positive");
        Self {
            linear: LinearMap::cat(m),
            alpha,
            m,
        }
    }

    /// A map with an arbitrary linear part. `m()` is 0 for these.
    pub fn with_linear(linear: LinearMap, alpha: f64) -> Self {
        Self {
            linear,
            alpha,
            m: 0,
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn linear(&self) -> LinearMap {
        self.linear
    }

    /// Below this kick strength the perturbed map is known to stay Anosov.
    pub const ANOSOV_ALPHA_BOUND: f64 = 0.33;

    pub fn is_anosov_regime(&self) -> bool {
        self.linear.trace().abs() > 2 && self.alpha.abs() < Self::ANOSOV_ALPHA_BOUND
    }

    pub fn inverse_apply(&self, x: TorusPoint) -> TorusPoint {
        self.linear.inverse().apply(kick_inverse(self.alpha, x))
    }

    /// Jacobian of the map at `x`.
    pub fn jacobian(&self, x: TorusPoint) -> [[f64; 2]; 2] {
        let y = self.linear.apply(x);
        kicked_jacobian(self.linear.as_f64(), self.alpha, y.q())
    }
}

/// `D(kick)|_{q'} · A` where `D(kick) = [[1, 0], [α sin(2πq'), 1]]`.
pub(crate) fn kicked_jacobian(a: [[f64; 2]; 2], alpha: f64, q_image: f64) -> [[f64; 2]; 2] {
    let s = alpha * (2.0 * PI * q_image).sin();
    [
        [a[0][0], a[0][1]],
        [s * a[0][0] + a[1][0], s * a[0][1] + a[1][1]],
    ]
}

impl TorusMap for ClassicalMap {
    fn apply(&self, x: TorusPoint) -> TorusPoint {
        kick_apply(self.alpha, self.linear.apply(x))
    }
}

/// `n`-fold composition; negative `n` runs the inverse map.
pub fn iterate(map: &ClassicalMap, x: TorusPoint, n: i64) -> TorusPoint {
    let mut y = x;
    if n >= 0 {
        for _ in 0..n {
            y = map.apply(y);
        }
    } else {
        for _ in 0..n.unsigned_abs() {
            y = map.inverse_apply(y);
        }
    }
    y
}
