use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Value of the a₁ outer plateau. Chosen so that `⟨a₁⟩ = √v = 1/4`.
pub const A1_OUTER_PLATEAU: f64 = 1.0 / 16.0;

const RANGE_GRID_1D: usize = 1 << 14;
const RANGE_GRID_2D: usize = 256;

/// One term `c · e^{2iπ(mq − np)}` of a biperiodic Fourier series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub m: i64,
    pub n: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl FourierTerm {
    pub fn coefficient(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Real damping symbols on the torus.
///
/// Fourier symbols evaluate to the real part of their series; the
/// quantization uses the matching Hermitian-symmetrized coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingSymbol {
    Constant {
        value: f64,
    },
    /// Smooth two-plateau profile: 1 on `[1/3, 2/3]`, `1/16` on
    /// `[0, 1/6] ∪ [5/6, 1]`, joined by cosine ramps in the exponent.
    #[serde(alias = "a1_plateau")]
    A1,
    /// `1 − ½ sin²(2πq)`.
    #[serde(alias = "a2_sine")]
    A2,
    /// Periodic piecewise-linear interpolation of samples at `q = i/len`.
    Table {
        values: Vec<f64>,
    },
    Fourier {
        terms: Vec<FourierTerm>,
    },
}

/// Observed range `[a_minus, a_plus]` of a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolRange {
    pub a_minus: f64,
    pub a_plus: f64,
}

/// Exponent of the a₁ profile: 0 on the inner plateau, 1 on the outer one.
pub(crate) fn a1_exponent(q: f64) -> f64 {
    let q = q - q.floor();
    if q <= 1.0 / 6.0 || q >= 5.0 / 6.0 {
        1.0
    } else if q < 1.0 / 3.0 {
        0.5 * (1.0 + (6.0 * PI * (q - 1.0 / 6.0)).cos())
    } else if q <= 2.0 / 3.0 {
        0.0
    } else {
        0.5 * (1.0 - (6.0 * PI * (q - 2.0 / 3.0)).cos())
    }
}

impl DampingSymbol {
    pub fn constant(value: f64) -> Self {
        DampingSymbol::Constant { value }
    }

    pub fn is_q_only(&self) -> bool {
        !matches!(self, DampingSymbol::Fourier { terms } if terms.iter().any(|t| t.n != 0))
    }

    /// Evaluate a q-only symbol. For Fourier symbols with `p` modes this
    /// evaluates at `p = 0`.
    pub fn eval_q(&self, q: f64) -> f64 {
        self.eval(q, 0.0)
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        match self {
            DampingSymbol::Constant { value } => *value,
            DampingSymbol::A1 => A1_OUTER_PLATEAU.powf(a1_exponent(q)),
            DampingSymbol::A2 => {
                let s = (2.0 * PI * q).sin();
                1.0 - 0.5 * s * s
            }
            DampingSymbol::Table { values } => {
                let len = values.len();
                let t = (q - q.floor()) * len as f64;
                let i = (t.floor() as usize).min(len - 1);
                let frac = t - i as f64;
                values[i] * (1.0 - frac) + values[(i + 1) % len] * frac
            }
            DampingSymbol::Fourier { terms } => terms
                .iter()
                .map(|t| {
                    let phase = 2.0 * PI * (t.m as f64 * q - t.n as f64 * p);
                    t.re * phase.cos() - t.im * phase.sin()
                })
                .sum(),
        }
    }

    /// Hermitian-symmetrized coefficients of a Fourier symbol, merged by mode.
    pub fn real_fourier_terms(&self) -> Option<Vec<(i64, i64, Complex64)>> {
        let DampingSymbol::Fourier { terms } = self else {
            return None;
        };
        let mut out: Vec<(i64, i64, Complex64)> = Vec::new();
        let mut add = |m: i64, n: i64, c: Complex64| {
            match out.iter_mut().find(|(a, b, _)| *a == m && *b == n) {
                Some(slot) => slot.2 += c,
                None => out.push((m, n, c)),
            }
        };
        for t in terms {
            let c = t.coefficient() * 0.5;
            add(t.m, t.n, c);
            add(-t.m, -t.n, c.conj());
        }
        Some(out)
    }

    /// `[a_minus, a_plus]`: exact for the built-in profiles, sampled on a
    /// dense grid otherwise.
    pub fn range(&self) -> SymbolRange {
        match self {
            DampingSymbol::Constant { value } => SymbolRange {
                a_minus: *value,
                a_plus: *value,
            },
            DampingSymbol::A1 => SymbolRange {
                a_minus: A1_OUTER_PLATEAU,
                a_plus: 1.0,
            },
            DampingSymbol::A2 => SymbolRange {
                a_minus: 0.5,
                a_plus: 1.0,
            },
            DampingSymbol::Table { values } => SymbolRange {
                a_minus: values.iter().copied().fold(f64::INFINITY, f64::min),
                a_plus: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            },
            DampingSymbol::Fourier { .. } => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                if self.is_q_only() {
                    for i in 0..RANGE_GRID_1D {
                        let v = self.eval_q(i as f64 / RANGE_GRID_1D as f64);
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                } else {
                    for i in 0..RANGE_GRID_2D {
                        for j in 0..RANGE_GRID_2D {
                            let v = self.eval(
                                i as f64 / RANGE_GRID_2D as f64,
                                j as f64 / RANGE_GRID_2D as f64,
                            );
                            lo = lo.min(v);
                            hi = hi.max(v);
                        }
                    }
                }
                SymbolRange {
                    a_minus: lo,
                    a_plus: hi,
                }
            }
        }
    }

    /// Check `0 < a_minus ≤ a ≤ a_plus ≤ 1`.
    pub fn validate(&self) -> Result<SymbolRange> {
        match self {
            DampingSymbol::Table { values } if values.is_empty() => {
                return Err(Error::InvalidDamping("table has no values".into()))
            }
            DampingSymbol::Fourier { terms } if terms.is_empty() => {
                return Err(Error::InvalidDamping("fourier series has no terms".into()))
            }
            _ => {}
        }
        let r = self.range();
        if !(r.a_minus.is_finite() && r.a_plus.is_finite()) {
            return Err(Error::InvalidDamping("non-finite values".into()));
        }
        if r.a_minus <= 0.0 {
            return Err(Error::InvalidDamping(format!(
                "a_minus = {} must be positive",
                r.a_minus
            )));
        }
        if r.a_plus > 1.0 + 1e-12 {
            return Err(Error::InvalidDamping(format!(
                "a_plus = {} exceeds 1",
                r.a_plus
            )));
        }
        Ok(r)
    }

    /// Stable textual description, used in cache keys.
    pub fn label(&self) -> String {
        match self {
            DampingSymbol::Constant { value } => format!("constant:{value:?}"),
            DampingSymbol::A1 => "a1".to_string(),
            DampingSymbol::A2 => "a2".to_string(),
            DampingSymbol::Table { values } => {
                let v: Vec<String> = values.iter().map(|x| format!("{x:?}")).collect();
                format!("table:[{}]", v.join(","))
            }
            DampingSymbol::Fourier { terms } => {
                let v: Vec<String> = terms
                    .iter()
                    .map(|t| format!("({},{},{:?},{:?})", t.m, t.n, t.re, t.im))
                    .collect();
                format!("fourier:[{}]", v.join(","))
            }
        }
    }
}
