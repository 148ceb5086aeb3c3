use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::damping::DampingSymbol;
use super::torus::{kicked_jacobian, ClassicalMap, TorusMap, TorusPoint};
use crate::{Error, Result};

pub const DEFAULT_GRID_1D: usize = 1 << 16;
pub const DEFAULT_GRID_2D: usize = 1024;
pub const DEFAULT_EXPANSION_GRID: usize = 1 << 12;

/// `ℓa_n(x) = (1/n) Σ_{i=1..n} log a(κⁱ x)`.
pub fn birkhoff_log_mean(
    a: &DampingSymbol,
    map: &impl TorusMap,
    x: TorusPoint,
    n: usize,
) -> f64 {
    let mut y = x;
    let mut acc = 0.0;
    for _ in 0..n {
        y = map.apply(y);
        acc += a.eval(y.q(), y.p()).abs().ln();
    }
    acc / n as f64
}

/// `⟨a⟩ = exp(∫ log|a| dμ)` by the periodic trapezoid rule on `grid_points`
/// nodes per axis (one axis for q-only symbols).
pub fn geometric_mean(a: &DampingSymbol, grid_points: usize) -> Result<f64> {
    if grid_points < 64 {
        return Err(Error::arg(format!(
            "geometric_mean needs at least 64 grid points, got {grid_points}"
        )));
    }
    let g = grid_points as f64;
    let log_integral = if a.is_q_only() {
        (0..grid_points)
            .map(|i| a.eval_q(i as f64 / g).abs().ln())
            .sum::<f64>()
            / g
    } else {
        let mut acc = 0.0;
        for i in 0..grid_points {
            let mut row = 0.0;
            for j in 0..grid_points {
                row += a.eval(i as f64 / g, j as f64 / g).abs().ln();
            }
            acc += row;
        }
        acc / (g * g)
    };
    Ok(log_integral.exp())
}

/// `geometric_mean` at the default quadrature resolution.
pub fn default_geometric_mean(a: &DampingSymbol) -> f64 {
    let grid = if a.is_q_only() {
        DEFAULT_GRID_1D
    } else {
        DEFAULT_GRID_2D
    };
    geometric_mean(a, grid).expect("default grid is large enough")
}

/// Empirical distribution of `x_n = ℓa_n − log⟨a⟩` over uniform starting points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffStats {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub values: Vec<f64>,
    /// `E(n · x_n²)`.
    pub second_moment: f64,
}

impl BirkhoffStats {
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Fraction of samples with `x_n ≥ threshold`.
    pub fn tail_fraction(&self, threshold: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().filter(|&&x| x >= threshold).count() as f64 / self.values.len() as f64
    }
}

/// Starting point of sample `index`: an independent ChaCha stream per sample,
/// so results do not depend on how samples are split across workers.
pub fn sample_point(seed: u64, index: u64) -> TorusPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let q: f64 = rng.random();
    let p: f64 = rng.random();
    TorusPoint::new(q, p)
}

pub fn deviation_distribution(
    a: &DampingSymbol,
    map: &ClassicalMap,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<BirkhoffStats> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    if n == 0 {
        return Err(Error::arg("word length n must be positive"));
    }
    let log_mean = default_geometric_mean(a).ln();
    let constant = matches!(a, DampingSymbol::Constant { .. });
    let values: Vec<f64> = (0..samples as u64)
        .map(|i| {
            if constant {
                // ℓa_n and log⟨a⟩ agree exactly; avoid summation roundoff
                0.0
            } else {
                birkhoff_log_mean(a, map, sample_point(seed, i), n) - log_mean
            }
        })
        .collect();
    let second_moment = n as f64 * values.iter().map(|x| x * x).sum::<f64>() / samples as f64;
    Ok(BirkhoffStats {
        n,
        samples,
        seed,
        values,
        second_moment,
    })
}

/// `Î(ℓc) = −(1/n) log P(x_n ≥ ℓc)` at the largest `n` in `stats`.
/// Returns `+∞` when no sample reaches `ℓc`.
pub fn rate_estimate(stats: &[BirkhoffStats], lc: f64) -> Result<f64> {
    let last = stats
        .iter()
        .filter(|s| !s.values.is_empty())
        .max_by_key(|s| s.n)
        .ok_or(Error::NoSamples)?;
    let frac = last.tail_fraction(lc);
    if frac == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-frac.ln() / last.n as f64)
}

pub fn rate_table(stats: &[BirkhoffStats], lcs: &[f64]) -> Result<Vec<(f64, f64)>> {
    lcs.iter()
        .map(|&lc| rate_estimate(stats, lc).map(|r| (lc, r)))
        .collect()
}

/// Largest violation of monotonicity in a rate table (0 when nondecreasing).
pub fn rate_table_max_decrease(table: &[(f64, f64)]) -> f64 {
    let mut sorted = table.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted
        .windows(2)
        .map(|w| {
            if w[1].1 == f64::INFINITY {
                0.0
            } else {
                (w[0].1 - w[1].1).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn spectral_norm_2x2(d: [[f64; 2]; 2]) -> f64 {
    let fro2 = d[0][0] * d[0][0] + d[0][1] * d[0][1] + d[1][0] * d[1][0] + d[1][1] * d[1][1];
    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    ((fro2 + disc) / 2.0).sqrt()
}

/// `Γ = log sup_x ‖Dκ_x‖`. `Dκ` depends only on the image coordinate
/// `q' = (A x)_q`, so the supremum is taken over a uniform `q'` grid.
pub fn expansion_rate(map: &ClassicalMap, grid_points: usize) -> Result<f64> {
    if grid_points < 64 {
        return Err(Error::arg(format!(
            "expansion_rate needs at least 64 grid points, got {grid_points}"
        )));
    }
    let a = map.linear().as_f64();
    let sup = (0..grid_points)
        .map(|i| spectral_norm_2x2(kicked_jacobian(a, map.alpha(), i as f64 / grid_points as f64)))
        .fold(0.0, f64::max);
    Ok(sup.ln())
}

/// Constants controlling the large-eigenvalue bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeDevParams {
    pub gamma: f64,
    /// `T_{a,κ} = (2Γ − 12 log a_−)⁻¹`.
    pub t: f64,
    pub c: f64,
    /// `ℓc = log(1 + c/⟨a⟩)`.
    pub lc: f64,
    pub rate: f64,
    pub tau_c: f64,
    pub nu: f64,
    pub rate_table: Vec<(f64, f64)>,
}

pub fn ehrenfest_constant(gamma: f64, a_minus: f64) -> Result<f64> {
    if a_minus >= 1.0 {
        return Err(Error::DampingTooWeak { a_minus });
    }
    if a_minus <= 0.0 {
        return Err(Error::NonInvertibleDamping { a_minus });
    }
    let denom = 2.0 * gamma - 12.0 * a_minus.ln();
    if denom <= 0.0 {
        return Err(Error::DampingTooWeak { a_minus });
    }
    Ok(1.0 / denom)
}

/// `(τ_c, ν) = (T/(1 + ÎT), ÎT/(1 + ÎT))`, with the `Î = ∞` limit `(0, 1)`.
pub fn fractal_exponent(rate: f64, t: f64) -> (f64, f64) {
    if rate.is_infinite() {
        return (0.0, 1.0);
    }
    let it = rate * t;
    (t / (1.0 + it), it / (1.0 + it))
}

/// Piecewise-linear interpolation, clamped to the end values.
pub fn interpolate_rate(table: &[(f64, f64)], lc: f64) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::arg("rate table is empty"));
    }
    let mut sorted = table.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if lc <= sorted[0].0 {
        return Ok(sorted[0].1);
    }
    let last = sorted[sorted.len() - 1];
    if lc >= last.0 {
        return Ok(last.1);
    }
    let i = sorted.partition_point(|p| p.0 <= lc);
    let (x0, y0) = sorted[i - 1];
    let (x1, y1) = sorted[i];
    if y0.is_infinite() || y1.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(y0 + (y1 - y0) * (lc - x0) / (x1 - x0))
}

pub fn large_dev_params(
    a: &DampingSymbol,
    map: &ClassicalMap,
    rate_table: &[(f64, f64)],
    c: f64,
) -> Result<LargeDevParams> {
    if !(c > 0.0) {
        return Err(Error::arg(format!("c must be positive, got {c}")));
    }
    let range = a.validate()?;
    let gamma = expansion_rate(map, DEFAULT_EXPANSION_GRID)?;
    let t = ehrenfest_constant(gamma, range.a_minus)?;
    let lc = (1.0 + c / default_geometric_mean(a)).ln();
    let rate = interpolate_rate(rate_table, lc)?;
    let (tau_c, nu) = fractal_exponent(rate, t);
    Ok(LargeDevParams {
        gamma,
        t,
        c,
        lc,
        rate,
        tau_c,
        nu,
        rate_table: rate_table.to_vec(),
    })
}
