//! Spectra of damped propagators and the statistics computed from them.
//!
//! Eigenvalues are kept sorted by decreasing modulus `r_1 ≥ r_2 ≥ … ≥ r_N`,
//! ties broken by ascending argument in `[0, 2π)`. Angles are stored
//! normalized to turns, `θ_j ∈ [0, 1)`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::birkhoff_log_mean;
use crate::eigen::{eigenvalues, hermitian_spectrum, operator_norm};
use crate::quantization::{damped_propagator, default_cutoff, quantize_symbol, FnSymbol, PropagatorSpec};
use crate::{DenseOperator, Error, Result};

/// Argument in turns, `[0, 1)`.
fn turns(z: Complex64) -> f64 {
    let t = z.arg() / (2.0 * PI);
    let t = if t < 0.0 { t + 1.0 } else { t };
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub dim: usize,
    pub eigenvalues: Vec<Complex64>,
    pub moduli: Vec<f64>,
    pub angles: Vec<f64>,
    /// Cache key of the propagator the spectrum came from (empty when built
    /// from raw values).
    pub provenance: String,
    pub residual: f64,
}

impl SpectrumResult {
    pub fn from_eigenvalues(values: Vec<Complex64>, provenance: String, residual: f64) -> Self {
        let mut keyed: Vec<(f64, f64, Complex64)> =
            values.into_iter().map(|z| (z.norm(), turns(z), z)).collect();
        keyed.sort_by(|x, y| match y.0.total_cmp(&x.0) {
            Ordering::Equal => x.1.total_cmp(&y.1),
            o => o,
        });
        Self {
            dim: keyed.len(),
            moduli: keyed.iter().map(|k| k.0).collect(),
            angles: keyed.iter().map(|k| k.1).collect(),
            eigenvalues: keyed.into_iter().map(|k| k.2).collect(),
            provenance,
            residual,
        }
    }

    pub fn h(&self) -> f64 {
        1.0 / self.dim as f64
    }
}

/// Assembles `M_h(a, κ)` and computes its full spectrum.
pub fn spectrum(spec: &PropagatorSpec) -> Result<SpectrumResult> {
    let m = damped_propagator(spec)?;
    let report = eigenvalues(&m)?;
    Ok(SpectrumResult::from_eigenvalues(
        report.values,
        crate::harness::cache_key(spec),
        report.max_residual,
    ))
}

fn sn_check(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::arg("S_n needs n ≥ 1"));
    }
    Ok(())
}

fn gram_power(spec: &PropagatorSpec, n: usize) -> Result<DenseOperator> {
    sn_check(n)?;
    let mn = damped_propagator(spec)?.pow(n);
    Ok(mn.adjoint().matmul(&mn))
}

/// `S_n = (M†ⁿ Mⁿ)^{1/2n}`, eigenvalues of the Gram matrix clipped at 1e-300
/// before the fractional power.
pub fn sn_operator(spec: &PropagatorSpec, n: usize) -> Result<DenseOperator> {
    let gram = gram_power(spec, n)?;
    let p = 1.0 / (2 * n) as f64;
    Ok(hermitian_spectrum(&gram)?.map(|x| x.max(1e-300).powf(p)))
}

/// Eigenvalues of `S_n`, descending.
pub fn sn_values(spec: &PropagatorSpec, n: usize) -> Result<Vec<f64>> {
    let gram = gram_power(spec, n)?;
    let p = 1.0 / (2 * n) as f64;
    let mut v: Vec<f64> = crate::eigen::hermitian_eigenvalues(&gram)?
        .into_iter()
        .map(|x| x.max(1e-300).powf(p))
        .collect();
    v.reverse();
    Ok(v)
}

/// `‖S_n − Op_h(a_n)‖` with `a_n = exp(ℓa_n)` sampled pointwise and
/// re-expanded at the default cutoff.
pub fn sn_symbol_defect(spec: &PropagatorSpec, n: usize) -> Result<f64> {
    let s = sn_operator(spec, n)?;
    let a = &spec.damping;
    let map = spec.map;
    let an = FnSymbol(|q: f64, p: f64| {
        let x = crate::classical::TorusPoint::new(q, p);
        Complex64::new(birkhoff_log_mean(a, &map, x, n).exp(), 0.0)
    });
    let op = quantize_symbol(spec.dim, &an, default_cutoff(spec.dim))?;
    operator_norm(&s.sub(&op))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylSlack {
    pub n: usize,
    /// `min_k (Σ_{i≤k} log s_i − Σ_{i≤k} log r_i)`.
    pub min_slack: f64,
    /// The `k` (1-based) attaining `min_slack`.
    pub worst_k: usize,
    /// Slack at `k = N`.
    pub full_slack: f64,
    pub pass: bool,
}

/// Compares partial log-products of `moduli` (descending) against those of
/// `s` (descending). Passes iff every partial slack is at least `−1e-8·k`.
pub fn weyl_slack(moduli: &[f64], s: &[f64], n: usize) -> Result<WeylSlack> {
    if moduli.len() != s.len() || moduli.is_empty() {
        return Err(Error::arg("Weyl check needs equally many eigenvalues and singular values"));
    }
    let (mut lhs, mut rhs) = (0.0, 0.0);
    let mut min_slack = f64::INFINITY;
    let mut worst_k = 1;
    let mut pass = true;
    let mut slack = 0.0;
    for k in 0..moduli.len() {
        lhs += moduli[k].ln();
        rhs += s[k].ln();
        slack = rhs - lhs;
        if slack.is_nan() {
            slack = f64::INFINITY;
        }
        if slack < min_slack {
            min_slack = slack;
            worst_k = k + 1;
        }
        if slack < -1e-8 * (k + 1) as f64 {
            pass = false;
        }
    }
    Ok(WeylSlack {
        n,
        min_slack,
        worst_k,
        full_slack: slack,
        pass,
    })
}

/// Weyl inequalities `∏_{i≤k} |λ_i| ≤ ∏_{i≤k} s_i^{(n)}` for one spectrum.
pub fn weyl_inequality_check(eigs: &SpectrumResult, spec: &PropagatorSpec, n: usize) -> Result<WeylSlack> {
    weyl_slack(&eigs.moduli, &sn_values(spec, n)?, n)
}

/// `h · #{j : lo ≤ r_j ≤ hi}`.
pub fn strip_fraction(s: &SpectrumResult, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return Err(Error::arg(format!("empty strip: lo = {lo} > hi = {hi}")));
    }
    let count = s.moduli.iter().filter(|&&r| lo <= r && r <= hi).count();
    Ok(count as f64 * s.h())
}

/// `W_h = r_{⌊N/4⌋} − r_{⌊3N/4⌋}`, 1-based indices clamped to `[1, N]`.
pub fn width(s: &SpectrumResult) -> Result<f64> {
    let n = s.dim;
    if n < 4 {
        return Err(Error::arg(format!("width needs N ≥ 4, got {n}")));
    }
    let idx = |k: usize| k.clamp(1, n) - 1;
    Ok(s.moduli[idx(n / 4)] - s.moduli[idx(3 * n / 4)])
}

/// `h Σ_j e^{2iπkθ_j}` for `k = 0 … kmax`.
pub fn angular_moments(s: &SpectrumResult, kmax: usize) -> Vec<Complex64> {
    let h = s.h();
    (0..=kmax)
        .map(|k| {
            if k == 0 {
                return Complex64::new(1.0, 0.0);
            }
            let sum: Complex64 = s
                .angles
                .iter()
                .map(|&t| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * t))
                .sum();
            sum * h
        })
        .collect()
}

/// `h Tr Aⁿ` for `n = 1 … n_max`.
pub fn operator_trace_sequence(a: &DenseOperator, n_max: usize) -> Vec<Complex64> {
    let h = a.h();
    let mut out = Vec::with_capacity(n_max);
    let mut power = a.clone();
    for n in 1..=n_max {
        if n > 1 {
            power = power.matmul(a);
        }
        out.push(power.trace() * h);
    }
    out
}

/// `h Tr Mⁿ` for `n = 1 … n_max`.
pub fn trace_sequence(spec: &PropagatorSpec, n_max: usize) -> Result<Vec<Complex64>> {
    Ok(operator_trace_sequence(&damped_propagator(spec)?, n_max))
}

/// `h · #{j : r_j ≥ mean + c}`.
pub fn large_count(s: &SpectrumResult, mean: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::arg(format!("large_count needs c > 0, got {c}")));
    }
    let count = s.moduli.iter().filter(|&&r| r >= mean + c).count();
    Ok(count as f64 * s.h())
}

/// Least-squares fit `W ≈ A (log N)^{−B}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthFit {
    pub points: Vec<(usize, f64)>,
    pub a: f64,
    pub b: f64,
    /// Root of the summed squared residuals of `log W`.
    pub residual: f64,
    /// Asymptotic standard error of `B` (zero for exactly three collinear
    /// points or more).
    pub b_stderr: f64,
}

impl WidthFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.a * n.ln().powf(-self.b)
    }
}

pub fn loglog_fit(points: &[(usize, f64)]) -> Result<WidthFit> {
    if points.len() < 3 {
        return Err(Error::arg(format!("fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(&(n, w)) = points.iter().find(|p| !(p.1 > 0.0) || p.0 < 2) {
        return Err(Error::arg(format!("fit needs W > 0 and N ≥ 2, got ({n}, {w})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln().ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("fit needs at least two distinct N"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(WidthFit {
        points: points.to_vec(),
        a: intercept.exp(),
        b: -slope,
        residual: ssr.sqrt(),
        b_stderr: (ssr / (k - 2.0) / sxx).sqrt(),
    })
}
