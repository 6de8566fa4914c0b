//! Large-sample diagnostics: the Gaussian-location residual of the
//! `½ log n` information asymptotics, log-log rate fits, and the individual
//! lower-rate formula.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundName, BoundReport};
use crate::error::{invalid, Result};
use crate::prob::{gaussian_entropy, Gaussian};

/// `I(W; Z^n)` minus its asymptotic expansion
/// `½ log(n/2πe) + h(W) + ½ log J` for `W ~ N(0, σ_w²)`, `Z | W ~ N(W, σ²)`,
/// where `J = 1/σ²`. Equals `½ log(1 + σ²/(nσ_w²))`.
pub fn lemma2_residual(sigma_w: f64, sigma: f64, ns: &[usize]) -> Result<Vec<f64>> {
    if !(sigma_w > 0.0 && sigma > 0.0) {
        return invalid("σ_w and σ must be positive");
    }
    if ns.contains(&0) {
        return invalid("sample sizes must be positive");
    }
    let h = gaussian_entropy(&Gaussian::new(DVector::from_element(1, 0.0), DMatrix::from_element(1, 1, sigma_w * sigma_w))?)?;
    let log_j = -2.0 * sigma.ln();
    Ok(ns
        .iter()
        .map(|&n| {
            let n = n as f64;
            let exact = 0.5 * (n * sigma_w * sigma_w / (sigma * sigma)).ln_1p();
            let asymptotic = 0.5 * (n / (2.0 * std::f64::consts::PI * std::f64::consts::E)).ln() + h + 0.5 * log_j;
            exact - asymptotic
        })
        .collect())
}

/// Least-squares fit of `log value = intercept + slope · log n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub ns: Vec<usize>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_rate(ns: &[usize], values: &[f64]) -> Result<RateFit> {
    if ns.len() != values.len() || ns.len() < 2 {
        return invalid("need at least two (n, value) pairs of equal length");
    }
    if ns[0] == 0 || ns.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("sample sizes must be positive and strictly increasing");
    }
    if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return invalid("values must be positive and finite");
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(RateFit { ns: ns.to_vec(), values: values.to_vec(), slope, intercept, r2 })
}

/// `(d/(nπ)) exp(−(2/d) E log det J(W))`, with the vanishing correction
/// dropped.
pub fn lower_rate_bound(d: usize, expected_log_det_j: f64, n: usize) -> Result<BoundReport> {
    if d == 0 || n == 0 {
        return invalid("lower rate needs d ≥ 1 and n ≥ 1");
    }
    let df = d as f64;
    let value = df / (n as f64 * std::f64::consts::PI) * (-2.0 / df * expected_log_det_j).exp();
    let mut report = BoundReport { bound_name: BoundName::LowerRate, inputs: Default::default(), value };
    report.inputs.insert("d".into(), df);
    report.inputs.insert("expected_log_det_j".into(), expected_log_det_j);
    report.inputs.insert("n".into(), n as f64);
    Ok(report)
}
