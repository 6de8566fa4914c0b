//! Cumulant envelopes, their Legendre duals, and the excess-risk bounds built
//! on top of them.
//!
//! A cumulant envelope `φ` on `[0, b)` bounds the centred cumulant generating
//! function of a loss. Its Legendre dual is `φ*(γ) = sup_{0≤λ<b} λγ − φ(λ)`
//! and the bounds use the generalised inverse
//! `φ*⁻¹(x) = sup{γ : φ*(γ) ≤ x}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linear::{cmi_y_given_xzn, LinearModelSpec};
use crate::prob::{Gaussian, McEstimate, SeedSpec};

const GRID_POINTS: usize = 1024;
const TOL: f64 = 1e-10;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Upper envelope `φ` on `[0, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CumulantEnvelope {
    /// `φ(λ) = q λ²`.
    Quadratic { q: f64, b: f64 },
    /// Piecewise-linear interpolation of `(lambdas[i], values[i])`; the last
    /// knot is the right endpoint `b`.
    Tabulated { lambdas: Vec<f64>, values: Vec<f64> },
}

impl CumulantEnvelope {
    pub fn quadratic(q: f64, b: f64) -> Result<Self> {
        if !(q > 0.0 && b > 0.0) || !q.is_finite() || !b.is_finite() {
            return invalid("quadratic envelope needs q > 0 and b > 0");
        }
        Ok(CumulantEnvelope::Quadratic { q, b })
    }

    /// The envelope of the squared loss of posterior sampling in the Gaussian
    /// linear model: `φ(λ) = (16σ_w² + 8σ_e²) λ²` on `[0, 1/(32σ_w² + 16σ_e²))`.
    pub fn sub_exponential(sigma_w: f64, sigma_e: f64) -> Result<Self> {
        let s2w = sigma_w * sigma_w;
        let s2e = sigma_e * sigma_e;
        Self::quadratic(16.0 * s2w + 8.0 * s2e, 1.0 / (32.0 * s2w + 16.0 * s2e))
    }

    pub fn tabulated(lambdas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if lambdas.len() < 2 || lambdas.len() != values.len() {
            return invalid("tabulated envelope needs at least two matching knots");
        }
        if lambdas[0] != 0.0 || values[0] != 0.0 {
            return invalid("tabulated envelope must start at φ(0) = 0");
        }
        if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("tabulated knots must be strictly increasing");
        }
        let slopes: Vec<f64> = lambdas.windows(2).zip(values.windows(2)).map(|(l, v)| (v[1] - v[0]) / (l[1] - l[0])).collect();
        if slopes[0] < -1e-12 || slopes.windows(2).any(|s| s[1] < s[0] - 1e-12) {
            return invalid("tabulated envelope must be convex and non-decreasing");
        }
        Ok(CumulantEnvelope::Tabulated { lambdas, values })
    }

    /// Right endpoint of the domain.
    pub fn b(&self) -> f64 {
        match self {
            CumulantEnvelope::Quadratic { b, .. } => *b,
            CumulantEnvelope::Tabulated { lambdas, .. } => *lambdas.last().expect("validated"),
        }
    }

    /// `φ(λ)` for `λ ∈ [0, b]` (the endpoint by continuity).
    pub fn phi(&self, lambda: f64) -> f64 {
        match self {
            CumulantEnvelope::Quadratic { q, .. } => q * lambda * lambda,
            CumulantEnvelope::Tabulated { lambdas, values } => {
                let i = lambdas.partition_point(|&l| l <= lambda).clamp(1, lambdas.len() - 1);
                let (l0, l1) = (lambdas[i - 1], lambdas[i]);
                let t = (lambda - l0) / (l1 - l0);
                values[i - 1] + t * (values[i] - values[i - 1])
            }
        }
    }
}

/// `φ*(γ)`: closed form for quadratic envelopes, numeric otherwise.
pub fn legendre_dual(env: &CumulantEnvelope, gamma: f64) -> f64 {
    match *env {
        CumulantEnvelope::Quadratic { q, b } => {
            if gamma <= 0.0 {
                0.0
            } else if gamma <= 2.0 * q * b {
                gamma * gamma / (4.0 * q)
            } else {
                b * gamma - q * b * b
            }
        }
        CumulantEnvelope::Tabulated { .. } => legendre_dual_numeric(env, gamma),
    }
}

/// `φ*(γ)` by direct maximisation of the concave map `λ ↦ λγ − φ(λ)`:
/// a uniform grid locates the maximiser, golden-section search refines it.
pub fn legendre_dual_numeric(env: &CumulantEnvelope, gamma: f64) -> f64 {
    let b = env.b();
    let g = |l: f64| l * gamma - env.phi(l);
    let h = b / GRID_POINTS as f64;
    let best = (0..=GRID_POINTS)
        .map(|i| (i, g(i as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut lo = (best.0 as f64 - 1.0).max(0.0) * h;
    let mut hi = ((best.0 + 1) as f64 * h).min(b);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while hi - lo > TOL * b.max(1e-300) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = g(x1);
        }
    }
    best.1.max(f1).max(f2).max(g(lo)).max(g(hi)).max(0.0)
}

/// `φ*⁻¹(x) = sup{γ : φ*(γ) ≤ x}`; `-∞` for `x < 0`.
pub fn legendre_dual_inverse(env: &CumulantEnvelope, x: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    match *env {
        CumulantEnvelope::Quadratic { q, b } => {
            let knee = q * b * b;
            if x <= knee {
                2.0 * (q * x).sqrt()
            } else {
                (x + knee) / b
            }
        }
        CumulantEnvelope::Tabulated { .. } => legendre_dual_inverse_numeric(env, x),
    }
}

/// Generalised inverse by bisection on the numeric dual.
pub fn legendre_dual_inverse_numeric(env: &CumulantEnvelope, x: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    let dual = |g: f64| legendre_dual_numeric(env, g);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while dual(hi) <= x {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if dual(mid) <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Family of priors together with the centre the learner uses.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorFamily {
    /// `{N(μ, σ_w² I) : ‖μ‖₂ ≤ c}` with centre `N(0, σ_w² I)`.
    GaussianMeanBall { center: Gaussian, c: f64 },
    /// Any other family, for which no radius is known.
    Other { center: Gaussian, description: String },
}

impl PriorFamily {
    pub fn gaussian_mean_ball(d: usize, sigma_w: f64, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return invalid("radius c must be non-negative");
        }
        let center = Gaussian::isotropic(nalgebra::DVector::zeros(d), sigma_w * sigma_w)?;
        Ok(PriorFamily::GaussianMeanBall { center, c })
    }

    pub fn for_model(spec: &LinearModelSpec) -> Result<Self> {
        Self::gaussian_mean_ball(spec.d, spec.sigma_w, spec.c)
    }

    pub fn center(&self) -> &Gaussian {
        match self {
            PriorFamily::GaussianMeanBall { center, .. } | PriorFamily::Other { center, .. } => center,
        }
    }
}

/// `sup_P KL(P ‖ P₀)` over the family, attained on the sphere `‖μ‖ = c`:
/// `c² / (2σ_w²)`.
pub fn family_radius(fam: &PriorFamily) -> Result<f64> {
    match fam {
        PriorFamily::GaussianMeanBall { center, c } => {
            let d = center.dim();
            let s2 = center.cov()[(0, 0)];
            let isotropic = (center.cov() - nalgebra::DMatrix::identity(d, d) * s2).amax() <= 1e-12 * s2.max(1.0);
            if d == 0 || !(s2 > 0.0) || !isotropic || center.mean().amax() != 0.0 {
                return Err(Error::Unsupported("mean-ball radius needs a centred isotropic Gaussian".into()));
            }
            Ok(c * c / (2.0 * s2))
        }
        PriorFamily::Other { description, .. } => Err(Error::Unsupported(format!("radius of prior family '{description}'"))),
    }
}

/// Identifier of a bound in reports. The serialized strings are the
/// report-file contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundName {
    #[serde(rename = "thm4a")]
    BayesSquared,
    #[serde(rename = "thm4b")]
    BayesRealizable,
    #[serde(rename = "thm4c")]
    BayesBounded,
    #[serde(rename = "thm5a")]
    CapacitySquared,
    #[serde(rename = "thm5b")]
    CapacityRealizable,
    #[serde(rename = "thm5c")]
    CapacityBounded,
    #[serde(rename = "thm7")]
    PosteriorSamplingCmi,
    #[serde(rename = "thm10")]
    PosteriorSamplingMi,
    #[serde(rename = "lower_rate")]
    LowerRate,
}

impl BoundName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::BayesSquared => "thm4a",
            BoundName::BayesRealizable => "thm4b",
            BoundName::BayesBounded => "thm4c",
            BoundName::CapacitySquared => "thm5a",
            BoundName::CapacityRealizable => "thm5b",
            BoundName::CapacityBounded => "thm5c",
            BoundName::PosteriorSamplingCmi => "thm7",
            BoundName::PosteriorSamplingMi => "thm10",
            BoundName::LowerRate => "lower_rate",
        }
    }
}

/// A bound value together with the inputs it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: BoundName,
    pub inputs: BTreeMap<String, f64>,
    pub value: f64,
}

impl BoundReport {
    fn new(bound_name: BoundName, inputs: &[(&str, f64)], value: f64) -> Self {
        Self { bound_name, inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(), value }
    }
}

/// Loss regime of the information bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossRegime {
    /// Squared loss with `‖y‖² ≤ B`: `2B·I`.
    Squared,
    /// Loss in `[0, B]`, realizable: `3B·I`.
    Realizable,
    /// Loss in `[0, B]`: `B·√(I/2)`.
    Bounded,
}

fn check_nonneg(pairs: &[(&str, f64)]) -> Result<()> {
    for (name, v) in pairs {
        if !(*v >= 0.0) || !v.is_finite() {
            return invalid(format!("{name} must be a non-negative finite number, got {v}"));
        }
    }
    Ok(())
}

/// Bayesian excess-risk bound in terms of `I(W; Y | X, Z^n)`.
pub fn bayes_risk_bound(regime: LossRegime, b: f64, cmi: f64) -> Result<BoundReport> {
    check_nonneg(&[("B", b), ("cmi", cmi)])?;
    let (name, value) = match regime {
        LossRegime::Squared => (BoundName::BayesSquared, 2.0 * b * cmi),
        LossRegime::Realizable => (BoundName::BayesRealizable, 3.0 * b * cmi),
        LossRegime::Bounded => (BoundName::BayesBounded, b * (cmi / 2.0).sqrt()),
    };
    Ok(BoundReport::new(name, &[("B", b), ("cmi", cmi)], value))
}

/// Minimax excess-risk bound in terms of a capacity bound `κ_n`.
pub fn minimax_capacity_bound(regime: LossRegime, b: f64, kappa_n: f64, n: usize) -> Result<BoundReport> {
    check_nonneg(&[("B", b), ("kappa_n", kappa_n)])?;
    if n == 0 {
        return invalid("capacity bound needs n >= 1");
    }
    let per = kappa_n / n as f64;
    let (name, value) = match regime {
        LossRegime::Squared => (BoundName::CapacitySquared, 2.0 * b * per),
        LossRegime::Realizable => (BoundName::CapacityRealizable, 3.0 * b * per),
        LossRegime::Bounded => (BoundName::CapacityBounded, b * (per / 2.0).sqrt()),
    };
    Ok(BoundReport::new(name, &[("B", b), ("kappa_n", kappa_n), ("n", n as f64)], value))
}

/// Posterior sampling with a misspecified centre prior:
/// `φ*⁻¹(r/n + sup I(W; Y | X, Z^n))`.
pub fn posterior_sampling_bound(env: &CumulantEnvelope, fam: &PriorFamily, cmi_sup: f64, n: usize) -> Result<BoundReport> {
    check_nonneg(&[("cmi_sup", cmi_sup)])?;
    if n == 0 {
        return invalid("posterior sampling bound needs n >= 1");
    }
    let r = family_radius(fam)?;
    let value = legendre_dual_inverse(env, r / n as f64 + cmi_sup);
    Ok(BoundReport::new(BoundName::PosteriorSamplingCmi, &[("r", r), ("cmi_sup", cmi_sup), ("n", n as f64)], value))
}

/// Same bound routed through `I(W; Z^n)`: `φ*⁻¹((I(W;Z^n) + r)/n)`.
pub fn posterior_sampling_mi_bound(env: &CumulantEnvelope, fam: &PriorFamily, mi_wzn: f64, n: usize) -> Result<BoundReport> {
    check_nonneg(&[("mi_wzn", mi_wzn)])?;
    if n == 0 {
        return invalid("posterior sampling bound needs n >= 1");
    }
    let r = family_radius(fam)?;
    let value = legendre_dual_inverse(env, (mi_wzn + r) / n as f64);
    Ok(BoundReport::new(BoundName::PosteriorSamplingMi, &[("r", r), ("mi_wzn", mi_wzn), ("n", n as f64)], value))
}

/// Approximates `sup_{‖μ‖≤c} I(W; Y | X, Z^n)` by evaluating at prior means
/// of norm `0, c/2, c` along the first axis. Returns the largest estimate and
/// all three.
pub fn cmi_sup_over_mean_ball(
    spec: &LinearModelSpec,
    n: usize,
    mc_reps: usize,
    seed: SeedSpec,
) -> Result<(McEstimate, Vec<McEstimate>)> {
    let mut all = Vec::with_capacity(3);
    for (i, frac) in [0.0, 0.5, 1.0].into_iter().enumerate() {
        let mut mu = vec![0.0; spec.d];
        mu[0] = frac * spec.c;
        all.push(cmi_y_given_xzn(&spec.with_mu(mu), n, mc_reps, seed.child(i as u64))?);
    }
    let best = *all
        .iter()
        .max_by(|a, b| a.mean.total_cmp(&b.mean))
        .expect("three points");
    Ok((best, all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::gaussian_kl;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn unit_env() -> CumulantEnvelope {
        CumulantEnvelope::sub_exponential(1.0, 1.0).unwrap()
    }

    #[test]
    fn envelope_constants() {
        match unit_env() {
            CumulantEnvelope::Quadratic { q, b } => {
                assert_eq!(q, 24.0);
                assert_relative_eq!(b, 1.0 / 48.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn dual_fixtures() {
        let env = unit_env();
        assert_eq!(legendre_dual(&env, 0.0), 0.0);
        assert_relative_eq!(legendre_dual(&env, 1.0), 1.0 / 96.0, epsilon = 1e-15);
        assert_relative_eq!(legendre_dual(&env, 2.0), 1.0 / 32.0, epsilon = 1e-15);
        assert_eq!(legendre_dual(&env, -3.0), 0.0);
    }

    #[test]
    fn dual_dense_grid_crosscheck() {
        let env = unit_env();
        let b = env.b();
        for gamma in [0.3, 1.0, 2.0, 5.0] {
            let dense = (0..=200_000).map(|i| {
                let l = b * i as f64 / 200_000.0;
                l * gamma - env.phi(l)
            });
            let sup = dense.fold(f64::NEG_INFINITY, f64::max);
            assert_relative_eq!(legendre_dual(&env, gamma), sup, epsilon = 1e-9);
        }
    }

    #[test]
    fn inverse_fixtures() {
        let env = unit_env();
        assert_eq!(legendre_dual_inverse(&env, 0.0), 0.0);
        assert_relative_eq!(legendre_dual_inverse(&env, 1.0 / 96.0), 1.0, epsilon = 1e-14);
        assert_relative_eq!(legendre_dual_inverse(&env, 1.0 / 24.0), 2.5, epsilon = 1e-14);
        assert_relative_eq!(legendre_dual_inverse_numeric(&env, 1.0 / 24.0), 2.5, epsilon = 1e-8);
        assert_eq!(legendre_dual_inverse(&env, -1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn knee_form_of_inverse_matches_general_form() {
        // √((64σ_w²+32σ_e²)γ) below the knee, (32σ_w²+16σ_e²)γ + ½ above
        for (sw, se) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.1)] {
            let env = CumulantEnvelope::sub_exponential(sw, se).unwrap();
            let a: f64 = 64.0 * sw * sw + 32.0 * se * se;
            for x in [0.0, 0.25 / a, 1.0 / a, 2.0 / a, 10.0 / a] {
                let expected = if x <= 1.0 / a { (a * x).sqrt() } else { 0.5 * a * x + 0.5 };
                assert_relative_eq!(legendre_dual_inverse(&env, x), expected, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn tabulated_envelope_matches_quadratic() {
        let q = 3.0;
        let b = 0.5;
        let lambdas: Vec<f64> = (0..=4000).map(|i| b * i as f64 / 4000.0).collect();
        let values = lambdas.iter().map(|l| q * l * l).collect();
        let tab = CumulantEnvelope::tabulated(lambdas, values).unwrap();
        let quad = CumulantEnvelope::quadratic(q, b).unwrap();
        for gamma in [0.1, 1.0, 3.0, 7.0] {
            assert_relative_eq!(legendre_dual(&tab, gamma), legendre_dual(&quad, gamma), epsilon = 1e-6);
        }
        assert_relative_eq!(legendre_dual_inverse(&tab, 0.4), legendre_dual_inverse(&quad, 0.4), epsilon = 1e-5);
    }

    #[test]
    fn tabulated_validation() {
        assert!(CumulantEnvelope::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0]).is_err()); // concave
        assert!(CumulantEnvelope::tabulated(vec![0.0, 1.0], vec![0.5, 1.0]).is_err());
        assert!(CumulantEnvelope::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).is_ok());
    }

    #[test]
    fn radius_fixtures() {
        assert_eq!(family_radius(&PriorFamily::gaussian_mean_ball(3, 1.0, 0.0).unwrap()).unwrap(), 0.0);
        assert_relative_eq!(family_radius(&PriorFamily::gaussian_mean_ball(1, 1.0, 1.0).unwrap()).unwrap(), 0.5);
        assert_relative_eq!(family_radius(&PriorFamily::gaussian_mean_ball(2, 1.0, 2.0).unwrap()).unwrap(), 2.0);
        let other = PriorFamily::Other { center: Gaussian::standard(1), description: "student-t".into() };
        assert!(matches!(family_radius(&other), Err(Error::Unsupported(_))));
    }

    #[test]
    fn radius_is_kl_supremum() {
        let (d, s, c) = (3, 0.7, 1.3);
        let fam = PriorFamily::gaussian_mean_ball(d, s, c).unwrap();
        let r = family_radius(&fam).unwrap();
        let mut best: f64 = 0.0;
        for i in 0..200 {
            let t = i as f64 * 0.1;
            let dir = DVector::from_vec(vec![t.cos(), t.sin() * 0.5, (2.0 * t).sin()]).normalize();
            for frac in [0.0, 0.3, 0.7, 1.0] {
                let p = Gaussian::isotropic(dir.clone() * (frac * c), s * s).unwrap();
                let kl = gaussian_kl(&p, fam.center()).unwrap();
                assert!(kl <= r + 1e-12);
                best = best.max(kl);
            }
        }
        assert_relative_eq!(best, r, epsilon = 1e-12);
    }

    #[test]
    fn bayes_bound_fixtures() {
        for regime in [LossRegime::Squared, LossRegime::Realizable, LossRegime::Bounded] {
            assert_eq!(bayes_risk_bound(regime, 1.0, 0.0).unwrap().value, 0.0);
        }
        assert_relative_eq!(bayes_risk_bound(LossRegime::Bounded, 1.0, 0.02).unwrap().value, 0.1, epsilon = 1e-15);
        assert_relative_eq!(bayes_risk_bound(LossRegime::Realizable, 1.0, 0.1).unwrap().value, 0.3, epsilon = 1e-15);
        assert!(bayes_risk_bound(LossRegime::Squared, -1.0, 0.1).is_err());
        assert!(bayes_risk_bound(LossRegime::Squared, 1.0, -0.1).is_err());
    }

    #[test]
    fn capacity_bound_fixtures() {
        assert_eq!(minimax_capacity_bound(LossRegime::Squared, 1.0, 0.0, 5).unwrap().value, 0.0);
        assert_relative_eq!(minimax_capacity_bound(LossRegime::Realizable, 1.0, 2.0, 10).unwrap().value, 0.6, epsilon = 1e-15);
        assert_relative_eq!(minimax_capacity_bound(LossRegime::Bounded, 1.0, 2.0, 100).unwrap().value, 0.1, epsilon = 1e-15);
        assert!(minimax_capacity_bound(LossRegime::Bounded, 1.0, 2.0, 0).is_err());
    }

    #[test]
    fn capacity_route_equals_bayes_route() {
        for regime in [LossRegime::Squared, LossRegime::Realizable, LossRegime::Bounded] {
            for (cmi, n) in [(0.013, 7usize), (0.5, 1), (0.002, 250)] {
                let a = bayes_risk_bound(regime, 1.7, cmi).unwrap().value;
                let b = minimax_capacity_bound(regime, 1.7, n as f64 * cmi, n).unwrap().value;
                assert_relative_eq!(a, b, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn posterior_sampling_bound_fixtures() {
        let env = unit_env();
        let zero = PriorFamily::gaussian_mean_ball(1, 1.0, 0.0).unwrap();
        assert_eq!(posterior_sampling_bound(&env, &zero, 0.0, 10).unwrap().value, 0.0);
        assert_eq!(posterior_sampling_mi_bound(&env, &zero, 0.0, 10).unwrap().value, 0.0);
        assert_relative_eq!(posterior_sampling_bound(&env, &zero, 1.0 / 96.0, 10).unwrap().value, 1.0, epsilon = 1e-14);
        // r = 0.5 (c = 1), n = 50, cmi = 0.002 → argument 0.012 > 1/96: linear branch
        let fam = PriorFamily::gaussian_mean_ball(1, 1.0, 1.0).unwrap();
        let v = posterior_sampling_bound(&env, &fam, 0.002, 50).unwrap();
        assert_relative_eq!(v.inputs["r"], 0.5);
        assert_relative_eq!(v.value, 48.0 * 0.012 + 0.5, epsilon = 1e-12);
        assert_relative_eq!(v.value, legendre_dual_inverse_numeric(&env, 0.012), epsilon = 1e-8);
    }

    #[test]
    fn bounds_reject_zero_samples() {
        let env = unit_env();
        let fam = PriorFamily::gaussian_mean_ball(1, 1.0, 1.0).unwrap();
        assert!(posterior_sampling_bound(&env, &fam, 0.1, 0).is_err());
        assert!(posterior_sampling_mi_bound(&env, &fam, 0.1, 0).is_err());
    }

    #[test]
    fn report_serialises_with_names() {
        let r = bayes_risk_bound(LossRegime::Realizable, 1.0, 0.1).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"bound_name\":\"thm4b\""), "{json}");
        assert_eq!(r.bound_name.as_str(), "thm4b");
    }
}
