//! Monte Carlo excess risk for learners on the Gaussian linear model and the
//! threshold class, plus the empirical check of the sub-exponential
//! cumulant envelope of the posterior-sampling loss.
//!
//! Each replicate integrates the test label analytically: for squared loss
//! `E_Y[(ŷ−Y)² − (f*(X)−Y)² | X, ŷ] = (ŷ − f*(X))²`, and for the threshold
//! class the 0-1 excess given the version space is the learner's error
//! probability. The estimators stay unbiased for the excess risk.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use serde::{Deserialize, Serialize};

use crate::bounds::CumulantEnvelope;
use crate::error::{invalid, Error, Result};
use crate::linear::{posterior_with_prior, Dataset, FeatureMap, LinearModelSpec, ModelSampler, SufficientStats};
use crate::prob::{replicate, CompensatedSum, Gaussian, McEstimate, SeedRng, SeedSpec};
use crate::vc::{version_space, ThresholdAlgorithm, ThresholdClassSpec};

/// Isotropic Gaussian prior `N(mean, var·I)`; `var = 0` is a point mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPrior {
    pub mean: Vec<f64>,
    pub var: f64,
}

impl GaussianPrior {
    pub fn new(mean: Vec<f64>, var: f64) -> Result<Self> {
        let p = Self { mean, var };
        p.validate(p.mean.len())?;
        Ok(p)
    }

    /// The model's own prior `N(μ, σ_w² I)`.
    pub fn of_model(spec: &LinearModelSpec) -> Self {
        Self { mean: spec.mu_prior.clone(), var: spec.sigma_w * spec.sigma_w }
    }

    pub fn point(w: Vec<f64>) -> Self {
        Self { mean: w, var: 0.0 }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.mean.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.mean.len() });
        }
        if !(self.var >= 0.0) || !self.var.is_finite() || self.mean.iter().any(|m| !m.is_finite()) {
            return invalid("prior variance must be finite and non-negative");
        }
        Ok(())
    }

    pub fn to_gaussian(&self) -> Gaussian {
        Gaussian::isotropic(DVector::from_column_slice(&self.mean), self.var).expect("validated prior")
    }

    fn draw(&self, rng: &mut SeedRng) -> DVector<f64> {
        let sd = self.var.sqrt();
        DVector::from_iterator(
            self.mean.len(),
            self.mean.iter().map(|m| {
                let z: f64 = StandardNormal.sample(rng);
                m + sd * z
            }),
        )
    }
}

/// Posterior of an isotropic prior, kept in ridge form:
/// mean `(G + λ'I)⁻¹(ΦᵀY + λ'm)`, covariance `σ_e²(G + λ'I)⁻¹`, `λ' = σ_e²/var`.
struct RidgePosterior {
    mean: DVector<f64>,
    ridge: Option<Cholesky<f64, Dyn>>,
    s2e: f64,
}

impl RidgePosterior {
    fn new(prior: &GaussianPrior, sigma_e: f64, stats: &SufficientStats) -> Self {
        let m = DVector::from_column_slice(&prior.mean);
        let s2e = sigma_e * sigma_e;
        if prior.var == 0.0 {
            return Self { mean: m, ridge: None, s2e };
        }
        let d = m.len();
        let lam = s2e / prior.var;
        let ch = (&stats.gram + DMatrix::identity(d, d) * lam).cholesky().expect("G + λ'I is positive definite");
        let mean = ch.solve(&(&stats.xty + &m * lam));
        Self { mean, ridge: Some(ch), s2e }
    }

    fn predictive_var(&self, f: &DVector<f64>) -> f64 {
        match &self.ridge {
            Some(ch) => (self.s2e * f.dot(&ch.solve(f))).max(0.0),
            None => 0.0,
        }
    }
}

/// A learner for the Gaussian linear model under squared loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinearAlgorithm {
    /// Draw `W'` from the posterior under `prior`, predict `W'ᵀφ(x)`.
    PosteriorSampling { prior: GaussianPrior },
    /// Regularised least squares: the posterior mean under `prior`.
    Rls { prior: GaussianPrior },
    /// Bayes predictor for squared loss under `prior` (the posterior
    /// predictive mean).
    BayesOptimal { prior: GaussianPrior },
    /// Data-independent predictor `weightsᵀφ(x)`.
    Constant { weights: Vec<f64> },
}

impl LinearAlgorithm {
    pub fn posterior_sampling(prior: GaussianPrior) -> Self {
        LinearAlgorithm::PosteriorSampling { prior }
    }

    pub fn rls(prior: GaussianPrior) -> Self {
        LinearAlgorithm::Rls { prior }
    }

    pub fn validate(&self, spec: &LinearModelSpec) -> Result<()> {
        match self {
            LinearAlgorithm::PosteriorSampling { prior } | LinearAlgorithm::Rls { prior } | LinearAlgorithm::BayesOptimal { prior } => {
                prior.validate(spec.d)
            }
            LinearAlgorithm::Constant { weights } => {
                if weights.len() != spec.d {
                    return Err(Error::DimensionMismatch { expected: spec.d, got: weights.len() });
                }
                Ok(())
            }
        }
    }

    /// Prediction at feature vector `f`; draws one normal for posterior
    /// sampling and nothing otherwise.
    fn predict(&self, spec: &LinearModelSpec, stats: &SufficientStats, f: &DVector<f64>, rng: &mut SeedRng) -> f64 {
        match self {
            LinearAlgorithm::PosteriorSampling { prior } => {
                let post = RidgePosterior::new(prior, spec.sigma_e, stats);
                let z: f64 = StandardNormal.sample(rng);
                post.mean.dot(f) + post.predictive_var(f).sqrt() * z
            }
            LinearAlgorithm::Rls { prior } | LinearAlgorithm::BayesOptimal { prior } => {
                RidgePosterior::new(prior, spec.sigma_e, stats).mean.dot(f)
            }
            LinearAlgorithm::Constant { weights } => DVector::from_column_slice(weights).dot(f),
        }
    }
}

/// Monte Carlo excess-risk estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub reps: usize,
    pub seed: SeedSpec,
}

impl RiskEstimate {
    fn from_samples(xs: &[f64], seed: SeedSpec) -> Self {
        let est = McEstimate::from_samples(xs);
        Self { mean: est.mean, std_error: est.std_error, reps: est.reps, seed }
    }
}

/// Two learners evaluated on shared replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub first: RiskEstimate,
    pub second: RiskEstimate,
    /// Per-replicate `second − first`.
    pub difference: RiskEstimate,
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 2 {
        return invalid("reps must be at least 2");
    }
    Ok(())
}

enum World<'a> {
    Fixed(DVector<f64>),
    Prior(&'a GaussianPrior),
}

/// One replicate: parameter, training set, test input, then one draw per
/// randomised learner in order. Returns `(ŷ_i − f*(x))²` per learner.
fn linear_replicate(spec: &LinearModelSpec, sampler: &ModelSampler, algs: &[&LinearAlgorithm], world: &World, n: usize, rng: &mut SeedRng) -> Vec<f64> {
    let w = match world {
        World::Fixed(w) => w.clone(),
        World::Prior(p) => p.draw(rng),
    };
    let stats = sampler.dataset(&w, n, rng).stats();
    let f = sampler.features(rng);
    let target = w.dot(&f);
    algs.iter()
        .map(|a| {
            let e = a.predict(spec, &stats, &f, rng) - target;
            e * e
        })
        .collect()
}

fn linear_mc(spec: &LinearModelSpec, algs: &[&LinearAlgorithm], world: World, n: usize, reps: usize, seed: SeedSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    check_reps(reps)?;
    for a in algs {
        a.validate(spec)?;
    }
    if let World::Fixed(w) = &world {
        if w.len() != spec.d {
            return Err(Error::DimensionMismatch { expected: spec.d, got: w.len() });
        }
    }
    if let World::Prior(p) = &world {
        p.validate(spec.d)?;
    }
    let sampler = ModelSampler::new(spec);
    Ok(replicate(reps, seed, |rng, _| linear_replicate(spec, &sampler, algs, &world, n, rng)))
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

/// Excess risk `e(A, w)` of a linear-model learner against the fixed world `w`.
pub fn excess_risk_mc(spec: &LinearModelSpec, alg: &LinearAlgorithm, w: &[f64], n: usize, reps: usize, seed: SeedSpec) -> Result<RiskEstimate> {
    let rows = linear_mc(spec, &[alg], World::Fixed(DVector::from_column_slice(w)), n, reps, seed)?;
    Ok(RiskEstimate::from_samples(&column(&rows, 0), seed))
}

/// Bayes excess risk `E_W[e(A, W)]` with `W` drawn from `prior`.
pub fn bayes_excess_risk_mc(spec: &LinearModelSpec, alg: &LinearAlgorithm, prior: &GaussianPrior, n: usize, reps: usize, seed: SeedSpec) -> Result<RiskEstimate> {
    let rows = linear_mc(spec, &[alg], World::Prior(prior), n, reps, seed)?;
    Ok(RiskEstimate::from_samples(&column(&rows, 0), seed))
}

/// Bayes excess risk of two learners on shared `(W, Z^n, X)` draws.
pub fn compare_bayes_excess(
    spec: &LinearModelSpec,
    first: &LinearAlgorithm,
    second: &LinearAlgorithm,
    prior: &GaussianPrior,
    n: usize,
    reps: usize,
    seed: SeedSpec,
) -> Result<PairedComparison> {
    let rows = linear_mc(spec, &[first, second], World::Prior(prior), n, reps, seed)?;
    let a = column(&rows, 0);
    let b = column(&rows, 1);
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
    Ok(PairedComparison {
        first: RiskEstimate::from_samples(&a, seed),
        second: RiskEstimate::from_samples(&b, seed),
        difference: RiskEstimate::from_samples(&diff, seed),
    })
}

/// One posterior-sampling prediction: draws `W'` from the posterior of `p0`
/// given `data` and returns `W'ᵀφ(x)`.
pub fn run_posterior_sampling(spec: &LinearModelSpec, p0: &Gaussian, data: &Dataset, x: &[f64], seed: SeedSpec) -> Result<f64> {
    let post = posterior_with_prior(p0, spec.sigma_e, &data.stats())?;
    let f = spec.features(x);
    if f.len() != post.dim() {
        return Err(Error::DimensionMismatch { expected: post.dim(), got: f.len() });
    }
    Ok(post.sampler().draw_projected(&f, &mut seed.rng()))
}

/// Closed-form excess risk against `w` when `φ ≡ 1` (scalar model).
pub fn exact_excess_constant_feature(spec: &LinearModelSpec, alg: &LinearAlgorithm, w: f64, n: usize) -> Result<f64> {
    if spec.d != 1 || spec.feature_map != (FeatureMap::Polynomial { degree: 0 }) {
        return Err(Error::Unsupported("closed-form excess risk needs the constant-feature model".into()));
    }
    alg.validate(spec)?;
    let s2e = spec.sigma_e * spec.sigma_e;
    let nf = n as f64;
    let ridge_excess = |prior: &GaussianPrior| -> (f64, f64) {
        let m = prior.mean[0];
        if prior.var == 0.0 {
            return ((m - w).powi(2), 0.0);
        }
        let lam = s2e / prior.var;
        let bias = lam * (m - w) / (nf + lam);
        (bias * bias + nf * s2e / (nf + lam).powi(2), s2e / (nf + lam))
    };
    Ok(match alg {
        LinearAlgorithm::Rls { prior } | LinearAlgorithm::BayesOptimal { prior } => ridge_excess(prior).0,
        LinearAlgorithm::PosteriorSampling { prior } => {
            let (e, v) = ridge_excess(prior);
            e + v
        }
        LinearAlgorithm::Constant { weights } => (weights[0] - w).powi(2),
    })
}

fn draw_index(probs: &[f64], rng: &mut SeedRng) -> usize {
    let u: f64 = StandardUniform.sample(rng);
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

fn threshold_replicate(spec: &ThresholdClassSpec, alg: &ThresholdAlgorithm, t: usize, n: usize, rng: &mut SeedRng) -> f64 {
    let xs: Vec<usize> = (0..n).map(|_| draw_index(&spec.px, rng) + 1).collect();
    let x = draw_index(&spec.px, rng) + 1;
    let (lo, hi) = version_space(spec.k, &xs, t);
    alg.error_prob(lo, hi, x, t)
}

fn threshold_checks(spec: &ThresholdClassSpec, alg: &ThresholdAlgorithm, reps: usize) -> Result<()> {
    spec.validate()?;
    alg.validate(spec.k)?;
    check_reps(reps)
}

/// 0-1 excess risk of a threshold learner against the fixed world `h_t`.
pub fn threshold_excess_mc(spec: &ThresholdClassSpec, alg: &ThresholdAlgorithm, t: usize, n: usize, reps: usize, seed: SeedSpec) -> Result<RiskEstimate> {
    threshold_checks(spec, alg, reps)?;
    if t == 0 || t > spec.k + 1 {
        return invalid(format!("threshold {t} outside 1..={}", spec.k + 1));
    }
    let xs = replicate(reps, seed, |rng, _| threshold_replicate(spec, alg, t, n, rng));
    Ok(RiskEstimate::from_samples(&xs, seed))
}

/// Bayes 0-1 excess risk with `T` drawn from the spec's prior.
pub fn threshold_bayes_excess_mc(spec: &ThresholdClassSpec, alg: &ThresholdAlgorithm, n: usize, reps: usize, seed: SeedSpec) -> Result<RiskEstimate> {
    threshold_checks(spec, alg, reps)?;
    let xs = replicate(reps, seed, |rng, _| {
        let t = draw_index(&spec.prior_t, rng) + 1;
        threshold_replicate(spec, alg, t, n, rng)
    });
    Ok(RiskEstimate::from_samples(&xs, seed))
}

/// A training set and test input at which the envelope is checked.
#[derive(Debug, Clone)]
pub struct EnvelopeCase {
    pub data: Dataset,
    pub x: Vec<f64>,
}

/// Draws `count` cases: `W` from the model prior, `n` uniform on `1..=n_max`,
/// then `Z^n` and a test input.
pub fn random_envelope_cases(spec: &LinearModelSpec, count: usize, n_max: usize, seed: SeedSpec) -> Result<Vec<EnvelopeCase>> {
    spec.validate()?;
    if n_max == 0 {
        return invalid("n_max must be positive");
    }
    let prior = GaussianPrior::of_model(spec);
    let sampler = ModelSampler::new(spec);
    Ok(replicate(count, seed, |rng, _| {
        let w = prior.draw(rng);
        let n = rng.random_range(1..=n_max);
        let data = sampler.dataset(&w, n, rng);
        let x = sampler.input(rng);
        EnvelopeCase { data, x }
    }))
}

/// One `(case, λ)` cell of the envelope check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub case: usize,
    pub lambda: f64,
    /// Estimate of `log E[exp(−λ(L − E L))]`.
    pub log_mgf: f64,
    pub std_error: f64,
    pub envelope: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub rows: Vec<EnvelopeRow>,
    pub violations: usize,
}

/// Default grid `λ = k·b/8`, `k = 0..8`.
pub fn default_lambda_grid(env: &CumulantEnvelope) -> Vec<f64> {
    (0..8).map(|k| env.b() * k as f64 / 8.0).collect()
}

/// Checks `log E[e^{−λ(L−EL)}] ≤ φ(λ) + 3 se` for the posterior-sampling
/// loss `L = (W_PSᵀφ(x) − Y)²`, with `W_PS` from the posterior of `p0`, and
/// `Y = Wᵀφ(x) + E` with `W` from the posterior of the model's own prior.
/// `E L` is replaced by the sample mean of the same draws.
pub fn envelope_check(
    spec: &LinearModelSpec,
    p0: &GaussianPrior,
    cases: &[EnvelopeCase],
    lambdas: &[f64],
    draws: usize,
    seed: SeedSpec,
) -> Result<EnvelopeReport> {
    spec.validate()?;
    p0.validate(spec.d)?;
    if draws < 2 {
        return invalid("draws must be at least 2");
    }
    let env = CumulantEnvelope::sub_exponential(spec.sigma_w, spec.sigma_e)?;
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0 && **l < env.b())) {
        return invalid(format!("λ = {l} outside [0, b)"));
    }
    let truth = GaussianPrior::of_model(spec);
    let mut rows = Vec::with_capacity(cases.len() * lambdas.len());
    for (ci, case) in cases.iter().enumerate() {
        let stats = case.data.stats();
        let f = spec.features(&case.x);
        let ps = RidgePosterior::new(p0, spec.sigma_e, &stats);
        let tr = RidgePosterior::new(&truth, spec.sigma_e, &stats);
        let (m_ps, sd_ps) = (ps.mean.dot(&f), ps.predictive_var(&f).sqrt());
        let (m_tr, sd_tr) = (tr.mean.dot(&f), tr.predictive_var(&f).sqrt());
        let se = spec.sigma_e;
        let losses = replicate(draws, seed.child(ci as u64), |rng, _| {
            let z: [f64; 3] = [StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng)];
            let pred = m_ps + sd_ps * z[0];
            let y = m_tr + sd_tr * z[1] + se * z[2];
            (pred - y).powi(2)
        });
        let mean_loss = losses.iter().copied().collect::<CompensatedSum>().value() / draws as f64;
        for &lambda in lambdas {
            let e: Vec<f64> = losses.iter().map(|l| (-lambda * (l - mean_loss)).exp()).collect();
            let est = McEstimate::from_samples(&e);
            let log_mgf = est.mean.ln();
            // delta method for the log
            let std_error = est.std_error / est.mean;
            let envelope = env.phi(lambda);
            let violated = log_mgf > envelope + 3.0 * std_error;
            rows.push(EnvelopeRow { case: ci, lambda, log_mgf, std_error, envelope, violated });
        }
    }
    let violations = rows.iter().filter(|r| r.violated).count();
    Ok(EnvelopeReport { rows, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_model() -> LinearModelSpec {
        LinearModelSpec::constant_feature(1.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn constant_optimal_is_zero() {
        let spec = LinearModelSpec::identity_unit_box(2, 1.0, 1.0, vec![0.0, 0.0], 1.0).unwrap();
        let w = vec![0.3, -0.2];
        let alg = LinearAlgorithm::Constant { weights: w.clone() };
        let r = excess_risk_mc(&spec, &alg, &w, 5, 100, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(r.mean, 0.0);
        let bo = LinearAlgorithm::BayesOptimal { prior: GaussianPrior::point(w.clone()) };
        assert_eq!(excess_risk_mc(&spec, &bo, &w, 5, 100, SeedSpec::new(1, 0)).unwrap().mean, 0.0);
    }

    #[test]
    fn reps_guard() {
        let alg = LinearAlgorithm::rls(GaussianPrior::of_model(&unit_model()));
        assert!(excess_risk_mc(&unit_model(), &alg, &[0.0], 1, 1, SeedSpec::new(1, 0)).is_err());
    }

    #[test]
    fn rls_one_dim_closed_form() {
        let spec = unit_model();
        let prior = GaussianPrior::of_model(&spec);
        let rls = LinearAlgorithm::rls(prior.clone());
        let ps = LinearAlgorithm::posterior_sampling(prior);
        assert_relative_eq!(exact_excess_constant_feature(&spec, &rls, 0.0, 1).unwrap(), 0.25);
        assert_relative_eq!(exact_excess_constant_feature(&spec, &ps, 0.0, 1).unwrap(), 0.75);
        for (alg, exact) in [(rls, 0.25), (ps, 0.75)] {
            let r = excess_risk_mc(&spec, &alg, &[0.0], 1, 100_000, SeedSpec::new(7, 0)).unwrap();
            assert!((r.mean - exact).abs() <= 3.0 * r.std_error, "{} vs {exact} ± {}", r.mean, r.std_error);
        }
    }

    #[test]
    fn ps_mean_matches_rls() {
        let spec = LinearModelSpec::identity_unit_box(2, 1.0, 0.5, vec![0.2, 0.1], 1.0).unwrap();
        let data = crate::linear::generate(&spec, &DVector::from_vec(vec![0.4, -0.3]), 6, SeedSpec::new(3, 0)).unwrap();
        let x = vec![0.5, -0.1];
        let target = crate::linear::rls_predict(&spec, &data, &x);
        let draws: Vec<f64> = (0..100_000).map(|i| run_posterior_sampling(&spec, &spec.prior(), &data, &x, SeedSpec::new(11, i)).unwrap()).collect();
        let est = McEstimate::from_samples(&draws);
        assert!((est.mean - target).abs() <= 3.0 * est.std_error);
        let a = run_posterior_sampling(&spec, &spec.prior(), &data, &x, SeedSpec::new(5, 5)).unwrap();
        let b = run_posterior_sampling(&spec, &spec.prior(), &data, &x, SeedSpec::new(5, 5)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn ps_with_vanishing_prior_is_deterministic() {
        let spec = LinearModelSpec::identity_unit_box(2, 1.0, 1.0, vec![0.3, 0.4], 1.0).unwrap();
        let data = crate::linear::generate(&spec, &DVector::from_vec(vec![1.0, 1.0]), 4, SeedSpec::new(3, 0)).unwrap();
        let p0 = Gaussian::isotropic(DVector::from_vec(vec![0.3, 0.4]), 0.0).unwrap();
        let x = vec![0.2, 0.5];
        let v = run_posterior_sampling(&spec, &p0, &data, &x, SeedSpec::new(1, 2)).unwrap();
        assert_relative_eq!(v, 0.3 * 0.2 + 0.4 * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn ridge_route_matches_general_posterior() {
        let spec = LinearModelSpec::identity_unit_box(3, 0.7, 0.4, vec![0.1, 0.0, -0.2], 1.0).unwrap();
        let data = crate::linear::generate(&spec, &DVector::from_vec(vec![0.2, 0.5, -0.1]), 9, SeedSpec::new(4, 0)).unwrap();
        let stats = data.stats();
        let prior = GaussianPrior::new(vec![0.3, -0.1, 0.0], 0.8).unwrap();
        let general = posterior_with_prior(&prior.to_gaussian(), spec.sigma_e, &stats).unwrap();
        let ridge = RidgePosterior::new(&prior, spec.sigma_e, &stats);
        let f = DVector::from_vec(vec![0.3, -0.4, 0.2]);
        assert_relative_eq!(ridge.mean, general.mean().clone(), epsilon = 1e-10);
        assert_relative_eq!(ridge.predictive_var(&f), f.dot(&(general.cov() * &f)), epsilon = 1e-10);
    }

    #[test]
    fn paired_comparison_is_deterministic() {
        let spec = LinearModelSpec::identity_unit_box(2, 1.0, 1.0, vec![0.5, 0.0], 1.0).unwrap();
        let prior = GaussianPrior::of_model(&spec);
        let a = LinearAlgorithm::rls(prior.clone());
        let b = LinearAlgorithm::posterior_sampling(prior.clone());
        let r1 = compare_bayes_excess(&spec, &a, &b, &prior, 8, 2000, SeedSpec::new(9, 1)).unwrap();
        let r2 = compare_bayes_excess(&spec, &a, &b, &prior, 8, 2000, SeedSpec::new(9, 1)).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.difference.mean >= -3.0 * r1.difference.std_error);
    }

    #[test]
    fn threshold_mc_matches_exact() {
        let spec = ThresholdClassSpec::new(3, vec![0.2, 0.5, 0.3], vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        let alg = ThresholdAlgorithm::PosteriorSampling { prior_t: spec.prior_t.clone() };
        let exact = crate::vc::exact_bayes_excess_of(&spec, 3, &alg).unwrap();
        let mc = threshold_bayes_excess_mc(&spec, &alg, 3, 50_000, SeedSpec::new(2, 0)).unwrap();
        assert!((mc.mean - exact).abs() <= 3.0 * mc.std_error, "{} vs {exact}", mc.mean);
        let exact_t = crate::vc::exact_excess_at(&spec, 3, &alg, 2).unwrap();
        let mc_t = threshold_excess_mc(&spec, &alg, 2, 3, 50_000, SeedSpec::new(2, 1)).unwrap();
        assert!((mc_t.mean - exact_t).abs() <= 3.0 * mc_t.std_error);
    }

    #[test]
    fn envelope_lambda_zero_is_zero() {
        let spec = LinearModelSpec::identity_unit_box(2, 1.0, 1.0, vec![0.5, 0.5], 1.0).unwrap();
        let cases = random_envelope_cases(&spec, 2, 5, SeedSpec::new(1, 0)).unwrap();
        let p0 = GaussianPrior::new(vec![0.0, 0.0], 1.0).unwrap();
        let rep = envelope_check(&spec, &p0, &cases, &[0.0], 1000, SeedSpec::new(2, 0)).unwrap();
        for r in &rep.rows {
            assert_eq!(r.log_mgf, 0.0);
            assert_eq!(r.envelope, 0.0);
        }
        assert!(envelope_check(&spec, &p0, &cases, &[1.0], 1000, SeedSpec::new(2, 0)).is_err());
    }
}
