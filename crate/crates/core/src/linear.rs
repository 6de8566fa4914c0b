//! Gaussian linear model `Y = Wᵀφ(X) + E` with prior `W ~ N(μ, σ_w² I)` and
//! noise `E ~ N(0, σ_e²)`.
//!
//! Provides data generation, the conjugate posterior, the regularised least
//! squares predictor (the posterior mean) and Monte Carlo evaluations of
//! `I(W; Z^n)` and `I(W; Y | X, Z^n)`.
//!
//! Throughout, `λ = σ_e² / σ_w²`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::prob::{replicate, Gaussian, GaussianSampler, McEstimate, SeedRng, SeedSpec};

/// Eigenvalues of `ΦᵀΦ / n` below this are treated as exact zeros.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Map from raw inputs to feature vectors in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureMap {
    /// `φ(x) = x` with `x ∈ R^d`.
    Identity,
    /// `φ(x) = (1, x, x², …, x^degree)` for scalar `x`; degree 0 is `φ ≡ 1`.
    Polynomial { degree: usize },
    /// `φ(x) = table[x]` for an index input `x ∈ {0, …, rows-1}`.
    Tabulated { table: Vec<Vec<f64>> },
}

impl FeatureMap {
    /// Dimension of raw inputs.
    pub fn input_dim(&self, d: usize) -> usize {
        match self {
            FeatureMap::Identity => d,
            FeatureMap::Polynomial { .. } | FeatureMap::Tabulated { .. } => 1,
        }
    }

    pub fn feature_dim(&self, d: usize) -> usize {
        match self {
            FeatureMap::Identity => d,
            FeatureMap::Polynomial { degree } => degree + 1,
            FeatureMap::Tabulated { table } => table.first().map_or(0, Vec::len),
        }
    }

    pub fn apply(&self, x: &[f64]) -> DVector<f64> {
        match self {
            FeatureMap::Identity => DVector::from_column_slice(x),
            FeatureMap::Polynomial { degree } => {
                DVector::from_iterator(degree + 1, (0..=*degree).map(|p| x[0].powi(p as i32)))
            }
            FeatureMap::Tabulated { table } => {
                let row = x[0].round().max(0.0) as usize;
                DVector::from_vec(table[row.min(table.len() - 1)].clone())
            }
        }
    }
}

/// Distribution of the raw input `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputDist {
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Index inputs for tabulated features.
    Discrete { probs: Vec<f64> },
}

impl InputDist {
    fn dim(&self) -> usize {
        match self {
            InputDist::Gaussian { mean, .. } => mean.len(),
            InputDist::UniformBox { lo, .. } => lo.len(),
            InputDist::Discrete { .. } => 1,
        }
    }
}

/// Data-generating process together with the prior over `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModelSpec {
    pub d: usize,
    pub feature_map: FeatureMap,
    pub sigma_w: f64,
    pub sigma_e: f64,
    pub mu_prior: Vec<f64>,
    /// Radius of the prior-mean ball `‖μ‖ ≤ c`.
    pub c: f64,
    pub input_dist: InputDist,
}

/// Input sampler prepared once per model.
#[derive(Debug, Clone)]
enum InputSampler {
    Gaussian(GaussianSampler),
    UniformBox { lo: Vec<f64>, width: Vec<f64> },
    Discrete { cumulative: Vec<f64> },
}

impl InputSampler {
    fn draw(&self, rng: &mut SeedRng) -> Vec<f64> {
        match self {
            InputSampler::Gaussian(s) => s.draw(rng).iter().copied().collect(),
            InputSampler::UniformBox { lo, width } => lo
                .iter()
                .zip(width)
                .map(|(l, w)| {
                    let u: f64 = StandardUniform.sample(rng);
                    l + w * u
                })
                .collect(),
            InputSampler::Discrete { cumulative } => {
                let u: f64 = StandardUniform.sample(rng);
                let idx = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
                vec![idx as f64]
            }
        }
    }
}

impl LinearModelSpec {
    /// Model with `φ ≡ 1` (d = 1), the setting where `I(W;Z^n)` is a scalar
    /// Gaussian channel.
    pub fn constant_feature(sigma_w: f64, sigma_e: f64, mu: f64, c: f64) -> Result<Self> {
        let spec = Self {
            d: 1,
            feature_map: FeatureMap::Polynomial { degree: 0 },
            sigma_w,
            sigma_e,
            mu_prior: vec![mu],
            c,
            input_dist: InputDist::UniformBox { lo: vec![0.0], hi: vec![1.0] },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Identity features with inputs uniform on `[-1/√d, 1/√d]^d`, so that
    /// `‖φ(x)‖ ≤ 1`.
    pub fn identity_unit_box(d: usize, sigma_w: f64, sigma_e: f64, mu: Vec<f64>, c: f64) -> Result<Self> {
        let h = 1.0 / (d as f64).sqrt();
        let spec = Self {
            d,
            feature_map: FeatureMap::Identity,
            sigma_w,
            sigma_e,
            mu_prior: mu,
            c,
            input_dist: InputDist::UniformBox { lo: vec![-h; d], hi: vec![h; d] },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return invalid("feature dimension must be positive");
        }
        if !(self.sigma_w > 0.0) || !(self.sigma_e > 0.0) || !self.sigma_w.is_finite() || !self.sigma_e.is_finite() {
            return invalid("sigma_w and sigma_e must be positive and finite");
        }
        if self.mu_prior.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: self.mu_prior.len() });
        }
        if self.feature_map.feature_dim(self.d) != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: self.feature_map.feature_dim(self.d) });
        }
        if let FeatureMap::Tabulated { table } = &self.feature_map {
            if table.iter().any(|r| r.len() != self.d) {
                return invalid("tabulated feature rows must all have length d");
            }
            match &self.input_dist {
                InputDist::Discrete { probs } if probs.len() == table.len() => {}
                _ => return invalid("tabulated features need a discrete input distribution over the table rows"),
            }
        }
        let in_dim = self.feature_map.input_dim(self.d);
        if self.input_dist.dim() != in_dim {
            return Err(Error::DimensionMismatch { expected: in_dim, got: self.input_dist.dim() });
        }
        match &self.input_dist {
            InputDist::Gaussian { mean, cov } => {
                let m = DMatrix::from_fn(mean.len(), mean.len(), |i, j| cov.get(i).and_then(|r| r.get(j)).copied().unwrap_or(f64::NAN));
                Gaussian::new(DVector::from_vec(mean.clone()), m)?;
            }
            InputDist::UniformBox { lo, hi } => {
                if lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return invalid("uniform box needs lo <= hi componentwise");
                }
            }
            InputDist::Discrete { probs } => check_simplex(probs, "input probabilities")?,
        }
        if !(self.c >= 0.0) {
            return invalid("radius c must be non-negative");
        }
        let norm = self.mu_prior.iter().map(|m| m * m).sum::<f64>().sqrt();
        if norm > self.c * (1.0 + 1e-12) + 1e-12 {
            return invalid(format!("prior mean norm {norm} exceeds radius c = {}", self.c));
        }
        Ok(())
    }

    /// `λ = σ_e² / σ_w²`.
    pub fn lambda(&self) -> f64 {
        self.sigma_e * self.sigma_e / (self.sigma_w * self.sigma_w)
    }

    pub fn mu(&self) -> DVector<f64> {
        DVector::from_vec(self.mu_prior.clone())
    }

    /// The prior `N(μ, σ_w² I)`.
    pub fn prior(&self) -> Gaussian {
        Gaussian::isotropic(self.mu(), self.sigma_w * self.sigma_w).expect("validated spec")
    }

    /// Same model with a different prior mean.
    pub fn with_mu(&self, mu: Vec<f64>) -> Self {
        Self { mu_prior: mu, ..self.clone() }
    }

    pub fn features(&self, x: &[f64]) -> DVector<f64> {
        self.feature_map.apply(x)
    }

    fn input_sampler(&self) -> InputSampler {
        match &self.input_dist {
            InputDist::Gaussian { mean, cov } => {
                let d = mean.len();
                let m = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
                let g = Gaussian::new(DVector::from_vec(mean.clone()), m).expect("validated spec");
                InputSampler::Gaussian(g.sampler())
            }
            InputDist::UniformBox { lo, hi } => InputSampler::UniformBox {
                lo: lo.clone(),
                width: lo.iter().zip(hi).map(|(l, h)| h - l).collect(),
            },
            InputDist::Discrete { probs } => {
                let mut acc = 0.0;
                InputSampler::Discrete {
                    cumulative: probs
                        .iter()
                        .map(|p| {
                            acc += p;
                            acc
                        })
                        .collect(),
                }
            }
        }
    }
}

pub(crate) fn check_simplex(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() || p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return invalid(format!("{what} must be non-negative and finite"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return invalid(format!("{what} must sum to 1 (got {s})"));
    }
    Ok(())
}

/// Training sample with its design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    xs: Vec<Vec<f64>>,
    ys: DVector<f64>,
    phi: DMatrix<f64>,
}

impl Dataset {
    pub fn new(spec: &LinearModelSpec, xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
        }
        let in_dim = spec.feature_map.input_dim(spec.d);
        if let Some(bad) = xs.iter().find(|x| x.len() != in_dim) {
            return Err(Error::DimensionMismatch { expected: in_dim, got: bad.len() });
        }
        let mut phi = DMatrix::zeros(xs.len(), spec.d);
        for (i, x) in xs.iter().enumerate() {
            phi.row_mut(i).copy_from(&spec.features(x).transpose());
        }
        Ok(Self { xs, ys: DVector::from_vec(ys), phi })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn ys(&self) -> &DVector<f64> {
        &self.ys
    }

    /// Design matrix `Φ` (n × d).
    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn stats(&self) -> SufficientStats {
        SufficientStats { n: self.len(), gram: self.phi.tr_mul(&self.phi), xty: self.phi.tr_mul(&self.ys) }
    }
}

/// `ΦᵀΦ` and `ΦᵀY`; everything the conjugate update needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub n: usize,
    pub gram: DMatrix<f64>,
    pub xty: DVector<f64>,
}

/// Draws `n` pairs with `Y_i = wᵀφ(X_i) + E_i`.
pub fn generate(spec: &LinearModelSpec, w: &DVector<f64>, n: usize, seed: SeedSpec) -> Result<Dataset> {
    if w.len() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, got: w.len() });
    }
    let mut rng = seed.rng();
    let (xs, ys) = draw_pairs(spec, &spec.input_sampler(), w, n, &mut rng);
    Dataset::new(spec, xs, ys)
}

fn draw_pairs(
    spec: &LinearModelSpec,
    inputs: &InputSampler,
    w: &DVector<f64>,
    n: usize,
    rng: &mut SeedRng,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = inputs.draw(rng);
        let e: f64 = StandardNormal.sample(rng);
        ys.push(w.dot(&spec.features(&x)) + spec.sigma_e * e);
        xs.push(x);
    }
    (xs, ys)
}

/// Per-replicate draws shared by the Monte Carlo routines of this crate.
pub(crate) struct ModelSampler<'a> {
    pub spec: &'a LinearModelSpec,
    inputs: InputSampler,
}

impl<'a> ModelSampler<'a> {
    pub fn new(spec: &'a LinearModelSpec) -> Self {
        Self { spec, inputs: spec.input_sampler() }
    }

    pub fn input(&self, rng: &mut SeedRng) -> Vec<f64> {
        self.inputs.draw(rng)
    }

    pub fn features(&self, rng: &mut SeedRng) -> DVector<f64> {
        self.spec.features(&self.inputs.draw(rng))
    }

    pub fn dataset(&self, w: &DVector<f64>, n: usize, rng: &mut SeedRng) -> Dataset {
        let (xs, ys) = draw_pairs(self.spec, &self.inputs, w, n, rng);
        Dataset::new(self.spec, xs, ys).expect("sampled inputs match the model")
    }

    /// `ΦᵀΦ` for `n` fresh inputs (labels not needed).
    pub fn gram(&self, n: usize, rng: &mut SeedRng) -> DMatrix<f64> {
        let d = self.spec.d;
        let mut g = DMatrix::zeros(d, d);
        for _ in 0..n {
            let f = self.features(rng);
            g.ger(1.0, &f, &f, 1.0);
        }
        g
    }
}

/// Conjugate posterior under the model's own prior:
/// mean `(ΦᵀΦ + λI)⁻¹(ΦᵀY + λμ)`, covariance `(ΦᵀΦ/σ_e² + I/σ_w²)⁻¹`.
pub fn posterior(spec: &LinearModelSpec, data: &Dataset) -> Gaussian {
    posterior_from_stats(spec, &data.stats())
}

pub fn posterior_from_stats(spec: &LinearModelSpec, stats: &SufficientStats) -> Gaussian {
    let d = spec.d;
    let lambda = spec.lambda();
    let ridge = &stats.gram + DMatrix::identity(d, d) * lambda;
    let ch = ridge.cholesky().expect("ΦᵀΦ + λI is positive definite");
    let mean = ch.solve(&(&stats.xty + spec.mu() * lambda));
    let precision = &stats.gram / (spec.sigma_e * spec.sigma_e) + DMatrix::identity(d, d) / (spec.sigma_w * spec.sigma_w);
    let cov = precision.cholesky().expect("posterior precision is positive definite").inverse();
    let cov = (&cov + cov.transpose()) * 0.5;
    Gaussian::new(mean, cov).expect("posterior covariance is PSD")
}

/// Posterior for an arbitrary Gaussian prior (possibly degenerate) and noise
/// level `sigma_e`, via `Σ = Σ₀(I + ΦᵀΦΣ₀/σ_e²)⁻¹`.
pub fn posterior_with_prior(prior: &Gaussian, sigma_e: f64, stats: &SufficientStats) -> Result<Gaussian> {
    let d = prior.dim();
    if stats.gram.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, got: stats.gram.nrows() });
    }
    if stats.n == 0 {
        return Ok(prior.clone());
    }
    let s2 = sigma_e * sigma_e;
    let s0 = prior.cov();
    let m_t = DMatrix::identity(d, d) + s0 * &stats.gram / s2;
    let cov = m_t.lu().solve(s0).ok_or(Error::Singular("I + Σ₀ΦᵀΦ/σ_e²"))?;
    let cov = (&cov + cov.transpose()) * 0.5;
    let innovation = &stats.xty - &stats.gram * prior.mean();
    let mean = prior.mean() + &cov * innovation / s2;
    // clip round-off negatives
    let eig = SymmetricEigen::new(cov.clone());
    let cov = if eig.eigenvalues.min() < 0.0 {
        let clipped = eig.eigenvalues.map(|v| v.max(0.0));
        &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
    } else {
        cov
    };
    Gaussian::new(mean, cov)
}

/// Regularised least squares prediction `μ_W^{z^n}ᵀ φ(x)`.
pub fn rls_predict(spec: &LinearModelSpec, data: &Dataset, x: &[f64]) -> f64 {
    posterior(spec, data).mean().dot(&spec.features(x))
}

/// Eigenvalues `n σ̂_i` of `ΦᵀΦ`, with `σ̂_i < 1e-12` clamped to zero.
pub fn scaled_eigenvalues(stats: &SufficientStats) -> Vec<f64> {
    if stats.n == 0 {
        return vec![0.0; stats.gram.nrows()];
    }
    let n = stats.n as f64;
    SymmetricEigen::new(stats.gram.clone())
        .eigenvalues
        .iter()
        .map(|&v| if v / n < EIGEN_FLOOR { 0.0 } else { v })
        .collect()
}

/// `KL(P_W^{z^n} ‖ P_W)` written through the eigenvalues of `ΦᵀΦ/n`;
/// its expectation over `Z^n` is `I(W; Z^n)`.
pub fn mi_integrand(spec: &LinearModelSpec, stats: &SufficientStats) -> f64 {
    if stats.n == 0 {
        return 0.0;
    }
    let lambda = spec.lambda();
    let s2w = spec.sigma_w * spec.sigma_w;
    let s2e = spec.sigma_e * spec.sigma_e;
    let eig = scaled_eigenvalues(stats);
    let d = spec.d as f64;
    let log_ratio: f64 = d * s2w.ln() - eig.iter().map(|&e| (s2e / (e + lambda)).ln()).sum::<f64>();
    let trace: f64 = eig.iter().map(|&e| lambda / (e + lambda)).sum();
    let shift = (posterior_from_stats(spec, stats).mean() - spec.mu()).norm_squared() / s2w;
    0.5 * (log_ratio - d + trace + shift)
}

/// Upper bound on the `I(W;Z^n)` integrand in terms of the effective
/// dimension: `-Σ log(λ/(nσ̂_i+λ)) + ‖μ_W^{z^n} − μ‖²/σ_w²`.
pub fn effective_dim_bound(spec: &LinearModelSpec, data: &Dataset) -> f64 {
    effective_dim_bound_from_stats(spec, &data.stats())
}

pub fn effective_dim_bound_from_stats(spec: &LinearModelSpec, stats: &SufficientStats) -> f64 {
    if stats.n == 0 {
        return 0.0;
    }
    let lambda = spec.lambda();
    let logs: f64 = scaled_eigenvalues(stats).iter().map(|&e| -(lambda / (e + lambda)).ln()).sum();
    let shift = (posterior_from_stats(spec, stats).mean() - spec.mu()).norm_squared() / (spec.sigma_w * spec.sigma_w);
    logs + shift
}

/// Monte Carlo estimate of `I(W; Z^n)`: `W` drawn from the prior, `Z^n` from
/// the model, closed-form KL per draw.
pub fn mi_w_zn(spec: &LinearModelSpec, n: usize, mc_reps: usize, seed: SeedSpec) -> Result<McEstimate> {
    if mc_reps == 0 {
        return invalid("mc_reps must be at least 1");
    }
    if n == 0 {
        return Ok(McEstimate { mean: 0.0, std_error: 0.0, reps: mc_reps });
    }
    let sampler = ModelSampler::new(spec);
    let prior = spec.prior().sampler();
    let vals = replicate(mc_reps, seed, |rng, _| {
        let w = prior.draw(rng);
        let data = sampler.dataset(&w, n, rng);
        mi_integrand(spec, &data.stats())
    });
    Ok(McEstimate::from_samples(&vals))
}

/// Monte Carlo average of the effective-dimension bound over the same draws
/// `mi_w_zn` would use with the same seed.
pub fn effective_dim_bound_mc(spec: &LinearModelSpec, n: usize, mc_reps: usize, seed: SeedSpec) -> Result<McEstimate> {
    if mc_reps == 0 {
        return invalid("mc_reps must be at least 1");
    }
    let sampler = ModelSampler::new(spec);
    let prior = spec.prior().sampler();
    let vals = replicate(mc_reps, seed, |rng, _| {
        let w = prior.draw(rng);
        let data = sampler.dataset(&w, n, rng);
        effective_dim_bound(spec, &data)
    });
    Ok(McEstimate::from_samples(&vals))
}

/// Monte Carlo estimate of `I(W; Y | X, Z^n)`, using the exact per-draw value
/// `½ log(1 + φ(X)ᵀ Σ_W^{Z^n} φ(X) / σ_e²)`.
pub fn cmi_y_given_xzn(spec: &LinearModelSpec, n: usize, mc_reps: usize, seed: SeedSpec) -> Result<McEstimate> {
    if mc_reps == 0 {
        return invalid("mc_reps must be at least 1");
    }
    let sampler = ModelSampler::new(spec);
    let d = spec.d;
    let lambda = spec.lambda();
    let vals = replicate(mc_reps, seed, |rng, _| {
        let gram = sampler.gram(n, rng);
        let ridge = gram + DMatrix::identity(d, d) * lambda;
        let ch = ridge.cholesky().expect("ΦᵀΦ + λI is positive definite");
        let f = sampler.features(rng);
        // φᵀΣφ/σ_e² = φᵀ(ΦᵀΦ + λI)⁻¹φ
        let q = f.dot(&ch.solve(&f));
        0.5 * q.ln_1p()
    });
    Ok(McEstimate::from_samples(&vals))
}
