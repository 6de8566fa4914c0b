//! Multivariate Gaussian primitives, closed-form information functionals,
//! and the seeding contract shared by every Monte Carlo routine.
//!
//! All information quantities are in nats.
//!
//! Randomness is counter based: a [`SeedSpec`] selects a ChaCha key
//! (`master_seed`) and a stream (`stream_id`). Replicate `i` of a Monte Carlo
//! loop always draws from `seed.child(i)`, so results do not depend on how
//! replicates are scheduled across threads. Reductions happen afterwards in
//! replicate order.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Random generator handed to Monte Carlo closures.
pub type SeedRng = ChaCha8Rng;

const PIVOT_FLOOR: f64 = 1e-12;

/// Root seed plus stream selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// Deterministic sub-stream. Children of distinct parents or distinct
    /// indices land on distinct streams of the same key.
    pub fn child(&self, index: u64) -> Self {
        let mixed = splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)));
        Self { master_seed: self.master_seed, stream_id: mixed }
    }

    pub fn rng(&self) -> SeedRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Runs `f` once per replicate on its own stream and returns the outputs in
/// replicate order, whatever the size of the rayon pool.
pub fn replicate<T, F>(reps: usize, seed: SeedSpec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SeedRng, usize) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            f(&mut rng, i)
        })
        .collect()
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Sample mean with its standard error (sample std / sqrt(reps)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub reps: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let reps = xs.len();
        if reps == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, reps };
        }
        let mean = xs.iter().copied().collect::<CompensatedSum>().value() / reps as f64;
        let std_error = if reps > 1 {
            let ss = xs.iter().map(|x| (x - mean) * (x - mean)).collect::<CompensatedSum>().value();
            (ss / (reps - 1) as f64).sqrt() / (reps as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error, reps }
    }

    /// An exactly known value.
    pub fn exact(value: f64) -> Self {
        Self { mean: value, std_error: 0.0, reps: 0 }
    }
}

/// Multivariate normal distribution `N(mean, cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: cov.nrows().max(cov.ncols()) });
        }
        if cov.iter().any(|v| !v.is_finite()) || mean.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite Gaussian parameters");
        }
        let scale = cov.amax().max(1.0);
        if (&cov - cov.transpose()).amax() > 1e-9 * scale {
            return invalid("covariance is not symmetric");
        }
        if d > 0 {
            let eig = SymmetricEigen::new(cov.clone());
            if eig.eigenvalues.min() < -1e-9 * scale {
                return invalid("covariance is not positive semi-definite");
            }
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    /// `N(mean, var * I)`.
    pub fn isotropic(mean: DVector<f64>, var: f64) -> Result<Self> {
        if !(var >= 0.0) {
            return invalid(format!("variance must be non-negative, got {var}"));
        }
        let d = mean.len();
        Self::new(mean, DMatrix::identity(d, d) * var)
    }

    pub fn standard(d: usize) -> Self {
        Self { mean: DVector::zeros(d), cov: DMatrix::identity(d, d) }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Precomputes a square-root factor for repeated sampling.
    pub fn sampler(&self) -> GaussianSampler {
        GaussianSampler { mean: self.mean.clone(), factor: sqrt_factor(&self.cov) }
    }
}

/// Holds `mean` and a factor `L` with `L Lᵀ = cov`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn draw(&self, rng: &mut SeedRng) -> DVector<f64> {
        let d = self.mean.len();
        let z = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        &self.mean + &self.factor * z
    }

    /// Draws `w` and returns only `wᵀv`.
    pub fn draw_projected(&self, v: &DVector<f64>, rng: &mut SeedRng) -> f64 {
        let coeffs = self.factor.tr_mul(v);
        let mut acc = self.mean.dot(v);
        for c in coeffs.iter() {
            let z: f64 = StandardNormal.sample(rng);
            acc += c * z;
        }
        acc
    }
}

/// Cholesky factor, or `V sqrt(Λ⁺)` when a pivot falls below 1e-12.
pub(crate) fn sqrt_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = Cholesky::new(cov.clone()) {
        let l = ch.l();
        let min_pivot = l.diagonal().iter().map(|x| x * x).fold(f64::INFINITY, f64::min);
        if l.nrows() == 0 || min_pivot >= PIVOT_FLOOR {
            return l;
        }
    }
    let eig = SymmetricEigen::new(cov.clone());
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots)
}

fn cholesky_pd(m: &DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let ch = Cholesky::new(m.clone()).ok_or(Error::Singular(what))?;
    let min_pivot = ch.l_dirty().diagonal().iter().map(|x| x * x).fold(f64::INFINITY, f64::min);
    if m.nrows() > 0 && min_pivot < PIVOT_FLOOR {
        return Err(Error::Singular(what));
    }
    Ok(ch)
}

pub(crate) fn log_det_pd(m: &DMatrix<f64>, what: &'static str) -> Result<f64> {
    let ch = cholesky_pd(m, what)?;
    Ok(2.0 * ch.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>())
}

/// `KL(p ‖ q)` in nats.
pub fn gaussian_kl(p: &Gaussian, q: &Gaussian) -> Result<f64> {
    let d = p.dim();
    if q.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: q.dim() });
    }
    if d == 0 {
        return Ok(0.0);
    }
    let chq = cholesky_pd(&q.cov, "degenerate reference measure")?;
    let log_det_q = 2.0 * chq.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let log_det_p = log_det_pd(&p.cov, "first argument has singular covariance")?;
    let trace = chq.solve(&p.cov).trace();
    let diff = &q.mean - &p.mean;
    let maha = diff.dot(&chq.solve(&diff));
    let kl = 0.5 * (log_det_q - log_det_p - d as f64 + trace + maha);
    Ok(kl.max(0.0))
}

/// Differential entropy `(d/2) log(2πe) + ½ log|Σ|`.
pub fn gaussian_entropy(p: &Gaussian) -> Result<f64> {
    let d = p.dim() as f64;
    let log_det = log_det_pd(&p.cov, "entropy of a singular Gaussian")?;
    Ok(0.5 * d * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln() + 0.5 * log_det)
}

/// `count` i.i.d. draws, reproducible from `seed`.
pub fn sample(p: &Gaussian, seed: SeedSpec, count: usize) -> Vec<DVector<f64>> {
    let sampler = p.sampler();
    let mut rng = seed.rng();
    (0..count).map(|_| sampler.draw(&mut rng)).collect()
}
