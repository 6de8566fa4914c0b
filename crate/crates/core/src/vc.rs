//! Exact study of the realizable threshold class on `X = {1, …, k}`.
//!
//! Hypotheses are `h_t(x) = 1[x ≥ t]` for `t ∈ {1, …, k+1}`; the world draws
//! `T` from a prior, inputs i.i.d. from `px`, and labels are `Y = h_T(X)`.
//! Every quantity here is computed by exhaustive enumeration over `x^n` with
//! compensated summation, so the information inequalities can be checked
//! without sampling error.
//!
//! Given a training sample, the consistent thresholds form an interval
//! `[lo, hi]` (the version space): `lo` is one past the largest input
//! labelled 0 and `hi` is the smallest input labelled 1.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linear::check_simplex;
use crate::prob::CompensatedSum;

/// Largest `(k+1)·k^(n+1)` accepted by the enumerators.
pub const MAX_STATES: u128 = 10_000_000;

const BLOCK: usize = 1024;

/// Realizable threshold learning problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdClassSpec {
    pub k: usize,
    /// Distribution of `X` over `{1, …, k}` (index 0 is `x = 1`).
    pub px: Vec<f64>,
    /// Prior over `t ∈ {1, …, k+1}` (index 0 is `t = 1`).
    pub prior_t: Vec<f64>,
}

impl ThresholdClassSpec {
    pub fn new(k: usize, px: Vec<f64>, prior_t: Vec<f64>) -> Result<Self> {
        let spec = Self { k, px, prior_t };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(k: usize) -> Self {
        Self { k, px: vec![1.0 / k as f64; k], prior_t: vec![1.0 / (k + 1) as f64; k + 1] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return invalid("threshold grid size k must be positive");
        }
        if self.px.len() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, got: self.px.len() });
        }
        if self.prior_t.len() != self.k + 1 {
            return Err(Error::DimensionMismatch { expected: self.k + 1, got: self.prior_t.len() });
        }
        check_simplex(&self.px, "px")?;
        check_simplex(&self.prior_t, "prior_t")
    }

    pub fn with_prior(&self, prior_t: Vec<f64>) -> Result<Self> {
        Self::new(self.k, self.px.clone(), prior_t)
    }

    /// Point-mass prior on threshold `t`.
    pub fn point_mass(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.k + 1 {
            return invalid(format!("threshold {t} outside 1..={}", self.k + 1));
        }
        let mut prior = vec![0.0; self.k + 1];
        prior[t - 1] = 1.0;
        self.with_prior(prior)
    }
}

/// `h_t(x) = 1[x ≥ t]`.
pub fn label(t: usize, x: usize) -> bool {
    x >= t
}

/// Consistent thresholds `[lo, hi]` for inputs `xs` labelled by `h_t`.
pub fn version_space(k: usize, xs: &[usize], t: usize) -> (usize, usize) {
    let mut lo = 1;
    let mut hi = k + 1;
    for &x in xs {
        if x >= t {
            hi = hi.min(x);
        } else {
            lo = lo.max(x + 1);
        }
    }
    (lo, hi)
}

/// A learner for the threshold class. Every variant depends on the training
/// sample only through its version space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdAlgorithm {
    /// Predict the posterior-majority label (fair coin at exact ties).
    BayesOptimal { prior_t: Vec<f64> },
    /// Draw `T'` from the posterior, predict `h_{T'}(x)`.
    PosteriorSampling { prior_t: Vec<f64> },
    /// Ignore the data and predict `h_t`.
    Constant { t: usize },
    /// Custom rule: `table[lo-1][hi-1][x-1]` is the probability of
    /// predicting 1 at `x` when the version space is `[lo, hi]`.
    Table { table: Vec<Vec<Vec<f64>>> },
}

impl ThresholdAlgorithm {
    /// Empirical risk minimiser that returns the lowest consistent threshold.
    pub fn erm_lowest(k: usize) -> Self {
        Self::table_from(k, |lo, _hi, x| label(lo, x) as u8 as f64)
    }

    /// Empirical risk minimiser that returns the highest consistent threshold.
    pub fn erm_highest(k: usize) -> Self {
        Self::table_from(k, |_lo, hi, x| label(hi, x) as u8 as f64)
    }

    pub fn table_from(k: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let table = (1..=k + 1)
            .map(|lo| (1..=k + 1).map(|hi| (1..=k).map(|x| f(lo, hi, x)).collect()).collect())
            .collect();
        ThresholdAlgorithm::Table { table }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            ThresholdAlgorithm::BayesOptimal { prior_t } | ThresholdAlgorithm::PosteriorSampling { prior_t } => {
                if prior_t.len() != k + 1 {
                    return Err(Error::DimensionMismatch { expected: k + 1, got: prior_t.len() });
                }
                check_simplex(prior_t, "algorithm prior")
            }
            ThresholdAlgorithm::Constant { t } => {
                if *t == 0 || *t > k + 1 {
                    return invalid(format!("constant threshold {t} outside 1..={}", k + 1));
                }
                Ok(())
            }
            ThresholdAlgorithm::Table { table } => {
                let ok = table.len() == k + 1
                    && table.iter().all(|r| r.len() == k + 1 && r.iter().all(|c| c.len() == k && c.iter().all(|p| (0.0..=1.0).contains(p))));
                if ok {
                    Ok(())
                } else {
                    invalid("decision table must be (k+1)×(k+1)×k with entries in [0, 1]")
                }
            }
        }
    }

    /// Probability of predicting label 1 at `x` given version space `[lo, hi]`.
    pub fn prob_one(&self, lo: usize, hi: usize, x: usize) -> f64 {
        match self {
            ThresholdAlgorithm::BayesOptimal { prior_t } => {
                let p = posterior_prob_one(prior_t, lo, hi, x);
                if p > 0.5 {
                    1.0
                } else if p < 0.5 {
                    0.0
                } else {
                    0.5
                }
            }
            ThresholdAlgorithm::PosteriorSampling { prior_t } => posterior_prob_one(prior_t, lo, hi, x),
            ThresholdAlgorithm::Constant { t } => label(*t, x) as u8 as f64,
            ThresholdAlgorithm::Table { table } => table[lo - 1][hi - 1][x - 1],
        }
    }

    /// Probability that the prediction at `x` disagrees with `h_t(x)`.
    pub fn error_prob(&self, lo: usize, hi: usize, x: usize, t: usize) -> f64 {
        let p1 = self.prob_one(lo, hi, x);
        if label(t, x) {
            1.0 - p1
        } else {
            p1
        }
    }
}

/// `P(T ≤ x | T ∈ [lo, hi])` under `prior_t`; uniform on the interval if the
/// prior gives it no mass.
pub fn posterior_prob_one(prior_t: &[f64], lo: usize, hi: usize, x: usize) -> f64 {
    let mass: f64 = prior_t[lo - 1..hi].iter().sum();
    let upto = x.min(hi);
    if mass > 0.0 {
        if upto < lo {
            0.0
        } else {
            prior_t[lo - 1..upto].iter().sum::<f64>() / mass
        }
    } else {
        let width = (hi - lo + 1) as f64;
        if upto < lo {
            0.0
        } else {
            (upto - lo + 1) as f64 / width
        }
    }
}

fn guard(k: usize, n_plus: u32) -> Result<()> {
    let states = (k as u128 + 1).saturating_mul((k as u128).saturating_pow(n_plus));
    if states > MAX_STATES {
        return Err(Error::SizeLimit { states, limit: MAX_STATES });
    }
    Ok(())
}

/// Sums `f(xs, P(xs))` over all `x^n ∈ {1..k}^n` with positive probability,
/// in a fixed block order.
fn sum_over_inputs<F>(spec: &ThresholdClassSpec, n: usize, f: F) -> f64
where
    F: Fn(&[usize], f64) -> f64 + Sync,
{
    let k = spec.k;
    let total = k.pow(n as u32);
    let blocks = total.div_ceil(BLOCK);
    let partials: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = CompensatedSum::default();
            let mut xs = vec![0usize; n];
            for idx in b * BLOCK..((b + 1) * BLOCK).min(total) {
                let mut rem = idx;
                let mut p = 1.0;
                for slot in xs.iter_mut() {
                    let digit = rem % k;
                    rem /= k;
                    *slot = digit + 1;
                    p *= spec.px[digit];
                }
                if p > 0.0 {
                    acc.add(f(&xs, p));
                }
            }
            acc.value()
        })
        .collect();
    partials.into_iter().collect::<CompensatedSum>().value()
}

/// Prior mass of the thresholds sharing each labelling of `xs`, keyed by the
/// version-space interval.
fn labelling_groups(spec: &ThresholdClassSpec, xs: &[usize]) -> Vec<(usize, usize, f64)> {
    let mut groups: Vec<(usize, usize, f64)> = Vec::new();
    for t in 1..=spec.k + 1 {
        let (lo, hi) = version_space(spec.k, xs, t);
        let m = spec.prior_t[t - 1];
        match groups.iter_mut().find(|g| g.0 == lo && g.1 == hi) {
            Some(g) => g.2 += m,
            None => groups.push((lo, hi, m)),
        }
    }
    groups
}

fn entropy(masses: impl Iterator<Item = f64>) -> f64 {
    -masses.filter(|&m| m > 0.0).map(|m| m * m.ln()).sum::<f64>()
}

fn binary_entropy(p: f64) -> f64 {
    entropy([p, 1.0 - p].into_iter())
}

/// Number of distinct labellings of `points` realised by the class.
pub fn growth_count(spec: &ThresholdClassSpec, points: &[usize]) -> Result<usize> {
    if let Some(&bad) = points.iter().find(|&&x| x == 0 || x > spec.k) {
        return invalid(format!("point {bad} outside 1..={}", spec.k));
    }
    let labellings: BTreeSet<Vec<bool>> = (1..=spec.k + 1).map(|t| points.iter().map(|&x| label(t, x)).collect()).collect();
    Ok(labellings.len())
}

/// Largest number of labellings over any `n` points of the grid.
pub fn max_growth(spec: &ThresholdClassSpec, n: usize) -> usize {
    n.min(spec.k) + 1
}

/// `I(T; Y^n | X^n)`, which equals `H(Y^n | X^n)` in the realizable case.
pub fn exact_cmi_yn(spec: &ThresholdClassSpec, n: usize) -> Result<f64> {
    spec.validate()?;
    guard(spec.k, n as u32)?;
    if n == 0 {
        return Ok(0.0);
    }
    Ok(sum_over_inputs(spec, n, |xs, p| p * entropy(labelling_groups(spec, xs).into_iter().map(|g| g.2))))
}

/// `I(T; Y | X, Z^n)`, which equals `H(Y | X, Z^n)` in the realizable case.
pub fn exact_cmi_test(spec: &ThresholdClassSpec, n: usize) -> Result<f64> {
    spec.validate()?;
    guard(spec.k, n as u32 + 1)?;
    let inner = |xs: &[usize]| -> f64 {
        labelling_groups(spec, xs)
            .into_iter()
            .filter(|g| g.2 > 0.0)
            .map(|(lo, hi, m)| {
                let h: f64 = (1..=spec.k)
                    .map(|x| spec.px[x - 1] * binary_entropy(posterior_prob_one(&spec.prior_t, lo, hi, x)))
                    .sum();
                m * h
            })
            .sum()
    };
    if n == 0 {
        return Ok(inner(&[]));
    }
    Ok(sum_over_inputs(spec, n, |xs, p| p * inner(xs)))
}

/// `(1/n) log(e n^{d_vc})`.
pub fn sauer_bound(dvc: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return invalid("sauer bound needs n >= 1");
    }
    Ok((1.0 + dvc as f64 * (n as f64).ln()) / n as f64)
}

/// Exact 0-1 excess risk `e(A, t)` of `alg` against the fixed world `t`.
pub fn exact_excess_at(spec: &ThresholdClassSpec, n: usize, alg: &ThresholdAlgorithm, t: usize) -> Result<f64> {
    spec.validate()?;
    alg.validate(spec.k)?;
    if t == 0 || t > spec.k + 1 {
        return invalid(format!("threshold {t} outside 1..={}", spec.k + 1));
    }
    guard(spec.k, n as u32 + 1)?;
    let inner = |xs: &[usize]| -> f64 {
        let (lo, hi) = version_space(spec.k, xs, t);
        (1..=spec.k).map(|x| spec.px[x - 1] * alg.error_prob(lo, hi, x, t)).sum()
    };
    if n == 0 {
        return Ok(inner(&[]));
    }
    Ok(sum_over_inputs(spec, n, |xs, p| p * inner(xs)))
}

/// Which Bayesian learner `exact_bayes_excess` evaluates; both use the
/// spec's own prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BayesLearner {
    BayesOptimal,
    PosteriorSampling,
}

/// Exact Bayes 0-1 excess risk `E_T[e(A, T)]` under the spec's prior.
pub fn exact_bayes_excess(spec: &ThresholdClassSpec, n: usize, learner: BayesLearner) -> Result<f64> {
    let alg = match learner {
        BayesLearner::BayesOptimal => ThresholdAlgorithm::BayesOptimal { prior_t: spec.prior_t.clone() },
        BayesLearner::PosteriorSampling => ThresholdAlgorithm::PosteriorSampling { prior_t: spec.prior_t.clone() },
    };
    exact_bayes_excess_of(spec, n, &alg)
}

/// Exact Bayes excess risk of an arbitrary learner under the spec's prior.
pub fn exact_bayes_excess_of(spec: &ThresholdClassSpec, n: usize, alg: &ThresholdAlgorithm) -> Result<f64> {
    let mut acc = CompensatedSum::default();
    for t in 1..=spec.k + 1 {
        let w = spec.prior_t[t - 1];
        if w > 0.0 {
            acc.add(w * exact_excess_at(spec, n, alg, t)?);
        }
    }
    Ok(acc.value())
}

/// Finite channel `P(output | input)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteChannel {
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
    /// Row `i` is `P(· | input i)`.
    pub matrix: Vec<Vec<f64>>,
}

impl DiscreteChannel {
    pub fn new(input_labels: Vec<String>, output_labels: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if matrix.len() != input_labels.len() || matrix.is_empty() {
            return invalid("channel needs one row per input");
        }
        for row in &matrix {
            if row.len() != output_labels.len() {
                return Err(Error::DimensionMismatch { expected: output_labels.len(), got: row.len() });
            }
            let s: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (s - 1.0).abs() > 1e-12 {
                return invalid(format!("channel rows must be probability vectors (row sum {s})"));
            }
        }
        Ok(Self { input_labels, output_labels, matrix })
    }

    /// Unlabelled channel from a row-stochastic matrix.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let m = matrix.len();
        let k = matrix.first().map_or(0, Vec::len);
        Self::new((0..m).map(|i| i.to_string()).collect(), (0..k).map(|j| j.to_string()).collect(), matrix)
    }

    pub fn binary_symmetric(flip: f64) -> Result<Self> {
        Self::from_matrix(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]])
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::from_matrix((0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
    }

    pub fn inputs(&self) -> usize {
        self.matrix.len()
    }

    /// `(input, output, probability)` rows for CSV export, zero entries skipped.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("input,output,probability\n");
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if *p > 0.0 {
                    out.push_str(&format!("{},{},{}\n", self.input_labels[i], self.output_labels[j], p));
                }
            }
        }
        out
    }
}

/// Per-input divergences `KL(P(·|x) ‖ q)` for the output law `q` induced by
/// `prior`.
fn divergences(ch: &DiscreteChannel, prior: &[f64]) -> Vec<f64> {
    let outputs = ch.output_labels.len();
    let mut q = vec![0.0; outputs];
    for (p, row) in prior.iter().zip(&ch.matrix) {
        for (qj, w) in q.iter_mut().zip(row) {
            *qj += p * w;
        }
    }
    ch.matrix
        .iter()
        .map(|row| {
            row.iter()
                .zip(&q)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, qj)| w * (w / qj).ln())
                .collect::<CompensatedSum>()
                .value()
        })
        .collect()
}

/// `I(input; output)` in nats for the given input prior.
pub fn mutual_information(ch: &DiscreteChannel, prior: &[f64]) -> Result<f64> {
    if prior.len() != ch.inputs() {
        return Err(Error::DimensionMismatch { expected: ch.inputs(), got: prior.len() });
    }
    check_simplex(prior, "input prior")?;
    let d = divergences(ch, prior);
    Ok(prior.iter().zip(&d).map(|(p, di)| if *p > 0.0 { p * di } else { 0.0 }).sum::<f64>().max(0.0))
}

/// Output of [`blahut_arimoto`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Certified upper estimate `max_x KL(P(·|x) ‖ q)`; use this as `κ_n`.
    pub kappa: f64,
    /// `I(input; output)` at the returned prior.
    pub lower: f64,
    pub prior: Vec<f64>,
    pub iterations: usize,
}

/// Blahut–Arimoto iteration, stopped once the upper and lower capacity
/// estimates are within `tol`.
pub fn blahut_arimoto(ch: &DiscreteChannel, tol: f64) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let m = ch.inputs();
    let mut prior = vec![1.0 / m as f64; m];
    let mut iterations = 0;
    loop {
        let d = divergences(ch, &prior);
        let lower: f64 = prior.iter().zip(&d).map(|(p, di)| p * di).sum::<f64>().max(0.0);
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
        if upper - lower <= tol || iterations >= 10_000_000 {
            return Ok(CapacityResult { kappa: upper, lower, prior, iterations });
        }
        let dmax = upper;
        let mut z = 0.0;
        for (p, di) in prior.iter_mut().zip(&d) {
            *p *= (di - dmax).exp();
            z += *p;
        }
        for p in prior.iter_mut() {
            *p /= z;
        }
        iterations += 1;
    }
}

/// The data channel `t ↦ Z^n = (X^n, Y^n)` of the threshold problem, one
/// output per (input sequence, labelling) pair of positive probability.
pub fn threshold_channel(spec: &ThresholdClassSpec, n: usize) -> Result<DiscreteChannel> {
    spec.validate()?;
    guard(spec.k, n as u32)?;
    let k = spec.k;
    let total = k.pow(n as u32);
    let mut output_labels = Vec::new();
    let mut matrix = vec![Vec::new(); k + 1];
    let mut xs = vec![0usize; n];
    for idx in 0..total {
        let mut rem = idx;
        let mut p = 1.0;
        for slot in xs.iter_mut() {
            let digit = rem % k;
            rem /= k;
            *slot = digit + 1;
            p *= spec.px[digit];
        }
        if p == 0.0 {
            continue;
        }
        let mut hi_values: Vec<usize> = (1..=k + 1).map(|t| version_space(k, &xs, t).1).collect();
        hi_values.dedup();
        for &hi in &hi_values {
            let ys: String = xs.iter().map(|&x| if label(hi, x) { '1' } else { '0' }).collect();
            let xs_s: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
            output_labels.push(format!("{}|{}", xs_s.join(" "), ys));
            for t in 1..=k + 1 {
                matrix[t - 1].push(if version_space(k, &xs, t).1 == hi { p } else { 0.0 });
            }
        }
    }
    if n == 0 {
        output_labels.push("∅".to_string());
        for row in matrix.iter_mut() {
            row.push(1.0);
        }
    }
    // rows sum to 1 up to rounding of the product weights
    for row in matrix.iter_mut() {
        let s: f64 = row.iter().copied().collect::<CompensatedSum>().value();
        for v in row.iter_mut() {
            *v /= s;
        }
    }
    let input_labels = (1..=k + 1).map(|t| format!("t={t}")).collect();
    DiscreteChannel::new(input_labels, output_labels, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn growth_fixtures() {
        let spec = ThresholdClassSpec::uniform(5);
        assert_eq!(growth_count(&spec, &[1, 3, 5]).unwrap(), 4);
        assert_eq!(growth_count(&spec, &[]).unwrap(), 1);
        assert_eq!(growth_count(&spec, &[2, 2, 4, 4, 4]).unwrap(), 3);
        assert!(growth_count(&spec, &[0]).is_err());
        assert!(growth_count(&spec, &[6]).is_err());
    }

    #[test]
    fn version_space_brackets_truth() {
        let k = 6;
        for t in 1..=k + 1 {
            let (lo, hi) = version_space(k, &[2, 5, 3], t);
            assert!(lo <= t && t <= hi);
            for s in lo..=hi {
                assert!([2, 5, 3].iter().all(|&x| label(s, x) == label(t, x)));
            }
        }
    }

    #[test]
    fn cmi_zero_cases() {
        let spec = ThresholdClassSpec::uniform(3);
        assert_eq!(exact_cmi_yn(&spec, 0).unwrap(), 0.0);
        let pm = spec.point_mass(2).unwrap();
        assert_eq!(exact_cmi_yn(&pm, 3).unwrap(), 0.0);
        assert_eq!(exact_cmi_test(&pm, 3).unwrap(), 0.0);
    }

    /// Independent oracle: enumerate (t, x^n) jointly and build the
    /// conditional label distributions from scratch.
    fn brute_cmi_yn(spec: &ThresholdClassSpec, n: usize) -> f64 {
        let k = spec.k;
        let mut total = 0.0;
        for idx in 0..k.pow(n as u32) {
            let xs: Vec<usize> = (0..n).map(|i| (idx / k.pow(i as u32)) % k + 1).collect();
            let pxs: f64 = xs.iter().map(|&x| spec.px[x - 1]).product();
            let mut dist: std::collections::BTreeMap<Vec<bool>, f64> = Default::default();
            for t in 1..=k + 1 {
                *dist.entry(xs.iter().map(|&x| x >= t).collect()).or_default() += spec.prior_t[t - 1];
            }
            total += pxs * dist.values().filter(|&&m| m > 0.0).map(|m| -m * m.ln()).sum::<f64>();
        }
        total
    }

    #[test]
    fn cmi_yn_regression_fixture() {
        let spec = ThresholdClassSpec::uniform(3);
        let v = exact_cmi_yn(&spec, 2).unwrap();
        assert_relative_eq!(v, brute_cmi_yn(&spec, 2), epsilon = 1e-14);
        // frozen from the brute-force oracle above
        assert_relative_eq!(v, 0.895_126_899_426_340_9, epsilon = 1e-12);
    }

    #[test]
    fn cmi_test_is_increment_of_cmi_yn() {
        let spec = ThresholdClassSpec::new(4, vec![0.1, 0.4, 0.3, 0.2], vec![0.3, 0.1, 0.2, 0.25, 0.15]).unwrap();
        for n in 0..5 {
            let lhs = exact_cmi_test(&spec, n).unwrap();
            let rhs = exact_cmi_yn(&spec, n + 1).unwrap() - exact_cmi_yn(&spec, n).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn sauer_fixtures() {
        assert_relative_eq!(sauer_bound(1, 10).unwrap(), 0.330_258_509_299_404_6, epsilon = 1e-12);
        assert_relative_eq!(sauer_bound(1, 1).unwrap(), 1.0);
        for n in 3..200 {
            assert!(sauer_bound(1, n + 1).unwrap() < sauer_bound(1, n).unwrap());
        }
        assert!(sauer_bound(1, 0).is_err());
    }

    #[test]
    fn size_guard() {
        let spec = ThresholdClassSpec::uniform(8);
        assert!(matches!(exact_cmi_test(&spec, 8), Err(Error::SizeLimit { .. })));
        assert!(exact_cmi_yn(&spec, 5).is_ok());
    }

    #[test]
    fn bayes_excess_point_mass_is_zero() {
        let spec = ThresholdClassSpec::uniform(4).point_mass(3).unwrap();
        assert_eq!(exact_bayes_excess(&spec, 2, BayesLearner::PosteriorSampling).unwrap(), 0.0);
        assert_eq!(exact_bayes_excess(&spec, 2, BayesLearner::BayesOptimal).unwrap(), 0.0);
    }

    #[test]
    fn bayes_excess_large_n_cap() {
        let spec = ThresholdClassSpec::uniform(2);
        let cap = 2.0 * 0.5f64.powi(8);
        for learner in [BayesLearner::BayesOptimal, BayesLearner::PosteriorSampling] {
            let v = exact_bayes_excess(&spec, 8, learner).unwrap();
            assert!(v <= cap, "{learner:?}: {v} > {cap}");
        }
    }

    #[test]
    fn bayes_excess_ordering_and_bound() {
        let spec = ThresholdClassSpec::new(3, vec![0.5, 0.2, 0.3], vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        for n in 0..5 {
            let opt = exact_bayes_excess(&spec, n, BayesLearner::BayesOptimal).unwrap();
            let ps = exact_bayes_excess(&spec, n, BayesLearner::PosteriorSampling).unwrap();
            let cmi = exact_cmi_test(&spec, n).unwrap();
            assert!(opt <= ps + 1e-12);
            assert!(ps <= 3.0 * cmi + 1e-12);
        }
    }

    #[test]
    fn constant_algorithm_against_itself() {
        let spec = ThresholdClassSpec::uniform(4);
        let alg = ThresholdAlgorithm::Constant { t: 2 };
        assert_eq!(exact_excess_at(&spec, 3, &alg, 2).unwrap(), 0.0);
        // predicting h_2 when the truth is h_4 errs on x ∈ {2, 3}
        assert_relative_eq!(exact_excess_at(&spec, 3, &alg, 4).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn erm_tables() {
        let spec = ThresholdClassSpec::uniform(3);
        for alg in [ThresholdAlgorithm::erm_lowest(3), ThresholdAlgorithm::erm_highest(3)] {
            alg.validate(3).unwrap();
            for t in 1..=4 {
                assert!(exact_excess_at(&spec, 2, &alg, t).unwrap() <= 1.0);
            }
        }
    }

    #[test]
    fn ba_fixtures() {
        let id = blahut_arimoto(&DiscreteChannel::identity(5).unwrap(), 1e-9).unwrap();
        assert_relative_eq!(id.kappa, 5f64.ln(), epsilon = 1e-9);
        let bsc = blahut_arimoto(&DiscreteChannel::binary_symmetric(0.1).unwrap(), 1e-9).unwrap();
        let hb = -(0.1f64 * 0.1f64.ln() + 0.9 * 0.9f64.ln());
        assert_relative_eq!(bsc.kappa, 2f64.ln() - hb, epsilon = 1e-9);
        assert_relative_eq!(bsc.kappa, 0.368_064_207, epsilon = 1e-8);
        assert!(blahut_arimoto(&DiscreteChannel::identity(2).unwrap(), 0.0).is_err());
    }

    #[test]
    fn ba_asymmetric_channel_capacity() {
        // Z-channel: 0 → 0 always, 1 → 0 with prob 1/2. Capacity log(5/4).
        let ch = DiscreteChannel::from_matrix(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let res = blahut_arimoto(&ch, 1e-10).unwrap();
        assert_relative_eq!(res.kappa, (1.25f64).ln(), epsilon = 1e-9);
        assert_relative_eq!(mutual_information(&ch, &res.prior).unwrap(), res.kappa, epsilon = 1e-9);
    }

    #[test]
    fn threshold_channel_information_equals_cmi_yn() {
        let spec = ThresholdClassSpec::new(3, vec![0.2, 0.5, 0.3], vec![0.4, 0.1, 0.3, 0.2]).unwrap();
        for n in 0..4 {
            let ch = threshold_channel(&spec, n).unwrap();
            let mi = mutual_information(&ch, &spec.prior_t).unwrap();
            assert_relative_eq!(mi, exact_cmi_yn(&spec, n).unwrap(), epsilon = 1e-12);
            let cap = blahut_arimoto(&ch, 1e-8).unwrap();
            assert!(cap.kappa + 1e-12 >= mi);
        }
    }

    #[test]
    fn channel_validation_and_csv() {
        assert!(DiscreteChannel::from_matrix(vec![vec![0.5, 0.6]]).is_err());
        let csv = DiscreteChannel::binary_symmetric(0.25).unwrap().to_csv();
        assert_eq!(csv, "input,output,probability\n0,0,0.75\n0,1,0.25\n1,0,0.25\n1,1,0.75\n");
    }
}
