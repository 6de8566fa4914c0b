//! Finite zero-sum games between a learner designer (rows, minimising excess
//! risk) and the world (columns, choosing the parameter).
//!
//! Two solvers are provided: fictitious play, which certifies its own
//! duality gap, and a dense tableau simplex that is exact up to rounding.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linear::LinearModelSpec;
use crate::prob::SeedSpec;
use crate::risk::{exact_excess_constant_feature, excess_risk_mc, threshold_excess_mc, LinearAlgorithm};
use crate::vc::{exact_excess_at, ThresholdAlgorithm, ThresholdClassSpec};

const PIVOT_EPS: f64 = 1e-12;

/// Excess-risk matrix `M[i][j] = e(A_i, w_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: DMatrix<f64>,
    /// Zero for exact entries.
    pub std_errors: DMatrix<f64>,
}

impl PayoffMatrix {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, values: DMatrix<f64>, std_errors: DMatrix<f64>) -> Result<Self> {
        let (m, n) = values.shape();
        if m == 0 || n == 0 {
            return invalid("payoff matrix must be non-empty");
        }
        if row_labels.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: row_labels.len() });
        }
        if col_labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: col_labels.len() });
        }
        if std_errors.shape() != (m, n) {
            return invalid("std-error matrix must match the payoff shape");
        }
        if values.iter().chain(std_errors.iter()).any(|v| !v.is_finite()) {
            return invalid("payoff entries must be finite");
        }
        Ok(Self { row_labels, col_labels, values, std_errors })
    }

    /// Unlabelled exact matrix from rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return invalid("ragged payoff rows");
        }
        let values = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
        Self::new(
            (0..m).map(|i| format!("r{i}")).collect(),
            (0..n).map(|j| format!("c{j}")).collect(),
            values,
            DMatrix::zeros(m, n),
        )
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn max_std_error(&self) -> f64 {
        self.std_errors.iter().copied().fold(0.0, f64::max)
    }

    /// `max_j (pᵀM)_j`: what the designer guarantees with `p`.
    pub fn row_guarantee(&self, p: &MixedStrategy) -> f64 {
        let v = self.values.tr_mul(&DVector::from_column_slice(&p.weights));
        v.max()
    }

    /// `min_i (Mq)_i`: what the world guarantees with `q`.
    pub fn col_guarantee(&self, q: &MixedStrategy) -> f64 {
        let v = &self.values * DVector::from_column_slice(&q.weights);
        v.min()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        w.write_record(["row", "col", "value", "std_error"]).map_err(io)?;
        let (m, n) = self.shape();
        for i in 0..m {
            for j in 0..n {
                w.write_record([
                    self.row_labels[i].clone(),
                    self.col_labels[j].clone(),
                    self.values[(i, j)].to_string(),
                    self.std_errors[(i, j)].to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))
    }
}

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    pub weights: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) || (s - 1.0).abs() > 1e-12 {
            return invalid(format!("mixed strategy must lie on the simplex (sum {s})"));
        }
        Ok(Self { weights })
    }

    pub fn uniform(m: usize) -> Self {
        Self { weights: vec![1.0 / m as f64; m] }
    }

    pub fn pure(m: usize, i: usize) -> Self {
        let mut weights = vec![0.0; m];
        weights[i] = 1.0;
        Self { weights }
    }

    /// Normalises non-negative weights onto the simplex.
    fn normalized(raw: Vec<f64>) -> Self {
        let s: f64 = raw.iter().sum();
        Self { weights: raw.into_iter().map(|w| w / s).collect() }
    }
}

/// How payoff entries are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffMode {
    Exact,
    MonteCarlo { reps: usize, seed: SeedSpec },
}

/// The learning problem, its candidate learners and the world grid.
#[derive(Debug, Clone, Copy)]
pub enum GameSpec<'a> {
    Threshold {
        spec: &'a ThresholdClassSpec,
        n: usize,
        algs: &'a [(String, ThresholdAlgorithm)],
        thresholds: &'a [usize],
    },
    Linear {
        spec: &'a LinearModelSpec,
        n: usize,
        algs: &'a [(String, LinearAlgorithm)],
        ws: &'a [Vec<f64>],
    },
}

/// Evaluates every `e(A_i, w_j)`; entries are computed in parallel and
/// Monte Carlo entry `(i, j)` uses stream `seed.child(i·cols + j)`.
pub fn build_payoff(game: &GameSpec, mode: PayoffMode) -> Result<PayoffMatrix> {
    let (rows, cols, col_labels): (Vec<String>, usize, Vec<String>) = match game {
        GameSpec::Threshold { algs, thresholds, .. } => (
            algs.iter().map(|a| a.0.clone()).collect(),
            thresholds.len(),
            thresholds.iter().map(|t| format!("t={t}")).collect(),
        ),
        GameSpec::Linear { algs, ws, .. } => (
            algs.iter().map(|a| a.0.clone()).collect(),
            ws.len(),
            ws.iter().map(|w| format!("w={}", w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))).collect(),
        ),
    };
    let m = rows.len();
    if m == 0 || cols == 0 {
        return invalid("game needs at least one learner and one world");
    }
    let entry = |idx: usize| -> Result<(f64, f64)> {
        let (i, j) = (idx / cols, idx % cols);
        match (game, mode) {
            (GameSpec::Threshold { spec, n, algs, thresholds }, PayoffMode::Exact) => {
                Ok((exact_excess_at(spec, *n, &algs[i].1, thresholds[j])?, 0.0))
            }
            (GameSpec::Threshold { spec, n, algs, thresholds }, PayoffMode::MonteCarlo { reps, seed }) => {
                let r = threshold_excess_mc(spec, &algs[i].1, thresholds[j], *n, reps, seed.child(idx as u64))?;
                Ok((r.mean, r.std_error))
            }
            (GameSpec::Linear { spec, n, algs, ws }, PayoffMode::Exact) => {
                if ws[j].len() != 1 {
                    return Err(Error::Unsupported("exact payoffs need the constant-feature model".into()));
                }
                Ok((exact_excess_constant_feature(spec, &algs[i].1, ws[j][0], *n)?, 0.0))
            }
            (GameSpec::Linear { spec, n, algs, ws }, PayoffMode::MonteCarlo { reps, seed }) => {
                let r = excess_risk_mc(spec, &algs[i].1, &ws[j], *n, reps, seed.child(idx as u64))?;
                Ok((r.mean, r.std_error))
            }
        }
    };
    let cells: Vec<(f64, f64)> = (0..m * cols).into_par_iter().map(entry).collect::<Result<_>>()?;
    let values = DMatrix::from_fn(m, cols, |i, j| cells[i * cols + j].0);
    let std_errors = DMatrix::from_fn(m, cols, |i, j| cells[i * cols + j].1);
    PayoffMatrix::new(rows, col_labels, values, std_errors)
}

/// Prior means on the lattice `{−c, …, c}^d` with `points_per_axis` points
/// per axis, kept if inside the closed `c`-ball.
pub fn mean_ball_lattice(d: usize, c: f64, points_per_axis: usize) -> Result<Vec<Vec<f64>>> {
    if d == 0 || points_per_axis < 2 || !(c >= 0.0) {
        return invalid("lattice needs d ≥ 1, at least 2 points per axis and c ≥ 0");
    }
    let total = (points_per_axis as u128).pow(d as u32);
    if total > 1_000_000 {
        return Err(Error::SizeLimit { states: total, limit: 1_000_000 });
    }
    let step = 2.0 * c / (points_per_axis - 1) as f64;
    let mut out = Vec::new();
    for idx in 0..total as usize {
        let mut rem = idx;
        let point: Vec<f64> = (0..d)
            .map(|_| {
                let k = rem % points_per_axis;
                rem /= points_per_axis;
                -c + step * k as f64
            })
            .collect();
        let norm2: f64 = point.iter().map(|v| v * v).sum();
        if norm2 <= c * c * (1.0 + 1e-12) {
            out.push(point);
        }
    }
    Ok(out)
}

/// Output of a mixed-strategy solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    pub row: MixedStrategy,
    pub col: MixedStrategy,
    pub value: f64,
    /// `max_j (p̄ᵀM)_j − min_i (Mq̄)_i`, non-negative.
    pub gap: f64,
    pub iterations: usize,
}

/// Fictitious play with averaged strategies; stops once the certified gap
/// is at most `tol` or after `max_iters` rounds. `value` is the midpoint of
/// the two guarantees.
pub fn solve_fictitious_play(m: &PayoffMatrix, max_iters: usize, tol: f64) -> Result<GameSolution> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let (rows, cols) = m.shape();
    let a = &m.values;
    let mut row_counts = vec![0u64; rows];
    let mut col_counts = vec![0u64; cols];
    // cumulative payoff of each row against the column history, and of each
    // column against the row history
    let mut row_acc = vec![0.0; rows];
    let mut col_acc = vec![0.0; cols];
    let mut t = 0usize;
    loop {
        t += 1;
        // alternating updates: the designer answers the world's history,
        // then the world answers the updated designer history
        let i = argmin(&row_acc);
        row_counts[i] += 1;
        for (c, acc) in col_acc.iter_mut().enumerate() {
            *acc += a[(i, c)];
        }
        let j = argmax(&col_acc);
        col_counts[j] += 1;
        for (r, acc) in row_acc.iter_mut().enumerate() {
            *acc += a[(r, j)];
        }
        let upper = col_acc.iter().copied().fold(f64::NEG_INFINITY, f64::max) / t as f64;
        let lower = row_acc.iter().copied().fold(f64::INFINITY, f64::min) / t as f64;
        if upper - lower <= tol || t >= max_iters.max(1) {
            let row = MixedStrategy::normalized(row_counts.iter().map(|&c| c as f64).collect());
            let col = MixedStrategy::normalized(col_counts.iter().map(|&c| c as f64).collect());
            // recompute the guarantees from the returned strategies
            let hi = m.row_guarantee(&row);
            let lo = m.col_guarantee(&col);
            return Ok(GameSolution { row, col, value: 0.5 * (hi + lo), gap: (hi - lo).max(0.0), iterations: t });
        }
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = k;
        }
    }
    best
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = k;
        }
    }
    best
}

/// Exact solution from the simplex method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub row: MixedStrategy,
    pub col: MixedStrategy,
    pub value: f64,
    /// `max_j (pᵀM)_j` at the returned row strategy.
    pub primal_value: f64,
    /// `min_i (Mq)_i` at the returned column strategy.
    pub dual_value: f64,
    pub pivots: usize,
}

/// Solves the game by the dense simplex method on
/// `max 1ᵀx  s.t.  M'ᵀx ≤ 1, x ≥ 0` with `M' = M − min M + 1`, using
/// Bland's rule. The column strategy is read off the slack reduced costs.
pub fn solve_lp(m: &PayoffMatrix) -> Result<LpSolution> {
    let (rows, cols) = m.shape();
    let shift = m.values.min() - 1.0;
    // tableau: one constraint per column, variables x (rows) then slacks (cols)
    let width = rows + cols + 1;
    let mut tab = DMatrix::<f64>::zeros(cols + 1, width);
    for j in 0..cols {
        for i in 0..rows {
            tab[(j, i)] = m.values[(i, j)] - shift;
        }
        tab[(j, rows + j)] = 1.0;
        tab[(j, width - 1)] = 1.0;
    }
    let obj = cols;
    for i in 0..rows {
        tab[(obj, i)] = 1.0;
    }
    let mut basis: Vec<usize> = (rows..rows + cols).collect();
    let mut pivots = 0;
    loop {
        let Some(enter) = (0..width - 1).find(|&c| tab[(obj, c)] > PIVOT_EPS) else { break };
        let mut leave: Option<usize> = None;
        for r in 0..cols {
            let a = tab[(r, enter)];
            if a > PIVOT_EPS {
                let ratio = tab[(r, width - 1)] / a;
                leave = match leave {
                    None => Some(r),
                    Some(l) => {
                        let best = tab[(l, width - 1)] / tab[(l, enter)];
                        if ratio < best || (ratio == best && basis[r] < basis[l]) {
                            Some(r)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        // bounded: M' > 0 keeps every column positive
        let r = leave.ok_or_else(|| Error::InvalidArgument("unbounded game LP".into()))?;
        let p = tab[(r, enter)];
        for c in 0..width {
            tab[(r, c)] /= p;
        }
        for rr in 0..=cols {
            if rr != r {
                let f = tab[(rr, enter)];
                if f != 0.0 {
                    for c in 0..width {
                        tab[(rr, c)] -= f * tab[(r, c)];
                    }
                }
            }
        }
        basis[r] = enter;
        pivots += 1;
    }
    let mut x = vec![0.0; rows];
    for (r, &b) in basis.iter().enumerate() {
        if b < rows {
            x[b] = tab[(r, width - 1)].max(0.0);
        }
    }
    let y: Vec<f64> = (0..cols).map(|j| (-tab[(obj, rows + j)]).max(0.0)).collect();
    let row = MixedStrategy::normalized(x);
    let col = MixedStrategy::normalized(y);
    let primal_value = m.row_guarantee(&row);
    let dual_value = m.col_guarantee(&col);
    Ok(LpSolution { value: 0.5 * (primal_value + dual_value), row, col, primal_value, dual_value, pivots })
}

/// Pure-strategy values when one side must commit first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureGap {
    /// `min_i max_j M[i][j]`: designer moves first.
    pub minimax_pure: f64,
    /// `max_j min_i M[i][j]`: world moves first.
    pub maximin_pure: f64,
    pub gap: f64,
}

pub fn duality_gap_pure(m: &PayoffMatrix) -> PureGap {
    let minimax_pure = m.values.row_iter().map(|r| r.max()).fold(f64::INFINITY, f64::min);
    let maximin_pure = m.values.column_iter().map(|c| c.min()).fold(f64::NEG_INFINITY, f64::max);
    PureGap { minimax_pure, maximin_pure, gap: minimax_pure - maximin_pure }
}

/// The world's optimal mixed strategy (a least favourable prior).
pub fn least_favorable_prior(m: &PayoffMatrix) -> Result<MixedStrategy> {
    Ok(solve_lp(m)?.col)
}
