//! Experiment drivers behind `erlab run`.
//!
//! Every driver is a pure function of the configuration: it returns the
//! results table, the bound reports and the named checks, and never touches
//! the filesystem. Monte Carlo streams are derived from the configured seed
//! as `SeedSpec::new(seed, 0).child(i).child(j)` for sample-size index `i`
//! and quantity index `j`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    bayes_risk_bound, cmi_sup_over_mean_ball, minimax_capacity_bound, posterior_sampling_bound, posterior_sampling_mi_bound,
    BoundReport, CumulantEnvelope, LossRegime, PriorFamily,
};
use crate::config::{ExperimentConfig, ExperimentKind, GameMode};
use crate::error::{Error, Result};
use crate::game::{build_payoff, duality_gap_pure, mean_ball_lattice, solve_fictitious_play, solve_lp, GameSpec, PayoffMatrix, PayoffMode};
use crate::linear::{mi_w_zn, FeatureMap, LinearModelSpec, ModelSampler};
use crate::prob::{log_det_pd, replicate, SeedSpec};
use crate::rates::{fit_rate, lemma2_residual, lower_rate_bound};
use crate::risk::{compare_bayes_excess, default_lambda_grid, envelope_check, random_envelope_cases, GaussianPrior, LinearAlgorithm};
use crate::vc::{
    blahut_arimoto, exact_bayes_excess, exact_cmi_test, exact_cmi_yn, max_growth, mutual_information, sauer_bound, threshold_channel,
    BayesLearner, ThresholdAlgorithm, ThresholdClassSpec,
};

/// A named pass/fail assertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn le(name: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self { name: name.into(), passed: lhs <= rhs + slack, detail: format!("{lhs} <= {rhs} + {slack}") }
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub bounds: Vec<BoundReport>,
    pub checks: Vec<Check>,
    pub summary: Value,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Contents of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub report: Report,
}

fn num(v: f64) -> String {
    v.to_string()
}

fn stream(seed: u64, i: usize, j: u64) -> SeedSpec {
    SeedSpec::new(seed, 0).child(i as u64).child(j)
}

/// Runs the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let mut bounds = Vec::new();
    let mut checks = Vec::new();
    let (table, summary) = match cfg.experiment {
        ExperimentKind::RlsBound => rls_bound(cfg, &mut bounds, &mut checks)?,
        ExperimentKind::Game => game(cfg, &mut bounds, &mut checks)?,
        ExperimentKind::Vc => vc(cfg, &mut bounds, &mut checks)?,
        ExperimentKind::Rates => rates(cfg, &mut bounds, &mut checks)?,
        ExperimentKind::Capacity => capacity(cfg, &mut bounds, &mut checks)?,
        ExperimentKind::Envelope => envelope(cfg, &mut checks)?,
    };
    Ok(Outcome { table, report: Report { experiment: cfg.experiment, seed: cfg.seed, bounds, checks, summary } })
}

/// Posterior sampling and RLS, both with the family centre as prior, under
/// worlds drawn from the model prior.
fn rls_bound(cfg: &ExperimentConfig, bounds: &mut Vec<BoundReport>, checks: &mut Vec<Check>) -> Result<(Table, Value)> {
    let spec = cfg.linear()?;
    let tol = cfg.tolerances;
    let env = CumulantEnvelope::sub_exponential(spec.sigma_w, spec.sigma_e)?;
    let fam = PriorFamily::for_model(spec)?;
    let p0 = GaussianPrior::new(vec![0.0; spec.d], spec.sigma_w * spec.sigma_w)?;
    let world = GaussianPrior::of_model(spec);
    let mut table = Table::new(&["n", "mc_excess_rls", "mc_excess_ps", "se_rls", "se_ps", "mi_wzn", "cmi", "bound_thm10", "bound_thm7"]);
    let mut diffs = Vec::new();
    for (i, &n) in cfg.ns.iter().enumerate() {
        let cmp = compare_bayes_excess(
            spec,
            &LinearAlgorithm::rls(p0.clone()),
            &LinearAlgorithm::posterior_sampling(p0.clone()),
            &world,
            n,
            cfg.reps,
            stream(cfg.seed, i, 0),
        )?;
        let mi = mi_w_zn(spec, n, cfg.reps, stream(cfg.seed, i, 1))?;
        let (cmi, _) = cmi_sup_over_mean_ball(spec, n, cfg.reps, stream(cfg.seed, i, 2))?;
        let b10 = posterior_sampling_mi_bound(&env, &fam, mi.mean, n)?;
        let b7 = posterior_sampling_bound(&env, &fam, cmi.mean, n)?;
        let (rls, ps) = (cmp.first, cmp.second);
        table.push(vec![
            n.to_string(),
            num(rls.mean),
            num(ps.mean),
            num(rls.std_error),
            num(ps.std_error),
            num(mi.mean),
            num(cmi.mean),
            num(b10.value),
            num(b7.value),
        ]);
        let k = tol.mc_sigmas;
        checks.push(Check::le(format!("n={n}: ps excess <= thm10 bound"), ps.mean, b10.value, k * ps.std_error));
        checks.push(Check::le(format!("n={n}: ps excess <= thm7 bound"), ps.mean, b7.value, k * ps.std_error));
        checks.push(Check::le(format!("n={n}: rls excess <= ps excess"), rls.mean, ps.mean, k * cmp.difference.std_error));
        diffs.push(json!({"n": n, "ps_minus_rls": cmp.difference.mean, "se": cmp.difference.std_error}));
        bounds.push(b10);
        bounds.push(b7);
    }
    Ok((table, json!({ "paired_differences": diffs, "prior_radius": crate::bounds::family_radius(&fam)? })))
}

/// Designer rows for the threshold game: every constant hypothesis, the
/// Bayes and posterior-sampling learners under the spec's prior, and the two
/// extreme ERM rules.
pub fn threshold_rows(spec: &ThresholdClassSpec) -> Vec<(String, ThresholdAlgorithm)> {
    let mut rows: Vec<(String, ThresholdAlgorithm)> =
        (1..=spec.k + 1).map(|t| (format!("constant_t{t}"), ThresholdAlgorithm::Constant { t })).collect();
    rows.push(("bayes_optimal".into(), ThresholdAlgorithm::BayesOptimal { prior_t: spec.prior_t.clone() }));
    rows.push(("posterior_sampling".into(), ThresholdAlgorithm::PosteriorSampling { prior_t: spec.prior_t.clone() }));
    rows.push(("erm_lowest".into(), ThresholdAlgorithm::erm_lowest(spec.k)));
    rows.push(("erm_highest".into(), ThresholdAlgorithm::erm_highest(spec.k)));
    rows
}

fn threshold_payoff(spec: &ThresholdClassSpec, n: usize, rows: &[(String, ThresholdAlgorithm)], mode: PayoffMode) -> Result<PayoffMatrix> {
    let ts: Vec<usize> = (1..=spec.k + 1).collect();
    build_payoff(&GameSpec::Threshold { spec, n, algs: rows, thresholds: &ts }, mode)
}

fn game(cfg: &ExperimentConfig, bounds: &mut Vec<BoundReport>, checks: &mut Vec<Check>) -> Result<(Table, Value)> {
    let opts = cfg.game.as_ref().expect("validated");
    let tol = cfg.tolerances;
    let mut table = Table::new(&["n", "row", "col", "value", "std_error"]);
    let mut summaries = Vec::new();
    for (i, &n) in cfg.ns.iter().enumerate() {
        let mode = match opts.mode {
            GameMode::Exact => PayoffMode::Exact,
            GameMode::MonteCarlo => PayoffMode::MonteCarlo { reps: cfg.reps, seed: stream(cfg.seed, i, 0) },
        };
        let (payoff, kappa) = if let Some(spec) = &cfg.threshold {
            let mut rows = threshold_rows(spec);
            let ch = threshold_channel(spec, n)?;
            let ba = blahut_arimoto(&ch, tol.ba_tol)?;
            rows.push(("posterior_sampling_capacity_prior".into(), ThresholdAlgorithm::PosteriorSampling { prior_t: ba.prior.clone() }));
            (threshold_payoff(spec, n, &rows, mode)?, Some(ba.kappa))
        } else {
            let spec = cfg.linear()?;
            let ws = mean_ball_lattice(spec.d, spec.c, opts.grid_points)?;
            let prior = GaussianPrior::of_model(spec);
            let mut rows: Vec<(String, LinearAlgorithm)> = ws
                .iter()
                .enumerate()
                .map(|(j, w)| (format!("constant_w{j}"), LinearAlgorithm::Constant { weights: w.clone() }))
                .collect();
            rows.push(("rls".into(), LinearAlgorithm::rls(prior.clone())));
            rows.push(("posterior_sampling".into(), LinearAlgorithm::posterior_sampling(prior)));
            (build_payoff(&GameSpec::Linear { spec, n, algs: &rows, ws: &ws }, mode)?, None)
        };
        let (m, c) = payoff.shape();
        for r in 0..m {
            for j in 0..c {
                table.push(vec![
                    n.to_string(),
                    payoff.row_labels[r].clone(),
                    payoff.col_labels[j].clone(),
                    num(payoff.values[(r, j)]),
                    num(payoff.std_errors[(r, j)]),
                ]);
            }
        }
        let lp = solve_lp(&payoff)?;
        let fp = solve_fictitious_play(&payoff, tol.fp_max_iters, tol.fp_tol)?;
        let pure = duality_gap_pure(&payoff);
        let widen = tol.mc_sigmas * payoff.max_std_error();
        checks.push(Check::le(format!("n={n}: |lp primal - dual|"), (lp.primal_value - lp.dual_value).abs(), tol.lp_tol, 0.0));
        checks.push(Check::le(format!("n={n}: |fp - lp| <= fp gap"), (fp.value - lp.value).abs(), fp.gap, tol.lp_tol));
        checks.push(Check::le(format!("n={n}: pure maximin <= value"), pure.maximin_pure, lp.value, tol.lp_tol));
        checks.push(Check::le(format!("n={n}: value <= pure minimax"), lp.value, pure.minimax_pure, tol.lp_tol));
        checks.push(Check::le(format!("n={n}: world-first pure maximin is zero"), pure.maximin_pure.abs(), 0.0, tol.exact_slack + widen));
        let mut s = json!({
            "n": n,
            "lp_value": lp.value,
            "lp_primal": lp.primal_value,
            "lp_dual": lp.dual_value,
            "fp_value": fp.value,
            "fp_gap": fp.gap,
            "fp_iterations": fp.iterations,
            "minimax_pure": pure.minimax_pure,
            "maximin_pure": pure.maximin_pure,
            "pure_gap": pure.gap,
            "designer_strategy": lp.row.weights,
            "least_favorable_prior": lp.col.weights,
        });
        if let (Some(kappa), true) = (kappa, n > 0) {
            let b = minimax_capacity_bound(LossRegime::Realizable, 1.0, kappa, n)?;
            checks.push(Check::le(format!("n={n}: game value <= thm5b bound"), lp.value, b.value, tol.exact_slack + widen));
            s["kappa"] = json!(kappa);
            bounds.push(b);
        }
        summaries.push(s);
    }
    Ok((table, json!({ "games": summaries })))
}

fn vc(cfg: &ExperimentConfig, bounds: &mut Vec<BoundReport>, checks: &mut Vec<Check>) -> Result<(Table, Value)> {
    let spec = cfg.threshold()?;
    let slack = cfg.tolerances.exact_slack;
    let mut table = Table::new(&[
        "n",
        "growth",
        "cmi_yn",
        "cmi_yn_per_n",
        "cmi_test",
        "log_growth_per_n",
        "sauer_bound",
        "excess_bayes_optimal",
        "excess_ps",
        "bound_thm4b",
    ]);
    for &n in &cfg.ns {
        let nf = n as f64;
        let growth = max_growth(spec, n);
        let yn = exact_cmi_yn(spec, n)?;
        let test = exact_cmi_test(spec, n)?;
        let log_growth = (growth as f64).ln() / nf;
        let sauer = sauer_bound(1, n)?;
        let bo = exact_bayes_excess(spec, n, BayesLearner::BayesOptimal)?;
        let ps = exact_bayes_excess(spec, n, BayesLearner::PosteriorSampling)?;
        let b = bayes_risk_bound(LossRegime::Realizable, 1.0, test)?;
        table.push(vec![
            n.to_string(),
            growth.to_string(),
            num(yn),
            num(yn / nf),
            num(test),
            num(log_growth),
            num(sauer),
            num(bo),
            num(ps),
            num(b.value),
        ]);
        checks.push(Check::le(format!("n={n}: cmi_test <= cmi_yn/n"), test, yn / nf, slack));
        checks.push(Check::le(format!("n={n}: cmi_yn/n <= log growth/n"), yn / nf, log_growth, slack));
        checks.push(Check::le(format!("n={n}: log growth/n <= sauer"), log_growth, sauer, slack));
        checks.push(Check::le(format!("n={n}: bayes optimal <= ps"), bo, ps, slack));
        checks.push(Check::le(format!("n={n}: ps excess <= thm4b bound"), ps, b.value, slack));
        bounds.push(b);
    }
    Ok((table, json!({ "k": spec.k })))
}

/// `E log det J` for the linear model, `J = E[φφᵀ]/σ_e²`; exact for the
/// constant feature, Monte Carlo otherwise.
fn expected_log_det_fisher(spec: &LinearModelSpec, reps: usize, seed: SeedSpec) -> Result<f64> {
    let s2e = spec.sigma_e * spec.sigma_e;
    let d = spec.d;
    if spec.feature_map == (FeatureMap::Polynomial { degree: 0 }) {
        return Ok(-s2e.ln());
    }
    let sampler = ModelSampler::new(spec);
    let outer = replicate(reps, seed, |rng, _| {
        let f = sampler.features(rng);
        &f * f.transpose()
    });
    let mut m = DMatrix::zeros(d, d);
    for o in &outer {
        m += o;
    }
    m /= reps as f64 * s2e;
    log_det_pd(&m, "Fisher information").map_err(|_| Error::Unsupported("feature second moment is singular".into()))
}

fn rates(cfg: &ExperimentConfig, bounds: &mut Vec<BoundReport>, checks: &mut Vec<Check>) -> Result<(Table, Value)> {
    let spec = cfg.linear()?;
    let tol = cfg.tolerances;
    let residuals = lemma2_residual(spec.sigma_w, spec.sigma_e, &cfg.ns)?;
    let prior = GaussianPrior::of_model(spec);
    let log_det_j = expected_log_det_fisher(spec, cfg.reps, SeedSpec::new(cfg.seed, 1))?;
    let mut table = Table::new(&["n", "lemma2_residual", "mc_excess_ps", "se_ps", "mc_excess_bayes", "se_bayes", "lower_rate"]);
    let mut ps_means = Vec::new();
    for (i, &n) in cfg.ns.iter().enumerate() {
        let cmp = compare_bayes_excess(
            spec,
            &LinearAlgorithm::BayesOptimal { prior: prior.clone() },
            &LinearAlgorithm::posterior_sampling(prior.clone()),
            &prior,
            n,
            cfg.reps,
            stream(cfg.seed, i, 0),
        )?;
        let lower = lower_rate_bound(spec.d, log_det_j, n)?;
        let (bo, ps) = (cmp.first, cmp.second);
        table.push(vec![
            n.to_string(),
            num(residuals[i]),
            num(ps.mean),
            num(ps.std_error),
            num(bo.mean),
            num(bo.std_error),
            num(lower.value),
        ]);
        checks.push(Check::le(format!("n={n}: lower rate <= bayes excess"), lower.value, bo.mean, tol.mc_sigmas * bo.std_error));
        checks.push(Check { name: format!("n={n}: residual positive"), passed: residuals[i] > 0.0, detail: num(residuals[i]) });
        ps_means.push(ps.mean);
        bounds.push(lower);
    }
    for (w, n) in residuals.windows(2).zip(&cfg.ns[1..]) {
        checks.push(Check::le(format!("n={n}: residual decreasing"), w[1], w[0], 0.0));
    }
    let fit = fit_rate(&cfg.ns, &ps_means)?;
    checks.push(Check {
        name: "ps excess slope in [-1.1, -0.4]".into(),
        passed: (-1.1..=-0.4).contains(&fit.slope),
        detail: num(fit.slope),
    });
    Ok((table, json!({ "ps_rate_fit": fit, "expected_log_det_j": log_det_j })))
}

fn capacity(cfg: &ExperimentConfig, bounds: &mut Vec<BoundReport>, checks: &mut Vec<Check>) -> Result<(Table, Value)> {
    let spec = cfg.threshold()?;
    let tol = cfg.tolerances;
    let mut table = Table::new(&["n", "kappa", "kappa_lower", "mi_prior", "bound_thm5b", "game_value", "ba_iterations"]);
    let mut priors = Vec::new();
    for &n in &cfg.ns {
        let ch = threshold_channel(spec, n)?;
        let ba = blahut_arimoto(&ch, tol.ba_tol)?;
        let mi = mutual_information(&ch, &spec.prior_t)?;
        let b = minimax_capacity_bound(LossRegime::Realizable, 1.0, ba.kappa, n)?;
        let lp = solve_lp(&threshold_payoff(spec, n, &threshold_rows(spec), PayoffMode::Exact)?)?;
        table.push(vec![
            n.to_string(),
            num(ba.kappa),
            num(ba.lower),
            num(mi),
            num(b.value),
            num(lp.value),
            ba.iterations.to_string(),
        ]);
        checks.push(Check::le(format!("n={n}: I(T;Z^n) <= kappa"), mi, ba.kappa, tol.exact_slack));
        checks.push(Check::le(format!("n={n}: game value <= thm5b bound"), lp.value, b.value, tol.exact_slack));
        priors.push(json!({"n": n, "capacity_prior": ba.prior}));
        bounds.push(b);
    }
    Ok((table, json!({ "capacity_priors": priors })))
}

fn envelope(cfg: &ExperimentConfig, checks: &mut Vec<Check>) -> Result<(Table, Value)> {
    let spec = cfg.linear()?;
    let opts = cfg.envelope.as_ref().expect("validated");
    let env = CumulantEnvelope::sub_exponential(spec.sigma_w, spec.sigma_e)?;
    let cases = random_envelope_cases(spec, opts.cases, opts.n_max, SeedSpec::new(cfg.seed, 0))?;
    let p0 = GaussianPrior::new(vec![0.0; spec.d], spec.sigma_w * spec.sigma_w)?;
    let report = envelope_check(spec, &p0, &cases, &default_lambda_grid(&env), opts.draws, SeedSpec::new(cfg.seed, 1))?;
    let mut table = Table::new(&["case", "n", "lambda", "log_mgf", "std_error", "envelope", "violated"]);
    for r in &report.rows {
        table.push(vec![
            r.case.to_string(),
            cases[r.case].data.len().to_string(),
            num(r.lambda),
            num(r.log_mgf),
            num(r.std_error),
            num(r.envelope),
            r.violated.to_string(),
        ]);
    }
    checks.push(Check { name: "no envelope violations".into(), passed: report.violations == 0, detail: report.violations.to_string() });
    Ok((table, json!({ "violations": report.violations, "b": env.b() })))
}

/// The three output files of a run.
pub const OUTPUT_FILES: [&str; 3] = ["results.csv", "report.json", "config-echo.json"];

/// Writes the outputs into `cfg.output_dir`; on failure removes whatever
/// was written.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &Outcome) -> std::io::Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    let csv = outcome.table.to_csv().map_err(std::io::Error::other)?;
    let report = serde_json::to_string_pretty(&outcome.report).map_err(std::io::Error::other)? + "\n";
    let echo = serde_json::to_string_pretty(cfg).map_err(std::io::Error::other)? + "\n";
    let paths: Vec<PathBuf> = OUTPUT_FILES.iter().map(|f| dir.join(f)).collect();
    let result = (|| {
        fs::create_dir_all(dir)?;
        for (p, body) in paths.iter().zip([csv, report, echo]) {
            fs::write(p, body)?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        remove_outputs(dir);
        return Err(e);
    }
    Ok(paths)
}

pub fn remove_outputs(dir: &Path) {
    for f in OUTPUT_FILES {
        let _ = fs::remove_file(dir.join(f));
    }
}
