//! Experiment configuration files.
//!
//! One strict JSON object per run; unknown keys are rejected and every
//! experiment-specific requirement is checked in [`ExperimentConfig::validate`]
//! before any computation starts. The schema is documented in
//! `docs/config.md`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linear::LinearModelSpec;
use crate::vc::ThresholdClassSpec;

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "ERLAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RlsBound,
    Game,
    Vc,
    Rates,
    Capacity,
    Envelope,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::RlsBound,
        ExperimentKind::Game,
        ExperimentKind::Vc,
        ExperimentKind::Rates,
        ExperimentKind::Capacity,
        ExperimentKind::Envelope,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::RlsBound => "rls-bound",
            ExperimentKind::Game => "game",
            ExperimentKind::Vc => "vc",
            ExperimentKind::Rates => "rates",
            ExperimentKind::Capacity => "capacity",
            ExperimentKind::Envelope => "envelope",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ExperimentKind::RlsBound => "Bayes excess risk of RLS and posterior sampling on the Gaussian linear model against the information bounds",
            ExperimentKind::Game => "finite designer-vs-world excess-risk game: payoff matrix, LP and fictitious-play solutions, pure-strategy gap",
            ExperimentKind::Vc => "exact information chain and Bayes excess risk for thresholds on a finite grid",
            ExperimentKind::Rates => "Gaussian-location information residual, log-log rate fit of posterior sampling, individual lower rate",
            ExperimentKind::Capacity => "Blahut-Arimoto capacity of the threshold data channel and the capacity route to the minimax risk",
            ExperimentKind::Envelope => "empirical cumulant of the posterior-sampling loss against the sub-exponential envelope",
        }
    }

    /// Report identifiers of the bounds each experiment evaluates.
    pub fn bounds(&self) -> &'static [&'static str] {
        match self {
            ExperimentKind::RlsBound => &["thm7", "thm10"],
            ExperimentKind::Game => &["thm5b"],
            ExperimentKind::Vc => &["thm4b"],
            ExperimentKind::Rates => &["lower_rate"],
            ExperimentKind::Capacity => &["thm5b"],
            ExperimentKind::Envelope => &[],
        }
    }
}

/// Numerical tolerances; every field has a default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Width of Monte Carlo checks in standard errors.
    pub mc_sigmas: f64,
    /// Slack for comparisons between exact quantities.
    pub exact_slack: f64,
    /// Stopping gap for Blahut–Arimoto.
    pub ba_tol: f64,
    /// Stopping gap for fictitious play.
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    /// Allowed `|primal − dual|` for the simplex solution.
    pub lp_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { mc_sigmas: 3.0, exact_slack: 1e-12, ba_tol: 1e-9, fp_tol: 1e-3, fp_max_iters: 1_000_000, lp_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameMode {
    Exact,
    MonteCarlo,
}

/// Options of the `game` experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameOptions {
    pub mode: GameMode,
    /// Lattice points per axis of the world grid (linear model only).
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_grid_points() -> usize {
    5
}

/// Options of the `envelope` experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeOptions {
    pub cases: usize,
    pub draws: usize,
    pub n_max: usize,
}

fn default_reps() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub ns: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdClassSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeOptions>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies `ERLAB_SEED` if set to a valid integer.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}={v} is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn linear(&self) -> Result<&LinearModelSpec> {
        self.linear.as_ref().ok_or_else(|| Error::InvalidArgument(format!("{} needs a \"linear\" model", self.experiment.name())))
    }

    pub fn threshold(&self) -> Result<&ThresholdClassSpec> {
        self.threshold.as_ref().ok_or_else(|| Error::InvalidArgument(format!("{} needs a \"threshold\" model", self.experiment.name())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_dir.as_os_str().is_empty() {
            return invalid("output_dir must be non-empty");
        }
        if let Some(m) = &self.linear {
            m.validate()?;
        }
        if let Some(t) = &self.threshold {
            t.validate()?;
        }
        let t = &self.tolerances;
        if !(t.mc_sigmas > 0.0 && t.exact_slack >= 0.0 && t.ba_tol > 0.0 && t.fp_tol > 0.0 && t.lp_tol > 0.0 && t.fp_max_iters > 0) {
            return invalid("tolerances must be positive");
        }
        if self.ns.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("ns must be strictly increasing");
        }
        let needs_ns = |min: usize| -> Result<()> {
            if self.ns.is_empty() {
                return invalid(format!("{} needs a non-empty \"ns\"", self.experiment.name()));
            }
            if self.ns[0] < min {
                return invalid(format!("{} needs every n >= {min}", self.experiment.name()));
            }
            Ok(())
        };
        let needs_reps = || -> Result<()> {
            if self.reps < 2 {
                return invalid("reps must be at least 2");
            }
            Ok(())
        };
        match self.experiment {
            ExperimentKind::RlsBound => {
                self.linear()?;
                needs_ns(1)?;
                needs_reps()?;
            }
            ExperimentKind::Game => {
                if self.linear.is_some() == self.threshold.is_some() {
                    return invalid("game needs exactly one of \"linear\" or \"threshold\"");
                }
                needs_ns(0)?;
                let opts = self.game.as_ref().ok_or_else(|| Error::InvalidArgument("game needs \"game\" options".into()))?;
                if opts.mode == GameMode::MonteCarlo {
                    needs_reps()?;
                }
                if opts.grid_points < 2 {
                    return invalid("grid_points must be at least 2");
                }
            }
            ExperimentKind::Vc | ExperimentKind::Capacity => {
                self.threshold()?;
                needs_ns(1)?;
            }
            ExperimentKind::Rates => {
                self.linear()?;
                needs_ns(1)?;
                if self.ns.len() < 2 {
                    return invalid("rates needs at least two sample sizes");
                }
                needs_reps()?;
            }
            ExperimentKind::Envelope => {
                self.linear()?;
                let e = self.envelope.as_ref().ok_or_else(|| Error::InvalidArgument("envelope needs \"envelope\" options".into()))?;
                if e.cases == 0 || e.draws < 2 || e.n_max == 0 {
                    return invalid("envelope needs cases >= 1, draws >= 2, n_max >= 1");
                }
            }
        }
        Ok(())
    }
}
