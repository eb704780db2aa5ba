//! Run manifests and the files a Monte Carlo run leaves behind.
//!
//! A run directory holds `manifest.json`, `trials.csv`, `survival.csv` and
//! `summary.json`. The manifest records every input that affects the
//! outputs (and nothing else, so thread counts and output paths are left
//! out); replaying it reproduces all four files byte for byte.
//!
//! CSV layouts:
//!
//! * `trials.csv`: `trial,outcome,step,guesses_count`, `outcome` is `hit` or
//!   `censored`, `step` the hit step or the cutoff.
//! * `survival.csv`: `k,p_k,S_analytic,S_empirical` for `k = 0..=K`
//!   (`p_0` is left empty).

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{survival_for_strategy, SurvivalCurve};
use crate::error::Error;
use crate::simulation::{
    empirical_mean_excess, run_trials, survival_agreement, survival_grid, AgreementReport, HuntConfig,
    TrialBatchResult,
};

pub const TOOL: &str = "rabbit-hunt";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRIALS_FILE: &str = "trials.csv";
pub const SURVIVAL_FILE: &str = "survival.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Pointwise band width and pass fraction for the agreement check.
pub const AGREEMENT_SIGMAS: f64 = 3.0;
pub const AGREEMENT_REQUIRED: f64 = 0.99;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Fully resolved inputs of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabbit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub horizons: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Manifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            rabbit: None,
            strategy: None,
            cutoff: None,
            trials: None,
            seed,
            horizons: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn for_montecarlo(config: &HuntConfig, horizons: Vec<u64>) -> Self {
        Manifest {
            rabbit: Some(config.rabbit.to_string()),
            strategy: Some(config.strategy.to_string()),
            cutoff: Some(config.cutoff),
            trials: Some(config.trials),
            horizons,
            outputs: [MANIFEST_FILE, TRIALS_FILE, SURVIVAL_FILE, SUMMARY_FILE].map(String::from).to_vec(),
            ..Manifest::new("montecarlo", config.master_seed)
        }
    }
}

/// Default truncation horizons: powers of ten below `K`, then `K`.
pub fn default_horizons(cutoff: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(10u64), |h| h.checked_mul(10)).take_while(|&h| h < cutoff).collect();
    out.push(cutoff);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedMeanRow {
    pub horizon: u64,
    pub empirical: f64,
    pub analytic: f64,
    pub standard_error: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub survival: AgreementReport,
    pub hit_fraction_within: bool,
    pub truncated_means_within: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub manifest: Manifest,
    pub trials: u64,
    pub hits: u64,
    pub censored_count: u64,
    pub hit_fraction: f64,
    pub analytic_hit_fraction: f64,
    pub truncated_means: Vec<TruncatedMeanRow>,
    pub check: CheckReport,
}

/// A finished batch with its analytic counterpart.
#[derive(Debug, Clone)]
pub struct MonteCarloRun {
    pub config: HuntConfig,
    pub result: TrialBatchResult,
    pub curve: SurvivalCurve,
    pub summary: MonteCarloSummary,
}

/// Runs the batch and compares it with the exact survival curve.
pub fn run_montecarlo(config: &HuntConfig, horizons: &[u64]) -> Result<MonteCarloRun, ExportError> {
    config.validate()?;
    let horizons = if horizons.is_empty() { default_horizons(config.cutoff) } else { horizons.to_vec() };
    let result = run_trials(config)?;
    let curve = survival_for_strategy(&config.rabbit, &config.strategy, config.cutoff)?;

    let empirical = empirical_mean_excess(&result, &horizons)?;
    let truncated_means = horizons
        .iter()
        .zip(empirical)
        .map(|(&horizon, empirical)| {
            let analytic = curve.truncated_mean_at(horizon)?;
            let standard_error = curve.truncated_mean_standard_error(horizon, result.trials())?;
            let within = (empirical - analytic).abs() <= AGREEMENT_SIGMAS * standard_error + 1e-9 * analytic.max(1.0);
            Ok(TruncatedMeanRow { horizon, empirical, analytic, standard_error, within })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let survival =
        survival_agreement(&result, &curve, &survival_grid(config.cutoff), AGREEMENT_SIGMAS, AGREEMENT_REQUIRED)?;
    let s_final = curve.survival(config.cutoff);
    let analytic_hit_fraction = 1.0 - s_final;
    let sigma = (s_final * (1.0 - s_final) / result.trials() as f64).sqrt();
    let hit_fraction_within = (result.hit_fraction() - analytic_hit_fraction).abs() <= AGREEMENT_SIGMAS * sigma + 1e-12;
    let truncated_means_within = truncated_means.iter().all(|r| r.within);
    let check = CheckReport {
        passed: survival.passed && hit_fraction_within && truncated_means_within,
        survival,
        hit_fraction_within,
        truncated_means_within,
    };

    let summary = MonteCarloSummary {
        manifest: Manifest::for_montecarlo(config, horizons),
        trials: result.trials(),
        hits: result.hit_steps.len() as u64,
        censored_count: result.censored_count,
        hit_fraction: result.hit_fraction(),
        analytic_hit_fraction,
        truncated_means,
        check,
    };
    Ok(MonteCarloRun { config: config.clone(), result, curve, summary })
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the four run files into `dir`, creating it if needed.
pub fn write_montecarlo(dir: &Path, run: &MonteCarloRun) -> Result<(), ExportError> {
    fs::create_dir_all(dir)?;

    let mut manifest = serde_json::to_string_pretty(&run.summary.manifest)?;
    manifest.push('\n');
    fs::write(dir.join(MANIFEST_FILE), manifest)?;

    let mut w = csv::Writer::from_path(dir.join(TRIALS_FILE))?;
    w.write_record(["trial", "outcome", "step", "guesses_count"])?;
    for (i, o) in run.result.outcomes.iter().enumerate() {
        let (outcome, step) = match o.hit_step {
            Some(t) => ("hit", t),
            None => ("censored", o.cutoff),
        };
        w.write_record([i.to_string(), outcome.to_string(), step.to_string(), o.guesses.to_string()])?;
    }
    w.flush()?;

    write_survival_csv(dir.join(SURVIVAL_FILE), &run.curve, Some(&run.result.empirical_survival()))?;

    let mut summary = serde_json::to_string_pretty(&run.summary)?;
    summary.push('\n');
    fs::write(dir.join(SUMMARY_FILE), summary)?;
    Ok(())
}

/// `k,p_k,S_analytic[,S_empirical]` rows for `k = 0..=K`.
pub fn write_survival_csv(
    path: impl AsRef<Path>,
    curve: &SurvivalCurve,
    empirical: Option<&[f64]>,
) -> Result<(), ExportError> {
    let file = fs::File::create(path)?;
    write_survival_to(file, curve, empirical)
}

pub fn write_survival_to<W: Write>(out: W, curve: &SurvivalCurve, empirical: Option<&[f64]>) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    match empirical {
        Some(_) => w.write_record(["k", "p_k", "S_analytic", "S_empirical"])?,
        None => w.write_record(["k", "p_k", "S_k"])?,
    }
    let p = curve.hit_probabilities();
    for (k, &s) in curve.survival_values().iter().enumerate() {
        let p_k = if k == 0 { None } else { Some(p[k - 1]) };
        let mut row = vec![k.to_string(), opt_f64(p_k), s.to_string()];
        if let Some(e) = empirical {
            row.push(opt_f64(e.get(k).copied()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
