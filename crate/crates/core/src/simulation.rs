//! Hunts and reproducible Monte Carlo batches.
//!
//! Trials run in parallel on the ambient rayon pool. Trial `i` draws from
//! its own generator stream (see [`crate::strategy`]), and outcomes are
//! collected in trial order, so a batch is a pure function of its
//! [`HuntConfig`] whatever the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{CompensatedSum, SurvivalCurve};
use crate::error::{Error, Result};
use crate::model::{Point, RabbitModel, TimeStep};
use crate::strategy::{Hunter, StrategySpec};

/// Result of one hunt: the first hit, or censoring at the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HuntOutcome {
    /// First step with a hit.
    pub hit_step: Option<u64>,
    pub cutoff: u64,
    pub guesses: u64,
    /// The throw that struck the rabbit.
    pub hitting_guess: Option<Point>,
}

impl HuntOutcome {
    pub fn is_hit(&self) -> bool {
        self.hit_step.is_some()
    }

    /// `min(T, K')` for this hunt; censored hunts contribute `K'`.
    pub fn truncated(&self, horizon: u64) -> u64 {
        self.hit_step.map_or(horizon, |t| t.min(horizon))
    }

    pub fn to_json(&self) -> HuntOutcomeJson {
        HuntOutcomeJson {
            hit: self.is_hit(),
            step: self.hit_step,
            censored_at: if self.is_hit() { None } else { Some(self.cutoff) },
            guesses_count: self.guesses,
        }
    }
}

/// Wire form of a [`HuntOutcome`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HuntOutcomeJson {
    pub hit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub censored_at: Option<u64>,
    pub guesses_count: u64,
}

/// Hunts `rabbit` for steps `1..=cutoff`.
pub fn run_hunt<H: Hunter + ?Sized>(rabbit: &RabbitModel, hunter: &mut H, cutoff: u64) -> Result<HuntOutcome> {
    run_hunt_observed(rabbit, hunter, cutoff, |_, _| {})
}

/// Like [`run_hunt`], calling `observe` with every throw before it is judged.
pub fn run_hunt_observed<H, F>(rabbit: &RabbitModel, hunter: &mut H, cutoff: u64, mut observe: F) -> Result<HuntOutcome>
where
    H: Hunter + ?Sized,
    F: FnMut(TimeStep, &Point),
{
    if cutoff == 0 {
        return Err(Error::Config("cutoff must be at least 1".into()));
    }
    for n in TimeStep::up_to(cutoff) {
        let guess = hunter.guess(n)?;
        observe(n, &guess);
        if rabbit.is_hit(&guess, n)? {
            return Ok(HuntOutcome { hit_step: Some(n.get()), cutoff, guesses: n.get(), hitting_guess: Some(guess) });
        }
    }
    Ok(HuntOutcome { hit_step: None, cutoff, guesses: cutoff, hitting_guess: None })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HuntConfig {
    pub rabbit: RabbitModel,
    pub strategy: StrategySpec,
    pub cutoff: u64,
    pub master_seed: u64,
    pub trials: u64,
}

impl HuntConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::Config("cutoff must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.strategy.check_compatible(&self.rabbit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatchResult {
    pub master_seed: u64,
    pub cutoff: u64,
    /// Per-trial outcomes in trial-index order.
    pub outcomes: Vec<HuntOutcome>,
    /// Sorted hit steps of the trials that hit.
    pub hit_steps: Vec<u64>,
    pub censored_count: u64,
}

impl TrialBatchResult {
    pub fn trials(&self) -> u64 {
        self.outcomes.len() as u64
    }

    pub fn hit_fraction(&self) -> f64 {
        self.hit_steps.len() as f64 / self.trials() as f64
    }

    /// `Ŝ(k)` for `k = 0..=K`: fraction of trials not hit by step `k`.
    pub fn empirical_survival(&self) -> Vec<f64> {
        let trials = self.trials() as f64;
        let mut out = Vec::with_capacity(self.cutoff as usize + 1);
        let mut hit_so_far = 0usize;
        for k in 0..=self.cutoff {
            while hit_so_far < self.hit_steps.len() && self.hit_steps[hit_so_far] <= k {
                hit_so_far += 1;
            }
            out.push((self.trials() - hit_so_far as u64) as f64 / trials);
        }
        out
    }
}

/// Runs `config.trials` independent hunts; trial `i` uses stream `i` of the master seed.
pub fn run_trials(config: &HuntConfig) -> Result<TrialBatchResult> {
    config.validate()?;
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut hunter = config.strategy.hunter(config.master_seed, trial);
            run_hunt(&config.rabbit, &mut hunter, config.cutoff)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut hit_steps: Vec<u64> = outcomes.iter().filter_map(|o| o.hit_step).collect();
    hit_steps.sort_unstable();
    let censored_count = config.trials - hit_steps.len() as u64;
    Ok(TrialBatchResult { master_seed: config.master_seed, cutoff: config.cutoff, outcomes, hit_steps, censored_count })
}

/// Sample means of `min(T, K')` for each horizon `K' ≤ K`.
pub fn empirical_mean_excess(result: &TrialBatchResult, horizons: &[u64]) -> Result<Vec<f64>> {
    horizons
        .iter()
        .map(|&h| {
            if h == 0 || h > result.cutoff {
                return Err(Error::Domain(format!("horizon {h} outside 1..={}", result.cutoff)));
            }
            let total = result.outcomes.iter().map(|o| o.truncated(h) as f64).collect::<CompensatedSum>();
            Ok(total.value() / result.trials() as f64)
        })
        .collect()
}

/// The evenly spaced survival checkpoints used for agreement checks:
/// `step, 2·step, …, K` with `step = max(1, K/200)`.
pub fn survival_grid(cutoff: u64) -> Vec<u64> {
    let step = (cutoff / 200).max(1);
    (1..=cutoff / step).map(|j| j * step).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub checked: usize,
    pub within: usize,
    pub fraction: f64,
    pub required: f64,
    pub passed: bool,
    /// `(k, Ŝ(k), S(k), σ)` at points outside the band.
    pub outliers: Vec<(u64, f64, f64, f64)>,
}

/// Pointwise `|Ŝ(k) − S(k)| ≤ z·σ_k` with `σ_k = sqrt(S(k)(1−S(k))/N)`.
pub fn survival_agreement(
    result: &TrialBatchResult,
    curve: &SurvivalCurve,
    grid: &[u64],
    z: f64,
    required: f64,
) -> Result<AgreementReport> {
    if curve.horizon() < result.cutoff {
        return Err(Error::Domain("analytic curve shorter than the batch cutoff".into()));
    }
    let empirical = result.empirical_survival();
    let n = result.trials() as f64;
    let mut outliers = Vec::new();
    for &k in grid {
        if k > result.cutoff {
            return Err(Error::Domain(format!("grid point {k} beyond cutoff {}", result.cutoff)));
        }
        let s = curve.survival(k);
        let e = empirical[k as usize];
        let sigma = (s * (1.0 - s) / n).sqrt();
        if (e - s).abs() > z * sigma + 1e-12 {
            outliers.push((k, e, s, sigma));
        }
    }
    let checked = grid.len();
    let within = checked - outliers.len();
    let fraction = if checked == 0 { 1.0 } else { within as f64 / checked as f64 };
    Ok(AgreementReport { checked, within, fraction, required, passed: fraction >= required, outliers })
}
