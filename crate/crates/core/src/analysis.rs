//! Closed-form side of the hunt: per-step hit probabilities, survival
//! curves `S(k) = P(T > k)`, truncated means, Raabe ratios and series
//! diagnostics.
//!
//! The per-step miss probability is the exact `2h(n)/(2h(n)+1)` for a
//! contained integer rabbit: the uniform throw has `2h(n)+1` support points.
//! Survival products are accumulated in log space.

use num_rational::Ratio;
use serde::Serialize;

use crate::envelope::HFunction;
use crate::error::{Error, Result};
use crate::model::{Integer, LinearRabbit, RabbitModel, TimeStep};
use crate::strategy::{DiagonalHunter, Hunter, StrategySpec};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Number of throws in `{-h, …, h}` that strike a one-dimensional rabbit at step `n`.
pub fn hitting_support(rabbit: &RabbitModel, h: u64, n: TimeStep) -> Result<u64> {
    let radius = h as Integer;
    match rabbit {
        RabbitModel::Linear(r) => Ok(u64::from(r.position(n)?.abs() <= radius)),
        RabbitModel::Polynomial(r) => Ok(u64::from(r.position(n)?.abs() <= radius)),
        RabbitModel::RealLinear(r) => {
            let x = r.position(n);
            let lo = (x - 0.5).ceil().max(-(h as f64));
            let hi = (x + 0.5).floor().min(h as f64);
            Ok(if hi >= lo { (hi - lo) as u64 + 1 } else { 0 })
        }
        RabbitModel::Lattice2D(_) => Err(Error::Config("envelope sampling is one-dimensional".into())),
    }
}

/// `p_n` for any one-dimensional rabbit against the envelope hunter.
pub fn hit_probability(rabbit: &RabbitModel, h: &HFunction, n: TimeStep) -> Result<f64> {
    let radius = h.eval(n);
    let hits = hitting_support(rabbit, radius, n)?;
    Ok(hits as f64 / (2 * radius + 1) as f64)
}

/// `1/(2h(n)+1)` when `|R_n| ≤ h(n)`, else 0.
pub fn step_hit_prob(rabbit: &LinearRabbit, h: &HFunction, n: TimeStep) -> Result<f64> {
    hit_probability(&RabbitModel::Linear(*rabbit), h, n)
}

/// `S(k)` for `k = 0..=K` together with the per-step `p_n`, `n = 1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    p: Vec<f64>,
    s: Vec<f64>,
}

impl SurvivalCurve {
    /// Builds the curve from per-step hit probabilities `p_1, …, p_K`.
    pub fn from_hit_probabilities(p: Vec<f64>) -> Result<Self> {
        if let Some((i, &bad)) = p.iter().enumerate().find(|(_, &q)| !(0.0..=1.0).contains(&q)) {
            return Err(Error::Domain(format!("hit probability p_{} = {bad} outside [0, 1]", i + 1)));
        }
        let mut s = Vec::with_capacity(p.len() + 1);
        s.push(1.0);
        let mut log_s = 0.0f64;
        let mut dead = false;
        for &q in &p {
            if q >= 1.0 {
                dead = true;
            }
            if dead {
                s.push(0.0);
            } else {
                log_s += (-q).ln_1p();
                s.push(log_s.exp());
            }
        }
        Ok(SurvivalCurve { p, s })
    }

    /// `K`.
    pub fn horizon(&self) -> u64 {
        self.p.len() as u64
    }

    /// `S(k)` for `0 ≤ k ≤ K`.
    pub fn survival(&self, k: u64) -> f64 {
        self.s[k as usize]
    }

    /// `p_n` for `1 ≤ n ≤ K`.
    pub fn hit_prob(&self, n: TimeStep) -> f64 {
        self.p[(n.get() - 1) as usize]
    }

    pub fn survival_values(&self) -> &[f64] {
        &self.s
    }

    pub fn hit_probabilities(&self) -> &[f64] {
        &self.p
    }

    /// `Σ_{k<K'} S(k) = E[min(T, K')]`, `K' ≤ K`.
    pub fn truncated_mean_at(&self, horizon: u64) -> Result<f64> {
        self.check_horizon(horizon)?;
        Ok(self.s[..horizon as usize].iter().copied().collect::<CompensatedSum>().value())
    }

    /// `Σ_{k<K'} (2k+1) S(k) = E[min(T, K')²]`.
    pub fn truncated_second_moment_at(&self, horizon: u64) -> Result<f64> {
        self.check_horizon(horizon)?;
        Ok(self.s[..horizon as usize]
            .iter()
            .enumerate()
            .map(|(k, &s)| (2 * k + 1) as f64 * s)
            .collect::<CompensatedSum>()
            .value())
    }

    /// Standard error of the sample mean of `min(T, K')` over `trials` hunts.
    pub fn truncated_mean_standard_error(&self, horizon: u64, trials: u64) -> Result<f64> {
        let m1 = self.truncated_mean_at(horizon)?;
        let m2 = self.truncated_second_moment_at(horizon)?;
        Ok(((m2 - m1 * m1).max(0.0) / trials as f64).sqrt())
    }

    fn check_horizon(&self, horizon: u64) -> Result<()> {
        if horizon > self.horizon() {
            return Err(Error::Domain(format!("horizon {horizon} beyond curve length {}", self.horizon())));
        }
        Ok(())
    }
}

/// Exact survival of a linear rabbit against the envelope hunter over `1..=K`.
pub fn analytic_survival(rabbit: &LinearRabbit, h: &HFunction, horizon: u64) -> Result<SurvivalCurve> {
    survival_for(&RabbitModel::Linear(*rabbit), h, horizon)
}

/// Exact survival of any one-dimensional rabbit against the envelope hunter.
pub fn survival_for(rabbit: &RabbitModel, h: &HFunction, horizon: u64) -> Result<SurvivalCurve> {
    if horizon == 0 {
        return Err(Error::Domain("survival horizon must be at least 1".into()));
    }
    let p = TimeStep::up_to(horizon).map(|n| hit_probability(rabbit, h, n)).collect::<Result<Vec<_>>>()?;
    SurvivalCurve::from_hit_probabilities(p)
}

/// Exact survival for a configured strategy. Diagonal hunts are deterministic,
/// so their curve is the step indicator of the first hit.
pub fn survival_for_strategy(rabbit: &RabbitModel, strategy: &StrategySpec, horizon: u64) -> Result<SurvivalCurve> {
    strategy.check_compatible(rabbit)?;
    match strategy {
        StrategySpec::Probabilistic(h) => survival_for(rabbit, h, horizon),
        StrategySpec::Diagonal(d) => {
            if horizon == 0 {
                return Err(Error::Domain("survival horizon must be at least 1".into()));
            }
            let mut hunter = DiagonalHunter::new(*d);
            let p = TimeStep::up_to(horizon)
                .map(|n| Ok(if rabbit.is_hit(&hunter.guess(n)?, n)? { 1.0 } else { 0.0 }))
                .collect::<Result<Vec<_>>>()?;
            SurvivalCurve::from_hit_probabilities(p)
        }
    }
}

/// `Σ_{k=0}^{K-1} S(k)` over the whole curve.
pub fn truncated_mean(curve: &SurvivalCurve) -> f64 {
    curve.s[..curve.p.len()].iter().copied().collect::<CompensatedSum>().value()
}

/// Raabe ratio `n (a_n / a_{n+1} − 1) = n / (2h(n+1) − 1)` as an exact fraction.
pub fn raabe_rho_exact(n: TimeStep, h: &HFunction) -> Result<Ratio<i128>> {
    let next = h.eval_raw(n.get() + 1) as i128;
    let denom = 2 * next - 1;
    if denom <= 0 {
        return Err(Error::Domain(format!("Raabe ratio undefined at n = {n}: 2h(n+1) - 1 = {denom}")));
    }
    Ok(Ratio::new(n.get() as i128, denom))
}

pub fn raabe_rho(n: TimeStep, h: &HFunction) -> Result<f64> {
    let r = raabe_rho_exact(n, h)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// Partial sums of `1/max(h(k), 1)` for `m = 2..=K`, plus the unfloored
/// companion `Σ 1/h̃(k)` where a continuous form `h̃` is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalSums {
    pub floored: Vec<f64>,
    pub unfloored: Option<Vec<f64>>,
}

impl ReciprocalSums {
    /// Sum up to `m` (`2 ≤ m ≤ K`).
    pub fn floored_at(&self, m: u64) -> f64 {
        self.floored[(m - 2) as usize]
    }

    pub fn unfloored_at(&self, m: u64) -> Option<f64> {
        self.unfloored.as_ref().map(|u| u[(m - 2) as usize])
    }
}

pub fn reciprocal_partial_sums(h: &HFunction, horizon: u64) -> Result<ReciprocalSums> {
    if horizon < 2 {
        return Err(Error::Domain("reciprocal sums need a horizon of at least 2".into()));
    }
    let mut floored = Vec::with_capacity(horizon as usize - 1);
    let mut acc = CompensatedSum::default();
    for k in 2..=horizon {
        acc.add(1.0 / h.eval_raw(k).max(1) as f64);
        floored.push(acc.value());
    }
    let unfloored = match h.eval_real(2.0) {
        Some(v) if v > 0.0 => {
            let mut acc = CompensatedSum::default();
            let mut out = Vec::with_capacity(horizon as usize - 1);
            for k in 2..=horizon {
                acc.add(1.0 / h.eval_real(k as f64).expect("continuous form"));
                out.push(acc.value());
            }
            Some(out)
        }
        _ => None,
    };
    Ok(ReciprocalSums { floored, unfloored })
}

/// Integral-test bounds on `Σ_{k=2}^{m} 1/(k ln k)`:
/// `ln ln(m+1) − ln ln 2 ≤ Σ ≤ 1/(2 ln 2) + ln ln m − ln ln 2`.
pub fn integral_test_bounds(m: u64) -> (f64, f64) {
    let lnln2 = std::f64::consts::LN_2.ln();
    let lower = ((m + 1) as f64).ln().ln() - lnln2;
    let upper = 1.0 / (2.0 * std::f64::consts::LN_2) + (m as f64).ln().ln() - lnln2;
    (lower, upper)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichRow {
    pub m: u64,
    pub lower: f64,
    pub floored: f64,
    pub unfloored: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Checks the integral-test sandwich at each `m` in `checkpoints`, with `slack`.
/// The floored sum is only held to the lower bound (flooring enlarges terms).
pub fn integral_sandwich(sums: &ReciprocalSums, checkpoints: &[u64], slack: f64) -> Result<Vec<SandwichRow>> {
    let max = sums.floored.len() as u64 + 1;
    checkpoints
        .iter()
        .map(|&m| {
            if !(2..=max).contains(&m) {
                return Err(Error::Domain(format!("checkpoint {m} outside 2..={max}")));
            }
            let unfloored = sums
                .unfloored_at(m)
                .ok_or_else(|| Error::Domain("no continuous form for this envelope".into()))?;
            let floored = sums.floored_at(m);
            let (lower, upper) = integral_test_bounds(m);
            let holds = lower - slack <= unfloored && unfloored <= upper + slack && floored >= lower - slack;
            Ok(SandwichRow { m, lower, floored, unfloored, upper, holds })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogSeriesReport {
    pub terms: u64,
    pub sum_terms: f64,
    pub sum_logs: f64,
    /// `Σ log(1+a_k) / Σ a_k`; absent when `Σ a_k = 0`.
    pub ratio: Option<f64>,
    /// `(m, Σ_{k≤m} a_k, Σ_{k≤m} log(1+a_k))` at powers of ten and at the end.
    pub checkpoints: Vec<(u64, f64, f64)>,
}

/// Paired partial sums of `a_k` and `log(1 + a_k)` over the first `limit` terms.
pub fn log_series_equivalence_check(terms: impl IntoIterator<Item = f64>, limit: u64) -> Result<LogSeriesReport> {
    let mut plain = CompensatedSum::default();
    let mut logs = CompensatedSum::default();
    let mut checkpoints = Vec::new();
    let mut next = 10u64;
    let mut count = 0u64;
    for a in terms.into_iter().take(limit as usize) {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("series term {} = {a} is not a non-negative number", count + 1)));
        }
        count += 1;
        plain.add(a);
        logs.add(a.ln_1p());
        if count == next {
            checkpoints.push((count, plain.value(), logs.value()));
            next = next.saturating_mul(10);
        }
    }
    if checkpoints.last().map(|c| c.0) != Some(count) {
        checkpoints.push((count, plain.value(), logs.value()));
    }
    let (sum_terms, sum_logs) = (plain.value(), logs.value());
    Ok(LogSeriesReport {
        terms: count,
        sum_terms,
        sum_logs,
        ratio: (sum_terms > 0.0).then(|| sum_logs / sum_terms),
        checkpoints,
    })
}
