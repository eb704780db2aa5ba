//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test --test acceptance` (add `--release` for tighter timings).

use std::collections::HashSet;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rabbit_hunt::analysis::{
    analytic_survival, integral_sandwich, raabe_rho, raabe_rho_exact, reciprocal_partial_sums, survival_for,
};
use rabbit_hunt::enumeration::{inverse3, inverse4, snake_forward, snake_inverse, Dimension};
use rabbit_hunt::envelope::{klogk, HFunction};
use rabbit_hunt::model::{Integer, LatticeRabbit2D, LinearRabbit, Point, PolynomialRabbit, RabbitModel, RealLinearRabbit, TimeStep};
use rabbit_hunt::simulation::{
    empirical_mean_excess, run_hunt, run_trials, survival_agreement, survival_grid, HuntConfig,
};
use rabbit_hunt::strategy::{DiagonalHunter, Hunter, ProbabilisticHunter, StrategySpec};
use num_rational::Ratio;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIGMAS: f64 = 3.0;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn step(n: u64) -> TimeStep {
    TimeStep::new(n).unwrap()
}

/// Hunts every rabbit up to its own enumeration index and tallies how the
/// first hit relates to that index.
struct DiagonalTally {
    cases: u64,
    exact: u64,
    guaranteed: u64,
    first_exception: Option<String>,
}

impl DiagonalTally {
    fn new() -> Self {
        DiagonalTally { cases: 0, exact: 0, guaranteed: 0, first_exception: None }
    }

    fn record(&mut self, label: impl FnOnce() -> String, rabbit: &RabbitModel, dim: Dimension, index: u64) {
        let mut hunter = DiagonalHunter::new(dim);
        let outcome = run_hunt(rabbit, &mut hunter, index).unwrap();
        self.cases += 1;
        let strike_at_index = rabbit.is_hit(&hunter.guess(step(index)).unwrap(), step(index)).unwrap();
        if strike_at_index && outcome.hit_step.is_some_and(|t| t <= index) {
            self.guaranteed += 1;
        }
        if outcome.hit_step == Some(index) {
            self.exact += 1;
        } else if self.first_exception.is_none() {
            self.first_exception = Some(format!("{} first hit at {:?}, index {index}", label(), outcome.hit_step));
        }
    }

    fn verdict(&self, elapsed: Duration, limit: Duration) -> Verdict {
        let exceptions = self.cases - self.exact;
        let mut detail = format!(
            "hit step == index for {}/{} ({} exceptions); T <= index and strike at index for {}/{}; {:.2?} (limit {:?})",
            self.exact, self.cases, exceptions, self.guaranteed, self.cases, elapsed, limit
        );
        if let Some(e) = &self.first_exception {
            detail.push_str(&format!("; e.g. {e}"));
        }
        verdict(exceptions == 0 && self.guaranteed == self.cases && elapsed < limit, detail)
    }
}

fn figure_fidelity() -> Verdict {
    const FIGURE: [(i64, i64); 25] = [
        (0, 0), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1),
        (2, -1), (2, 0), (2, 1), (2, 2), (1, 2), (0, 2), (-1, 2), (-2, 2), (-2, 1),
        (-2, 0), (-2, -1), (-2, -2), (-1, -2), (0, -2), (1, -2), (2, -2),
    ];
    let start = Instant::now();
    let table_ok = FIGURE.iter().enumerate().all(|(i, &p)| snake_forward(i as u64 + 1).unwrap() == p);
    let forward_ok = (1..=1_000_000u64).all(|k| {
        let (x, y) = snake_forward(k).unwrap();
        snake_inverse(x, y).unwrap() == k
    });
    let inverse_ok =
        (-100..=100).all(|x| (-100..=100).all(|y| snake_forward(snake_inverse(x, y).unwrap()).unwrap() == (x, y)));
    let elapsed = start.elapsed();
    verdict(
        table_ok && forward_ok && inverse_ok && elapsed < Duration::from_secs(1),
        format!("table {table_ok}, index round trip {forward_ok}, box round trip {inverse_ok}, {elapsed:.2?} (limit 1s)"),
    )
}

fn diagonal_linear() -> Verdict {
    let start = Instant::now();
    let mut tally = DiagonalTally::new();
    for a in -50..=50i64 {
        for b in -50..=50i64 {
            let index = snake_inverse(a, b).unwrap();
            tally.record(|| format!("({a},{b})"), &LinearRabbit::new(a as Integer, b as Integer).into(), Dimension::Two, index);
        }
    }
    tally.verdict(start.elapsed(), Duration::from_secs(10))
}

fn quadratic_both_halves() -> Verdict {
    let start = Instant::now();
    let mut tally = DiagonalTally::new();
    for a in -8..=8i64 {
        for b in -8..=8i64 {
            for c in -8..=8i64 {
                let index = inverse3([a, b, c]).unwrap();
                let rabbit = PolynomialRabbit::new(vec![a as Integer, b as Integer, c as Integer]).unwrap().into();
                tally.record(|| format!("({a},{b},{c})"), &rabbit, Dimension::Three, index);
            }
        }
    }
    let half_a = tally.verdict(start.elapsed(), Duration::from_secs(60));

    // (b) envelope escape: the last step with |R_n| ≤ h(n) comes before 10^5
    const LIMIT: u64 = 100_000;
    let h: Vec<i128> = (0..=LIMIT).map(|n| if n == 0 { 0 } else { klogk(n) as i128 }).collect();
    let mut escaped = 0;
    let mut quadratics = 0;
    let mut latest_entry = 0;
    for a in -8..=8i128 {
        for b in -8..=8i128 {
            for c in (-8..=8i128).filter(|&c| c != 0) {
                quadratics += 1;
                let pos = |n: u64| a + b * n as i128 + c * (n as i128) * (n as i128);
                let last_contained = (1..=LIMIT).rev().find(|&n| pos(n).abs() <= h[n as usize]).unwrap_or(0);
                if last_contained < LIMIT {
                    escaped += 1;
                    latest_entry = latest_entry.max(last_contained + 1);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let half_b = escaped == quadratics;
    verdict(
        half_a.passed && half_b && elapsed < Duration::from_secs(60),
        format!(
            "(a) {}; (b) escaped for good by N <= {latest_entry} in {escaped}/{quadratics}; total {elapsed:.2?} (limit 60s)",
            half_a.detail
        ),
    )
}

fn probability_one_capture() -> Verdict {
    let start = Instant::now();
    let trials = 10_000;
    let cutoff = 2_000;
    let rabbit = LinearRabbit::new(0, 1);
    let config = HuntConfig {
        rabbit: rabbit.into(),
        strategy: StrategySpec::Probabilistic(HFunction::klogk()),
        cutoff,
        master_seed: 4,
        trials,
    };
    let result = run_trials(&config).unwrap();
    let curve = analytic_survival(&rabbit, &HFunction::klogk(), cutoff).unwrap();
    let s = curve.survival(cutoff);
    let analytic = 1.0 - s;
    let se = (s * (1.0 - s) / trials as f64).sqrt();
    let frac_ok = (result.hit_fraction() - analytic).abs() <= SIGMAS * se;
    let agreement = survival_agreement(&result, &curve, &survival_grid(cutoff), SIGMAS, 0.99).unwrap();
    let elapsed = start.elapsed();
    verdict(
        frac_ok && agreement.passed && elapsed < Duration::from_secs(60),
        format!(
            "hit fraction {:.4} vs analytic {analytic:.4} (3σ = {:.4}); pointwise within 3σ at {}/{} grid points; {elapsed:.2?}",
            result.hit_fraction(),
            SIGMAS * se,
            agreement.within,
            agreement.checked
        ),
    )
}

fn raabe_closed_form() -> Verdict {
    let h = HFunction::klogk();
    let r10 = raabe_rho_exact(step(10), &h).unwrap();
    let r1000 = raabe_rho_exact(step(1000), &h).unwrap();
    let tail = raabe_rho(step(1_000_000), &h).unwrap();
    let exact_ok = r10 == Ratio::new(10, 51) && r1000 == Ratio::new(1000, 13829);
    let tail_ok = tail < 1e-2;
    verdict(exact_ok && tail_ok, format!("rho(10) = {r10}, rho(1000) = {r1000}; rho(10^6) = {tail:.5} (required < 0.01)"))
}

fn truncated_mean_growth() -> Verdict {
    let start = Instant::now();
    let rabbit = LinearRabbit::new(0, 1);
    let k_max = 100_000;
    let curve = analytic_survival(&rabbit, &HFunction::klogk(), k_max).unwrap();
    let decades = [10u64, 100, 1000, 10_000, 100_000];
    let means: Vec<f64> = decades.iter().map(|&k| curve.truncated_mean_at(k).unwrap()).collect();
    let factor = means[4] / means[2];
    let increments: Vec<f64> = means.windows(2).map(|w| w[1] - w[0]).collect();
    // each decade adds at least one expected step, and more than the decade before
    let floor_ok = increments.iter().all(|&d| d >= 1.0) && increments.windows(2).all(|w| w[1] > w[0]);

    let horizons = [1000u64, 10_000, 100_000];
    let trials = 2000;
    let mut empirical_ok = true;
    let mut worst_z = 0.0f64;
    let mut min_sample_factor = f64::INFINITY;
    for seed in [61u64, 62, 63] {
        let config = HuntConfig {
            rabbit: rabbit.into(),
            strategy: StrategySpec::Probabilistic(HFunction::klogk()),
            cutoff: k_max,
            master_seed: seed,
            trials,
        };
        let result = run_trials(&config).unwrap();
        let sample = empirical_mean_excess(&result, &horizons).unwrap();
        min_sample_factor = min_sample_factor.min(sample[2] / sample[0]);
        for (&k, &m) in horizons.iter().zip(&sample) {
            let se = curve.truncated_mean_standard_error(k, trials).unwrap();
            let z = (m - curve.truncated_mean_at(k).unwrap()).abs() / se;
            worst_z = worst_z.max(z);
            empirical_ok &= z <= SIGMAS;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        factor >= 2.0 && floor_ok && empirical_ok && min_sample_factor > 2.0,
        format!(
            "analytic means at decades {:?}; TM(1e5)/TM(1e3) = {factor:.1}; increments {:?}; empirical worst |z| = {worst_z:.2} over 3 seeds x 3 horizons, min sample factor {min_sample_factor:.1}; {elapsed:.2?}",
            means.iter().map(|m| format!("{m:.1}")).collect::<Vec<_>>(),
            increments.iter().map(|d| format!("{d:.1}")).collect::<Vec<_>>(),
        ),
    )
}

fn integral_test() -> Verdict {
    let sums = reciprocal_partial_sums(&HFunction::klogk(), 1_000_000).unwrap();
    let rows = integral_sandwich(&sums, &[100, 1000, 10_000, 100_000, 1_000_000], 1e-6).unwrap();
    let detail = rows
        .iter()
        .map(|r| format!("m={}: {:.6} <= {:.6} <= {:.6}", r.m, r.lower, r.unfloored, r.upper))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(rows.iter().all(|r| r.holds), detail)
}

fn uniform_unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn real_rabbit_capture() -> Verdict {
    let start = Instant::now();
    let mut params = ChaCha8Rng::seed_from_u64(8);
    let h = HFunction::klogk();
    let cutoff = 100_000;
    let mut hits = 0;
    let mut tolerance_ok = true;
    let mut expected = 0.0;
    let runs = 100;
    for run in 0..runs {
        let a = -5.0 + 10.0 * uniform_unit(&mut params);
        let b = -5.0 + 10.0 * uniform_unit(&mut params);
        let real = RealLinearRabbit::new(a, b).unwrap();
        let rabbit: RabbitModel = real.into();
        let mut hunter = ProbabilisticHunter::for_trial(h.clone(), 8, run);
        let outcome = run_hunt(&rabbit, &mut hunter, cutoff).unwrap();
        if let (Some(t), Some(Point::Int(x))) = (outcome.hit_step, outcome.hitting_guess) {
            hits += 1;
            tolerance_ok &= (real.position(step(t)) - x as f64).abs() <= 0.5;
        }
        expected += 1.0 - survival_for(&rabbit, &h, cutoff).unwrap().survival(cutoff);
    }
    let frac = hits as f64 / runs as f64;
    verdict(
        frac >= 0.95 && tolerance_ok,
        format!(
            "{hits}/{runs} hit by 1e5 (required >= 95%; exact expected fraction {:.3}); all hits within 1/2: {tolerance_ok}; {:.2?}",
            expected / runs as f64,
            start.elapsed()
        ),
    )
}

fn lattice_extension() -> Verdict {
    let start = Instant::now();
    let mut tally = DiagonalTally::new();
    let r = -5..=5i64;
    for a1 in r.clone() {
        for a2 in r.clone() {
            for b1 in r.clone() {
                for b2 in r.clone() {
                    let index = inverse4([a1, a2, b1, b2]).unwrap();
                    let rabbit = LatticeRabbit2D::new(a1 as Integer, a2 as Integer, b1 as Integer, b2 as Integer).into();
                    tally.record(|| format!("({a1},{a2},{b1},{b2})"), &rabbit, Dimension::Four, index);
                }
            }
        }
    }
    tally.verdict(start.elapsed(), Duration::from_secs(60))
}

fn reproducibility() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_rabbit-hunt");
    let root = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["first", "replay", "flags"].iter().map(|d| root.path().join(d)).collect();
    let base = [
        "montecarlo", "--rabbit", "linear:0,1", "--strategy", "probabilistic:klogk", "--cutoff", "2000", "--trials",
        "3000", "--seed", "10", "--horizons", "100,1000,2000",
    ];
    let run = |args: Vec<&str>| Command::new(bin).args(args).output().unwrap().status.success();
    let mut ok = run([&base[..], &["--threads", "1", "--out", dirs[0].to_str().unwrap()]].concat());
    let manifest = dirs[0].join("manifest.json");
    ok &= run(vec!["montecarlo", "--config", manifest.to_str().unwrap(), "--threads", "4", "--out", dirs[1].to_str().unwrap()]);
    ok &= run([&base[..], &["--threads", "3", "--out", dirs[2].to_str().unwrap()]].concat());
    let mut differing = HashSet::new();
    let files = ["manifest.json", "trials.csv", "survival.csv", "summary.json"];
    for f in files {
        let reference = fs::read(dirs[0].join(f)).unwrap_or_default();
        for d in &dirs[1..] {
            if reference.is_empty() || fs::read(d.join(f)).unwrap_or_default() != reference {
                differing.insert(f);
            }
        }
    }
    verdict(
        ok && differing.is_empty(),
        format!("runs succeeded: {ok}; 1/4/3 threads incl. manifest replay, files differing: {differing:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Figure-1 spiral fidelity and round trips", figure_fidelity),
        ("diagonal hunter over Z^2, |a|,|b| <= 50: hit step == snake index", diagonal_linear),
        ("quadratic rabbits: Z^3 diagonal hit step == index; klogk envelope escape", quadratic_both_halves),
        ("probability-one capture at desk scale, rabbit (0,1)", probability_one_capture),
        ("Raabe ratio closed form and decay", raabe_closed_form),
        ("truncated mean grows without plateau", truncated_mean_growth),
        ("integral-test sandwich for sum 1/(k ln k)", integral_test),
        ("real-valued rabbits with 1/2 tolerance", real_rabbit_capture),
        ("planar lattice rabbits via Z^4 diagonal", lattice_extension),
        ("montecarlo reproducibility across manifests and thread counts", reproducibility),
    ];
    let mut failed = Vec::new();
    for (i, (title, check)) in criteria.iter().enumerate() {
        let v = check();
        println!("[{}] criterion {:>2}: {title}\n        {}", if v.passed { "PASS" } else { "FAIL" }, i + 1, v.detail);
        if !v.passed {
            failed.push(i + 1);
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
