//! Hunter strategies: the guess `X_n` thrown at each step.
//!
//! # Random streams
//!
//! The probabilistic hunter draws from ChaCha8. A hunt with master seed `s`
//! and trial index `i` uses `ChaCha8Rng::seed_from_u64(s)` switched to stream
//! `i`; step `n` consumes the next words of that stream (one per draw, more
//! on the rare rejection). A step whose envelope is 0 consumes nothing. A
//! stand-alone hunt is trial 0.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::enumeration::{forward3, forward4, snake_forward, Dimension};
use crate::envelope::HFunction;
use crate::error::{Error, Result};
use crate::model::{affine, horner, Integer, Point, RabbitModel, TimeStep};

/// Anything that produces one throw per step, in step order.
pub trait Hunter {
    fn guess(&mut self, n: TimeStep) -> Result<Point>;
}

/// Throws at the step-`k` position of the `k`-th enumerated parameter tuple.
///
/// Tuples map to parameters in ascending-degree order: `(A, B)` for d = 2,
/// `(A, B, C)` for d = 3 and `(a1, a2, b1, b2)` for the planar d = 4 case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagonalHunter {
    dim: Dimension,
}

impl DiagonalHunter {
    pub fn new(dim: Dimension) -> Self {
        DiagonalHunter { dim }
    }

    pub fn snake() -> Self {
        Self::new(Dimension::Two)
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn diagonal_guess(&self, k: TimeStep) -> Result<Point> {
        let step = k.get();
        Ok(match self.dim {
            Dimension::Two => {
                let (a, b) = snake_forward(step)?;
                Point::Int(affine(a as Integer, b as Integer, step)?)
            }
            Dimension::Three => {
                let [a, b, c] = forward3(step)?;
                Point::Int(horner(&[a as Integer, b as Integer, c as Integer], step)?)
            }
            Dimension::Four => {
                let [a1, a2, b1, b2] = forward4(step)?;
                Point::Pair(affine(a1 as Integer, b1 as Integer, step)?, affine(a2 as Integer, b2 as Integer, step)?)
            }
        })
    }
}

impl Hunter for DiagonalHunter {
    fn guess(&mut self, n: TimeStep) -> Result<Point> {
        self.diagonal_guess(n)
    }
}

/// Uniform on `0..range` with no bias, `range ≥ 1`.
///
/// Widening multiply with rejection of the short low zone.
#[inline]
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, range: u64) -> u64 {
    assert!(range > 0, "empty range");
    let mut m = rng.next_u64() as u128 * range as u128;
    if (m as u64) < range {
        let threshold = range.wrapping_neg() % range;
        while (m as u64) < threshold {
            m = rng.next_u64() as u128 * range as u128;
        }
    }
    (m >> 64) as u64
}

/// Uniform on `{-radius, …, radius}`.
#[inline]
pub fn sample_symmetric<R: RngCore + ?Sized>(rng: &mut R, radius: u64) -> Integer {
    if radius == 0 {
        return 0;
    }
    let width = radius
        .checked_mul(2)
        .and_then(|w| w.checked_add(1))
        .expect("envelope radius below 2^63");
    uniform_below(rng, width) as Integer - radius as Integer
}

/// Throws uniformly inside the envelope `[-h(n), h(n)]`.
#[derive(Debug, Clone)]
pub struct ProbabilisticHunter {
    envelope: HFunction,
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    next_step: u64,
}

impl ProbabilisticHunter {
    pub fn new(envelope: HFunction, seed: u64) -> Self {
        Self::for_trial(envelope, seed, 0)
    }

    /// The hunter of trial `trial` in a batch with master seed `master_seed`.
    pub fn for_trial(envelope: HFunction, master_seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(trial);
        ProbabilisticHunter { envelope, seed: master_seed, stream: trial, rng, next_step: 1 }
    }

    pub fn envelope(&self) -> &HFunction {
        &self.envelope
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Draws the throw for step `n`; steps must be requested as 1, 2, 3, …
    pub fn sample_guess(&mut self, n: TimeStep) -> Result<Integer> {
        if n.get() != self.next_step {
            return Err(Error::Domain(format!(
                "probabilistic hunter is positioned at step {}, asked for step {n}",
                self.next_step
            )));
        }
        self.next_step += 1;
        Ok(sample_symmetric(&mut self.rng, self.envelope.eval(n)))
    }
}

impl Hunter for ProbabilisticHunter {
    fn guess(&mut self, n: TimeStep) -> Result<Point> {
        self.sample_guess(n).map(Point::Int)
    }
}

/// A configured strategy: `diagonal:<snake|2|3|4>` or `probabilistic:<envelope>`.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpec {
    Diagonal(Dimension),
    Probabilistic(HFunction),
}

impl StrategySpec {
    /// Builds the hunter used by trial `trial` of a batch.
    pub fn hunter(&self, master_seed: u64, trial: u64) -> AnyHunter {
        match self {
            StrategySpec::Diagonal(d) => AnyHunter::Diagonal(DiagonalHunter::new(*d)),
            StrategySpec::Probabilistic(h) => {
                AnyHunter::Probabilistic(ProbabilisticHunter::for_trial(h.clone(), master_seed, trial))
            }
        }
    }

    /// Rejects strategy/rabbit pairs whose throws cannot land in the rabbit's space.
    pub fn check_compatible(&self, rabbit: &RabbitModel) -> Result<()> {
        let problem = match (self, rabbit) {
            (StrategySpec::Diagonal(_), RabbitModel::RealLinear(_)) => {
                Some("real-valued rabbits cannot be enumerated; use a probabilistic strategy")
            }
            (StrategySpec::Diagonal(Dimension::Four), r) if r.is_one_dimensional() => {
                Some("diagonal:4 throws lattice points; it needs a lattice-2d rabbit")
            }
            (StrategySpec::Diagonal(Dimension::Two | Dimension::Three), RabbitModel::Lattice2D(_)) => Some("lattice-2d rabbits need diagonal:4"),
            (StrategySpec::Diagonal(Dimension::Two), RabbitModel::Polynomial(p)) if p.degree() > 1 => {
                Some("diagonal:2 only enumerates degree ≤ 1 trajectories; use diagonal:3")
            }
            (StrategySpec::Diagonal(Dimension::Three), RabbitModel::Polynomial(p)) if p.degree() > 2 => {
                Some("diagonal:3 only enumerates degree ≤ 2 trajectories")
            }
            (StrategySpec::Probabilistic(_), RabbitModel::Lattice2D(_)) => {
                Some("the probabilistic hunter throws on the line; lattice-2d rabbits need diagonal:4")
            }
            _ => None,
        };
        match problem {
            Some(msg) => Err(Error::Config(msg.into())),
            None => Ok(()),
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Diagonal(Dimension::Two) => f.write_str("diagonal:snake"),
            StrategySpec::Diagonal(d) => write!(f, "diagonal:{d}"),
            StrategySpec::Probabilistic(h) => write!(f, "probabilistic:{}", h.name()),
        }
    }
}

impl FromStr for StrategySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "diagonal" => {
                let dim = match arg {
                    "" | "snake" | "2" | "z2" => Dimension::Two,
                    "3" | "z3" => Dimension::Three,
                    "4" | "z4" => Dimension::Four,
                    other => {
                        return Err(other
                            .parse::<usize>()
                            .map_or_else(|_| Error::Config(format!("unknown diagonal enumeration `{other}`")), Error::UnsupportedDimension))
                    }
                };
                Ok(StrategySpec::Diagonal(dim))
            }
            "probabilistic" => {
                let name = if arg.is_empty() { "klogk" } else { arg };
                HFunction::by_name(name).map(StrategySpec::Probabilistic)
            }
            _ => Err(Error::Config(format!("unknown strategy `{s}` (expected diagonal:… or probabilistic:…)"))),
        }
    }
}

/// Closed set of hunters, so batches avoid boxing.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum AnyHunter {
    Diagonal(DiagonalHunter),
    Probabilistic(ProbabilisticHunter),
}

impl Hunter for AnyHunter {
    #[inline]
    fn guess(&mut self, n: TimeStep) -> Result<Point> {
        match self {
            AnyHunter::Diagonal(h) => h.guess(n),
            AnyHunter::Probabilistic(h) => h.guess(n),
        }
    }
}
