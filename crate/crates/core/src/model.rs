//! Rabbit trajectories and hit predicates.
//!
//! Every model is immutable once built and every operation is a pure
//! function of its arguments. Integer models use `i128` with checked
//! arithmetic; leaving that range is reported as [`Error::Overflow`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exact signed integer used for rabbit parameters, positions and guesses.
pub type Integer = i128;

/// A 1-based time step. The first hammer is thrown at `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeStep(u64);

impl TimeStep {
    pub const FIRST: TimeStep = TimeStep(1);

    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        Ok(TimeStep(n))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Steps `1..=last`, empty when `last == 0`.
    pub fn up_to(last: u64) -> impl Iterator<Item = TimeStep> {
        (1..=last).map(TimeStep)
    }
}

impl fmt::Display for TimeStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A hammer target: one integer on the line, or a lattice point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Point {
    Int(Integer),
    Pair(Integer, Integer),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Int(x) => write!(f, "{x}"),
            Point::Pair(x, y) => write!(f, "({x},{y})"),
        }
    }
}

/// Where a rabbit sits at a given step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Position {
    Int(Integer),
    Real(f64),
    Pair(Integer, Integer),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinearRabbit {
    pub a: Integer,
    pub b: Integer,
}

impl LinearRabbit {
    pub fn new(a: Integer, b: Integer) -> Self {
        LinearRabbit { a, b }
    }

    /// `a + b·n`.
    pub fn position(&self, n: TimeStep) -> Result<Integer> {
        affine(self.a, self.b, n.get())
    }

    pub fn is_hit(&self, guess: Integer, n: TimeStep) -> Result<bool> {
        Ok(self.position(n)? == guess)
    }
}

/// `R_n = c_0 + c_1·n + … + c_d·n^d`, evaluated exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolynomialRabbit {
    coeffs: Vec<Integer>,
}

impl PolynomialRabbit {
    /// Coefficients in ascending-degree order. At least one is required.
    pub fn new(coeffs: Vec<Integer>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Config("polynomial rabbit needs at least one coefficient".into()));
        }
        Ok(PolynomialRabbit { coeffs })
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Degree of the coefficient list (trailing zeros included).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn position(&self, n: TimeStep) -> Result<Integer> {
        horner(&self.coeffs, n.get())
    }

    pub fn is_hit(&self, guess: Integer, n: TimeStep) -> Result<bool> {
        Ok(self.position(n)? == guess)
    }
}

impl From<LinearRabbit> for PolynomialRabbit {
    fn from(r: LinearRabbit) -> Self {
        PolynomialRabbit { coeffs: vec![r.a, r.b] }
    }
}

/// Real start and stride; a throw hits when it lands within ½ of the rabbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealLinearRabbit {
    a: f64,
    b: f64,
}

impl RealLinearRabbit {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Config(format!("real rabbit parameters must be finite, got ({a}, {b})")));
        }
        Ok(RealLinearRabbit { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn position(&self, n: TimeStep) -> f64 {
        self.b.mul_add(n.get() as f64, self.a)
    }

    /// Closed tolerance: `|R_n − guess| ≤ ½`.
    pub fn is_hit(&self, guess: Integer, n: TimeStep) -> bool {
        (self.position(n) - guess as f64).abs() <= 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeRabbit2D {
    pub a1: Integer,
    pub a2: Integer,
    pub b1: Integer,
    pub b2: Integer,
}

impl LatticeRabbit2D {
    pub fn new(a1: Integer, a2: Integer, b1: Integer, b2: Integer) -> Self {
        LatticeRabbit2D { a1, a2, b1, b2 }
    }

    pub fn position(&self, n: TimeStep) -> Result<(Integer, Integer)> {
        Ok((affine(self.a1, self.b1, n.get())?, affine(self.a2, self.b2, n.get())?))
    }

    pub fn is_hit(&self, guess: (Integer, Integer), n: TimeStep) -> Result<bool> {
        Ok(self.position(n)? == guess)
    }
}

/// Any of the supported rabbit trajectories.
#[derive(Debug, Clone, PartialEq)]
pub enum RabbitModel {
    Linear(LinearRabbit),
    Polynomial(PolynomialRabbit),
    RealLinear(RealLinearRabbit),
    Lattice2D(LatticeRabbit2D),
}

impl RabbitModel {
    pub fn kind(&self) -> &'static str {
        match self {
            RabbitModel::Linear(_) => "linear",
            RabbitModel::Polynomial(_) => "polynomial",
            RabbitModel::RealLinear(_) => "real-linear",
            RabbitModel::Lattice2D(_) => "lattice-2d",
        }
    }

    pub fn position(&self, n: TimeStep) -> Result<Position> {
        Ok(match self {
            RabbitModel::Linear(r) => Position::Int(r.position(n)?),
            RabbitModel::Polynomial(r) => Position::Int(r.position(n)?),
            RabbitModel::RealLinear(r) => Position::Real(r.position(n)),
            RabbitModel::Lattice2D(r) => {
                let (x, y) = r.position(n)?;
                Position::Pair(x, y)
            }
        })
    }

    /// Whether a throw at `guess` strikes the rabbit at step `n`.
    ///
    /// A guess outside the model's target space (a pair thrown at a 1-D
    /// rabbit or the reverse) is rejected with [`Error::TargetMismatch`].
    pub fn is_hit(&self, guess: &Point, n: TimeStep) -> Result<bool> {
        match (self, guess) {
            (RabbitModel::Linear(r), Point::Int(g)) => r.is_hit(*g, n),
            (RabbitModel::Polynomial(r), Point::Int(g)) => r.is_hit(*g, n),
            (RabbitModel::RealLinear(r), Point::Int(g)) => Ok(r.is_hit(*g, n)),
            (RabbitModel::Lattice2D(r), Point::Pair(x, y)) => r.is_hit((*x, *y), n),
            _ => Err(Error::TargetMismatch { model: self.kind(), guess: guess.to_string() }),
        }
    }

    /// True for models whose targets are single integers.
    pub fn is_one_dimensional(&self) -> bool {
        !matches!(self, RabbitModel::Lattice2D(_))
    }
}

impl From<LinearRabbit> for RabbitModel {
    fn from(r: LinearRabbit) -> Self {
        RabbitModel::Linear(r)
    }
}

impl From<PolynomialRabbit> for RabbitModel {
    fn from(r: PolynomialRabbit) -> Self {
        RabbitModel::Polynomial(r)
    }
}

impl From<RealLinearRabbit> for RabbitModel {
    fn from(r: RealLinearRabbit) -> Self {
        RabbitModel::RealLinear(r)
    }
}

impl From<LatticeRabbit2D> for RabbitModel {
    fn from(r: LatticeRabbit2D) -> Self {
        RabbitModel::Lattice2D(r)
    }
}

/// `kind:comma-separated-params`, e.g. `linear:5,-3`, `polynomial:2,0,1`,
/// `real-linear:0.3,1.0`, `lattice:1,2,3,4` (start `a1,a2`, stride `b1,b2`).
impl FromStr for RabbitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("rabbit `{s}` should look like kind:p1,p2,…")))?;
        let fields: Vec<&str> = params.split(',').map(str::trim).collect();
        let ints = || -> Result<Vec<Integer>> {
            fields
                .iter()
                .map(|f| f.parse::<Integer>().map_err(|e| Error::Config(format!("bad integer `{f}` in rabbit `{s}`: {e}"))))
                .collect()
        };
        let arity = |want: usize| -> Result<()> {
            if fields.len() == want {
                Ok(())
            } else {
                Err(Error::Config(format!("{kind} rabbit takes {want} parameters, got {}", fields.len())))
            }
        };
        match kind {
            "linear" => {
                arity(2)?;
                let v = ints()?;
                Ok(LinearRabbit::new(v[0], v[1]).into())
            }
            "polynomial" | "poly" => Ok(PolynomialRabbit::new(ints()?)?.into()),
            "real-linear" | "real" => {
                arity(2)?;
                let v = fields
                    .iter()
                    .map(|f| f.parse::<f64>().map_err(|e| Error::Config(format!("bad real `{f}` in rabbit `{s}`: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RealLinearRabbit::new(v[0], v[1])?.into())
            }
            "lattice" | "lattice-2d" => {
                arity(4)?;
                let v = ints()?;
                Ok(LatticeRabbit2D::new(v[0], v[1], v[2], v[3]).into())
            }
            other => Err(Error::Config(format!(
                "unknown rabbit kind `{other}` (expected linear, polynomial, real-linear or lattice-2d)"
            ))),
        }
    }
}

impl fmt::Display for RabbitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RabbitModel::Linear(r) => write!(f, "linear:{},{}", r.a, r.b),
            RabbitModel::Polynomial(r) => {
                f.write_str("polynomial:")?;
                for (i, c) in r.coeffs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            RabbitModel::RealLinear(r) => write!(f, "real-linear:{:?},{:?}", r.a, r.b),
            RabbitModel::Lattice2D(r) => write!(f, "lattice-2d:{},{},{},{}", r.a1, r.a2, r.b1, r.b2),
        }
    }
}

#[inline]
pub(crate) fn affine(a: Integer, b: Integer, n: u64) -> Result<Integer> {
    b.checked_mul(n as Integer)
        .and_then(|bn| bn.checked_add(a))
        .ok_or(Error::Overflow("rabbit position"))
}

#[inline]
pub(crate) fn horner(coeffs: &[Integer], n: u64) -> Result<Integer> {
    let n = n as Integer;
    coeffs.iter().rev().try_fold(0 as Integer, |acc, &c| {
        acc.checked_mul(n)
            .and_then(|v| v.checked_add(c))
            .ok_or(Error::Overflow("polynomial position"))
    })
}
