//! Envelope functions `h`: at step `n` the probabilistic hunter throws
//! uniformly on `{-h(n), …, h(n)}`.
//!
//! A usable envelope is non-decreasing, eventually dominates every affine
//! trajectory, and has a divergent reciprocal series `Σ 1/h(k)`. Only the
//! first property can be checked exhaustively on a finite range; the other
//! two are registry metadata (built-ins) or heuristics (everything else).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::TimeStep;
use crate::precise::DoubleDouble;

/// Behaviour of `Σ 1/h(k)`, as known to the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceClass {
    Diverges,
    Converges,
    Unknown,
}

/// How eventual domination of affine trajectories is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DominationBasis {
    /// Known from the closed form (`h(n)/n → ∞`).
    Structural,
    /// Only the finite-range ratio check backs it.
    Heuristic,
}

#[derive(Clone)]
enum Kind {
    KLogK,
    XLogLog,
    /// `⌊k^{3/2}⌋`, computed as an integer square root.
    K15,
    Constant(u64),
    Linear(u64),
    Power(f64),
    Custom(Arc<dyn Fn(u64) -> u64 + Send + Sync>),
}

/// A named envelope with its registry metadata.
#[derive(Clone)]
pub struct HFunction {
    name: String,
    kind: Kind,
    class: DivergenceClass,
    basis: DominationBasis,
}

impl fmt::Debug for HFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HFunction")
            .field("name", &self.name)
            .field("class", &self.class)
            .field("basis", &self.basis)
            .finish()
    }
}

impl PartialEq for HFunction {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

// f64 results within this relative distance of an integer get re-evaluated
const FLOOR_GUARD: f64 = 1e-9;

fn guarded_floor(fast: f64, slow: impl FnOnce() -> DoubleDouble) -> u64 {
    let nearest = fast.round();
    let v = if (fast - nearest).abs() <= FLOOR_GUARD * fast.abs().max(1.0) {
        slow().floor()
    } else {
        fast.floor()
    };
    if v <= 0.0 {
        0
    } else {
        v as u64
    }
}

/// `⌊n ln n⌋`, with `h(1) = 0`.
pub fn klogk(n: u64) -> u64 {
    if n <= 1 {
        return 0;
    }
    let x = n as f64;
    guarded_floor(x * x.ln(), || {
        let d = DoubleDouble::from_u64(n);
        d.mul(d.ln())
    })
}

/// `max(0, ⌊n ln ln(n+1)⌋)`.
pub fn xloglog(n: u64) -> u64 {
    if n <= 1 {
        return 0;
    }
    let x = n as f64;
    guarded_floor(x * (x + 1.0).ln().ln(), || {
        let d = DoubleDouble::from_u64(n);
        d.mul(DoubleDouble::from_u64(n + 1).ln().ln())
    })
}

/// `⌊n^{3/2}⌋` exactly.
pub fn k15(n: u64) -> u64 {
    let n = n as u128;
    match n.checked_pow(3) {
        Some(cube) => cube.isqrt() as u64,
        None => (n as f64 * (n as f64).sqrt()) as u64,
    }
}

impl HFunction {
    pub fn klogk() -> Self {
        HFunction { name: "klogk".into(), kind: Kind::KLogK, class: DivergenceClass::Diverges, basis: DominationBasis::Structural }
    }

    pub fn xloglog() -> Self {
        HFunction { name: "xloglog".into(), kind: Kind::XLogLog, class: DivergenceClass::Diverges, basis: DominationBasis::Structural }
    }

    pub fn k15() -> Self {
        HFunction { name: "k15".into(), kind: Kind::K15, class: DivergenceClass::Converges, basis: DominationBasis::Structural }
    }

    pub fn constant(c: u64) -> Self {
        HFunction { name: format!("const:{c}"), kind: Kind::Constant(c), class: DivergenceClass::Diverges, basis: DominationBasis::Heuristic }
    }

    /// `h(n) = c·n`.
    pub fn linear(c: u64) -> Self {
        HFunction { name: format!("linear:{c}"), kind: Kind::Linear(c), class: DivergenceClass::Diverges, basis: DominationBasis::Heuristic }
    }

    /// `h(n) = ⌊n^p⌋` for `p > 0`; the p-series decides the class.
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::Config(format!("power envelope needs a positive exponent, got {p}")));
        }
        let class = if p > 1.0 { DivergenceClass::Converges } else { DivergenceClass::Diverges };
        let basis = if p > 1.0 { DominationBasis::Structural } else { DominationBasis::Heuristic };
        Ok(HFunction { name: format!("pow:{p}"), kind: Kind::Power(p), class, basis })
    }

    /// A user-registered envelope. Its divergence class is taken on trust and
    /// domination is only ever checked heuristically.
    pub fn custom(
        name: impl Into<String>,
        class: DivergenceClass,
        eval: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        HFunction { name: name.into(), kind: Kind::Custom(Arc::new(eval)), class, basis: DominationBasis::Heuristic }
    }

    /// Looks up a registered name: `klogk`, `xloglog`, `k15`, `const:C`,
    /// `linear:C` or `pow:P`.
    pub fn by_name(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownEnvelope(name.to_string());
        match name {
            "klogk" => return Ok(Self::klogk()),
            "xloglog" => return Ok(Self::xloglog()),
            "k15" => return Ok(Self::k15()),
            _ => {}
        }
        let (kind, arg) = name.split_once(':').ok_or_else(unknown)?;
        match kind {
            "const" => arg.parse().map(Self::constant).map_err(|_| unknown()),
            "linear" => arg.parse().map(Self::linear).map_err(|_| unknown()),
            "pow" => arg.parse().map_err(|_| unknown()).and_then(Self::power),
            _ => Err(unknown()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn divergence_class(&self) -> DivergenceClass {
        self.class
    }

    pub fn domination_basis(&self) -> DominationBasis {
        self.basis
    }

    #[inline]
    pub fn eval(&self, n: TimeStep) -> u64 {
        self.eval_raw(n.get())
    }

    #[inline]
    pub(crate) fn eval_raw(&self, n: u64) -> u64 {
        match &self.kind {
            Kind::KLogK => klogk(n),
            Kind::XLogLog => xloglog(n),
            Kind::K15 => k15(n),
            Kind::Constant(c) => *c,
            Kind::Linear(c) => c.saturating_mul(n),
            Kind::Power(p) => (n as f64).powf(*p).floor() as u64,
            Kind::Custom(f) => f(n),
        }
    }

    /// The unfloored continuous counterpart, where one is known.
    pub fn eval_real(&self, x: f64) -> Option<f64> {
        match &self.kind {
            Kind::KLogK => Some(x * x.ln()),
            Kind::XLogLog => Some(x * (x + 1.0).ln().ln()),
            Kind::K15 => Some(x * x.sqrt()),
            Kind::Constant(c) => Some(*c as f64),
            Kind::Linear(c) => Some(*c as f64 * x),
            Kind::Power(p) => Some(x.powf(*p)),
            Kind::Custom(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityCheck {
    pub passed: bool,
    /// First `n` with `h(n+1) < h(n)`.
    pub first_violation: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperlinearityCheck {
    /// `h(2^j)/2^j` strictly increasing over the upper half of sampled `j`.
    pub passed: bool,
    pub basis: DominationBasis,
    /// `(j, h(2^j)/2^j)` for `2^j ≤ horizon`.
    pub ratios: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected,
    Invalid,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub horizon: u64,
    pub monotone: MonotonicityCheck,
    pub superlinearity: SuperlinearityCheck,
    pub divergence_class: DivergenceClass,
    /// `(m, Σ_{k=1}^{m} 1/max(h(k), 1))` at powers of ten and at the horizon.
    pub reciprocal_sums: Vec<(u64, f64)>,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

/// Runs the finite checks on an envelope over `1..=horizon`.
pub fn validate_h(h: &HFunction, horizon: u64) -> Result<ValidationReport> {
    if horizon < 10 {
        return Err(Error::Domain(format!("validation horizon must be at least 10, got {horizon}")));
    }

    let mut first_violation = None;
    let mut reciprocal_sums = Vec::new();
    let mut sum = crate::analysis::CompensatedSum::default();
    let mut next_checkpoint = 10;
    let mut prev = h.eval_raw(1);
    sum.add(1.0 / prev.max(1) as f64);
    for n in 2..=horizon {
        let cur = h.eval_raw(n);
        if cur < prev && first_violation.is_none() {
            first_violation = Some(n - 1);
        }
        sum.add(1.0 / cur.max(1) as f64);
        if n == next_checkpoint || n == horizon {
            reciprocal_sums.push((n, sum.value()));
            if n == next_checkpoint {
                next_checkpoint = next_checkpoint.saturating_mul(10);
            }
        }
        prev = cur;
    }
    let monotone = MonotonicityCheck { passed: first_violation.is_none(), first_violation };

    let top = horizon.ilog2();
    let ratios: Vec<(u32, f64)> = (1..=top)
        .map(|j| (j, h.eval_raw(1 << j) as f64 / (1u64 << j) as f64))
        .collect();
    let tail_start = (top / 2).min(top.saturating_sub(2)).max(1);
    let tail: Vec<f64> = ratios.iter().filter(|(j, _)| *j >= tail_start).map(|&(_, r)| r).collect();
    let superlinear = tail.windows(2).all(|w| w[1] > w[0]);
    let superlinearity = SuperlinearityCheck { passed: superlinear, basis: h.domination_basis(), ratios };

    let mut reasons = Vec::new();
    if !monotone.passed {
        reasons.push(format!("h decreases after n = {}", first_violation.unwrap_or_default()));
    }
    if !superlinearity.passed {
        reasons.push("h(n)/n is not increasing: some affine rabbits are never contained".into());
    }
    match h.divergence_class() {
        DivergenceClass::Converges => reasons.push("Σ 1/h(k) converges: capture probability stays below 1".into()),
        DivergenceClass::Unknown => reasons.push("divergence of Σ 1/h(k) is not known for this envelope".into()),
        DivergenceClass::Diverges => {}
    }
    let verdict = if !monotone.passed {
        Verdict::Invalid
    } else if !superlinearity.passed || h.divergence_class() == DivergenceClass::Converges {
        Verdict::Rejected
    } else if h.divergence_class() == DivergenceClass::Unknown {
        Verdict::Inconclusive
    } else {
        Verdict::Accepted
    };

    Ok(ValidationReport {
        name: h.name().to_string(),
        horizon,
        monotone,
        superlinearity,
        divergence_class: h.divergence_class(),
        reciprocal_sums,
        verdict,
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // high-precision reference values (50 significant digits)
    const KLOGK: [(u64, u64); 12] = [
        (1, 0), (2, 1), (3, 3), (4, 5), (10, 23), (11, 26), (100, 460), (1000, 6907),
        (1001, 6915), (12345, 116302), (1_000_000, 13815510), (1_000_000_000, 20723265836),
    ];
    const XLOGLOG: [(u64, u64); 10] = [
        (1, 0), (2, 0), (3, 0), (4, 1), (10, 8), (11, 10), (100, 152), (1000, 1932),
        (12345, 27689), (1_000_000_000, 3031257022),
    ];
    // n where the f64 product sits within ~1e-7 of an integer
    const KLOGK_HARD: [(u64, u64); 4] =
        [(13572384, 222906696), (14179185, 233492689), (17564118, 292993526), (14178513, 233480950)];
    const XLOGLOG_HARD: [(u64, u64); 3] = [(17924241, 50465850), (10485345, 29179443), (12189270, 34034273)];

    #[test]
    fn reference_values() {
        for (n, want) in KLOGK.into_iter().chain(KLOGK_HARD) {
            assert_eq!(klogk(n), want, "klogk({n})");
        }
        for (n, want) in XLOGLOG.into_iter().chain(XLOGLOG_HARD) {
            assert_eq!(xloglog(n), want, "xloglog({n})");
        }
    }

    #[test]
    fn naive_floor_is_wrong_at_hard_case() {
        let x = 17924241f64;
        assert_eq!((x * (x + 1.0).ln().ln()).floor() as u64, 50465851);
        assert_eq!(xloglog(17924241), 50465850);
    }

    #[test]
    fn k15_exact() {
        assert_eq!(k15(1), 1);
        assert_eq!(k15(2), 2);
        assert_eq!(k15(4), 8);
        assert_eq!(k15(10), 31);
        assert_eq!(k15(1_000_000), 1_000_000_000);
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(HFunction::by_name("klogk").unwrap().divergence_class(), DivergenceClass::Diverges);
        assert_eq!(HFunction::by_name("k15").unwrap().divergence_class(), DivergenceClass::Converges);
        assert_eq!(HFunction::by_name("const:5").unwrap().eval_raw(99), 5);
        assert_eq!(HFunction::by_name("linear:3").unwrap().eval_raw(7), 21);
        assert_eq!(HFunction::by_name("pow:0.5").unwrap().divergence_class(), DivergenceClass::Diverges);
        assert_eq!(HFunction::by_name("pow:2").unwrap().divergence_class(), DivergenceClass::Converges);
        for bad in ["nope", "const:x", "pow:-1", "pow:nan", "sqrt:2"] {
            assert!(HFunction::by_name(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn builtins_monotone_and_unbounded() {
        for h in [HFunction::klogk(), HFunction::xloglog(), HFunction::k15()] {
            let mut prev = 0;
            for n in 1..=200_000 {
                let v = h.eval_raw(n);
                assert!(v >= prev, "{} at {n}", h.name());
                prev = v;
            }
            assert!(prev > 200_000, "{}", h.name());
        }
    }

    #[test]
    fn floors_bracket_continuous_values() {
        // ⌊v⌋ ≤ v < ⌊v⌋ + 1 against an independent f64 evaluation, skipping near-ties
        for n in 2..=300_000u64 {
            let x = n as f64;
            for (got, v) in [(klogk(n), x * x.ln()), (xloglog(n), x * (x + 1.0).ln().ln())] {
                if (v - v.round()).abs() < 1e-6 {
                    continue;
                }
                let g = got as f64;
                assert!(g <= v.max(0.0) && v < g + 1.0, "n={n}: {got} vs {v}");
            }
        }
    }

    #[test]
    fn validate_klogk() {
        let r = validate_h(&HFunction::klogk(), 10_000).unwrap();
        assert!(r.monotone.passed);
        assert!(r.superlinearity.passed);
        assert_eq!(r.superlinearity.basis, DominationBasis::Structural);
        assert_eq!(r.divergence_class, DivergenceClass::Diverges);
        assert_eq!(r.verdict, Verdict::Accepted);
        assert_eq!(r.reciprocal_sums.iter().map(|c| c.0).collect::<Vec<_>>(), vec![10, 100, 1000, 10_000]);
    }

    #[test]
    fn validate_rejections() {
        let r = validate_h(&HFunction::k15(), 10_000).unwrap();
        assert_eq!(r.divergence_class, DivergenceClass::Converges);
        assert_eq!(r.verdict, Verdict::Rejected);

        let r = validate_h(&HFunction::constant(5), 1000).unwrap();
        assert!(r.monotone.passed);
        assert!(!r.superlinearity.passed);
        assert_eq!(r.verdict, Verdict::Rejected);

        let r = validate_h(&HFunction::linear(4), 1000).unwrap();
        assert!(!r.superlinearity.passed);

        let wobbly = HFunction::custom("wobbly", DivergenceClass::Unknown, |n| if n == 7 { 100 } else { n * n });
        let r = validate_h(&wobbly, 1000).unwrap();
        assert_eq!(r.monotone.first_violation, Some(7));
        assert_eq!(r.verdict, Verdict::Invalid);

        let fine = HFunction::custom("nlogn-ish", DivergenceClass::Unknown, klogk);
        assert_eq!(validate_h(&fine, 1000).unwrap().verdict, Verdict::Inconclusive);

        assert!(validate_h(&HFunction::klogk(), 9).is_err());
    }
}
