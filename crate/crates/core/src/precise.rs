//! Double-double arithmetic (about 106 significant bits), just enough to
//! settle floors of `n ln n` and `n ln ln(n+1)` when an `f64` evaluation
//! lands too close to an integer to trust.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DoubleDouble {
    hi: f64,
    lo: f64,
}

// ln 2 split into two doubles
const LN2: DoubleDouble = DoubleDouble { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub(crate) fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    pub(crate) fn from_u64(n: u64) -> Self {
        let hi = n as f64;
        // the rounding error of the conversion is itself exactly representable
        let lo = (n as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }

    pub(crate) fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }

    pub(crate) fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }

    pub(crate) fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub(crate) fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }

    pub(crate) fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Self::from_f64(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Self::from_f64(q2)));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo }.add(Self::from_f64(q3))
    }

    fn scale(self, factor: f64) -> Self {
        // exact for powers of two
        DoubleDouble { hi: self.hi * factor, lo: self.lo * factor }
    }

    /// Natural logarithm of a positive value.
    pub(crate) fn ln(self) -> Self {
        debug_assert!(self.hi > 0.0);
        // x = 2^e · m with m in [1/√2, √2)
        let mut e = self.hi.log2().floor() as i32;
        let mut m = self.scale(2f64.powi(-e));
        if m.hi >= std::f64::consts::SQRT_2 {
            m = m.scale(0.5);
            e += 1;
        } else if m.hi < std::f64::consts::FRAC_1_SQRT_2 {
            m = m.scale(2.0);
            e -= 1;
        }
        // ln m = 2·atanh(z), z = (m-1)/(m+1), |z| < 0.172
        let one = Self::from_f64(1.0);
        let z = m.sub(one).div(m.add(one));
        let z2 = z.mul(z);
        let mut power = z;
        let mut sum = z;
        for j in 1..40 {
            power = power.mul(z2);
            let term = power.div(Self::from_f64((2 * j + 1) as f64));
            sum = sum.add(term);
            if term.hi.abs() < 1e-34 * sum.hi.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        LN2.mul(Self::from_f64(e as f64)).add(sum.scale(2.0))
    }

    /// Floor of the represented value.
    pub(crate) fn floor(self) -> f64 {
        let f = self.hi.floor();
        if f == self.hi {
            // hi is an integer, so the sign of lo decides
            if self.lo < 0.0 {
                f - 1.0
            } else {
                f
            }
        } else {
            f
        }
    }

    #[cfg(test)]
    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}
