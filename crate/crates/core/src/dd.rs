//! Double-double arithmetic with running rounding-error bounds.
//!
//! A [`Dd`] is an unevaluated sum of two doubles carrying ~106 significant
//! bits (Dekker/Bailey representation). [`Certified`] wraps a `Dd` together
//! with an absolute error bound that is propagated through every operation,
//! so a computed value can certify the sign of a quantity: if
//! `|value| > err`, the true value provably has the same sign.
//!
//! The per-operation rounding constants below are deliberately generous
//! (published bounds are 3u^2 for addition and 4-7u^2 for multiplication
//! and division, u = 2^-53); certification only needs an upper bound.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: returns `a + b` exactly as a `Dd` (Knuth two-sum).
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let lo = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo }
}

/// Error-free sum assuming `|a| >= |b|`.
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

/// Error-free product via fused multiply-add.
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact `Dd` value of `a - b` for doubles `a`, `b`.
    pub fn sub_exact(a: f64, b: f64) -> Dd {
        two_sum(a, -b)
    }

    /// Exact `Dd` value of an `i64` (the two limbs absorb up to 2^63).
    pub fn from_i64(m: i64) -> Dd {
        let hi = m as f64;
        // |m| < 2^63, so the rounding error fits an i64 and converts exactly.
        let lo = (m - hi as i64) as f64;
        quick_two_sum(hi, lo)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    fn mul_f64(self, x: f64) -> Dd {
        let p = two_prod(self.hi, x);
        quick_two_sum(p.hi, p.lo + self.lo * x)
    }

    fn lt(self, other: Dd) -> bool {
        self.hi < other.hi || (self.hi == other.hi && self.lo < other.lo)
    }
}

impl Neg for Dd {
    type Output = Dd;

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;

    fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        let t = two_sum(self.lo, other.lo);
        let mid = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(mid.hi, mid.lo + t.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;

    fn sub(self, other: Dd) -> Dd {
        self + -other
    }
}

impl Mul for Dd {
    type Output = Dd;

    fn mul(self, other: Dd) -> Dd {
        let p = two_prod(self.hi, other.hi);
        let lo = p.lo + (self.hi * other.lo + self.lo * other.hi);
        quick_two_sum(p.hi, lo)
    }
}

impl Div for Dd {
    type Output = Dd;

    fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let mut r = self - other.mul_f64(q1);
        let q2 = r.hi / other.hi;
        r = r - other.mul_f64(q2);
        let q3 = r.hi / other.hi;
        quick_two_sum(q1, q2) + Dd::from_f64(q3)
    }
}

/// Relative rounding bound of one compensated operation, `2^-104` scaled by
/// a safety factor.
const DD_EPS: f64 = 16.0 * 4.93e-32; // 16 * 2^-104

/// Inflation applied to every error-bound update so the f64 arithmetic on
/// the bounds themselves cannot under-estimate.
const BOUND_SLACK: f64 = 1.0 + 1e-9;

/// A double-double value with a certified absolute error bound:
/// the true real result differs from `value` by at most `err`.
#[derive(Debug, Clone, Copy)]
pub struct Certified {
    pub value: Dd,
    pub err: f64,
}

impl Certified {
    pub fn exact(x: f64) -> Certified {
        Certified { value: Dd::from_f64(x), err: 0.0 }
    }

    pub fn from_i64(m: i64) -> Certified {
        Certified { value: Dd::from_i64(m), err: 0.0 }
    }

    /// `1 - p`, exact for any double `p` in `[-1, 1]`.
    pub fn one_minus_exact(p: f64) -> Certified {
        Certified { value: Dd::sub_exact(1.0, p), err: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.value.to_f64()
    }

    fn mag(self) -> f64 {
        self.value.hi.abs() + self.value.lo.abs()
    }

    /// Integer power by binary exponentiation; error bounds propagate
    /// through the squarings (the bound scales like `n * u^2`, the
    /// condition number of powering).
    pub fn powi(self, mut n: u64) -> Certified {
        let mut base = self;
        let mut acc = Certified::exact(1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            n >>= 1;
            if n > 0 {
                base = base * base;
            }
        }
        acc
    }

    pub fn min(self, other: Certified) -> Certified {
        if other.value.lt(self.value) {
            other
        } else {
            self
        }
    }

    /// True when the sign of the underlying real value is determined.
    pub fn sign_certain(self) -> bool {
        self.value.abs().to_f64() > self.err
    }
}

impl Add for Certified {
    type Output = Certified;

    fn add(self, other: Certified) -> Certified {
        let value = self.value + other.value;
        let round = DD_EPS * (value.hi.abs() + value.lo.abs());
        Certified { value, err: (self.err + other.err + round) * BOUND_SLACK }
    }
}

impl Sub for Certified {
    type Output = Certified;

    fn sub(self, other: Certified) -> Certified {
        self + Certified { value: -other.value, err: other.err }
    }
}

impl Mul for Certified {
    type Output = Certified;

    fn mul(self, other: Certified) -> Certified {
        let value = self.value * other.value;
        let round = DD_EPS * (value.hi.abs() + value.lo.abs());
        let err = (self.err * other.mag()
            + other.err * self.mag()
            + self.err * other.err
            + round)
            * BOUND_SLACK;
        Certified { value, err }
    }
}

impl Div for Certified {
    type Output = Certified;

    fn div(self, other: Certified) -> Certified {
        let denom_mag = other.mag();
        assert!(
            other.err < 0.5 * denom_mag,
            "certified division by a value whose error bound swallows it"
        );
        let value = self.value / other.value;
        let q_mag = value.hi.abs() + value.lo.abs();
        // |a/b - q| <= (err_a + |q| err_b) / (|b| - err_b) + rounding.
        let err = ((self.err + q_mag * other.err) / (denom_mag - other.err)
            + DD_EPS * q_mag)
            * BOUND_SLACK;
        Certified { value, err }
    }
}

/// Neumaier-compensated accumulator: error `O(eps * sum |x|)` independent of
/// the number of terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
