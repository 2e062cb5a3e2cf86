//! Closed intervals of machine numbers with outward rounding.
//!
//! Every operation returns an interval that contains the exact real result
//! for all operands drawn from its arguments. Overflow saturates the affected
//! endpoint to an infinity; callers that need finite bounds check
//! [`Interval::is_bounded`].

mod functions;
mod ibox;
pub mod round;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use round::*;

pub use functions::StdFn;
pub use ibox::IntervalBox;

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[x, x]`.
    ///
    /// # Panics
    /// If `x` is NaN or infinite.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "thin interval needs a finite value, got {x}");
        Interval { lo: x, hi: x }
    }

    /// Built from endpoints produced by directed rounding, which keep
    /// `lo <= hi` by construction.
    #[inline]
    pub(crate) fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "raw interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Smallest interval containing the real number written in `text`,
    /// which must be a decimal literal already parsed as `value`.
    pub(crate) fn from_decimal(text: &str, value: f64) -> Self {
        if decimal_is_exact(text) {
            Interval::point(value)
        } else {
            Interval::raw(next_down(value), next_up(value))
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_thin(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `hi - lo`, rounded up.
    pub fn diameter(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    pub fn radius(&self) -> f64 {
        mul_up(self.diameter(), 0.5)
    }

    /// A machine number inside the interval, the rounded centre.
    pub fn midpoint(&self) -> Result<f64> {
        if !self.is_bounded() {
            return Err(Error::UnboundedEnclosure(format!(
                "midpoint of {self} is undefined"
            )));
        }
        if self.lo == -self.hi {
            return Ok(0.0);
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        Ok(m.clamp(self.lo, self.hi))
    }

    /// Smallest absolute value over the interval.
    pub fn mignitude(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Largest absolute value over the interval.
    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::raw(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Hausdorff distance between two intervals.
    pub fn hausdorff(&self, other: &Interval) -> f64 {
        sub_up(self.lo, other.lo)
            .abs()
            .max(sub_up(self.hi, other.hi).abs())
    }

    /// `[max(lo, 0), max(hi, 0)]`.
    pub fn clamp_nonneg(&self) -> Interval {
        Interval::raw(self.lo.max(0.0), self.hi.max(0.0))
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Interval> {
        if rhs.contains_zero() {
            return Err(Error::DivisionByZeroInterval { divisor: rhs });
        }
        let (a, b) = (self, rhs);
        let lo = div_down(a.lo, b.lo)
            .min(div_down(a.lo, b.hi))
            .min(div_down(a.hi, b.lo))
            .min(div_down(a.hi, b.hi));
        let hi = div_up(a.lo, b.lo)
            .max(div_up(a.lo, b.hi))
            .max(div_up(a.hi, b.lo))
            .max(div_up(a.hi, b.hi));
        Ok(Interval::raw(lo, hi))
    }

    pub fn recip(self) -> Result<Interval> {
        Interval::ONE.checked_div(self)
    }

    /// Integer power, using the mignitude for even exponents.
    pub fn powi(self, n: i32) -> Result<Interval> {
        if n == 0 {
            return Ok(Interval::ONE);
        }
        if n < 0 {
            if self.contains_zero() {
                return Err(Error::DivisionByZeroInterval { divisor: self });
            }
            return self.recip()?.pow_unsigned(n.unsigned_abs());
        }
        self.pow_unsigned(n as u32)
    }

    fn pow_unsigned(self, n: u32) -> Result<Interval> {
        if n.is_multiple_of(2) {
            let base = Interval::raw(self.mignitude(), self.magnitude());
            let p = pow_nonneg(base, n);
            // Even powers are nonnegative; underflow must not push lo below 0.
            Ok(Interval::raw(p.lo.max(0.0), p.hi))
        } else {
            Ok(Interval::raw(odd_pow_lo(self.lo, n), odd_pow_hi(self.hi, n)))
        }
    }

    pub fn apply(self, f: StdFn) -> Result<Interval> {
        f.apply_interval(self)
    }

    /// Shortest text that parses back to the identical endpoints.
    pub fn to_text(&self) -> String {
        format!("[{},{}]", fmt_f64(self.lo), fmt_f64(self.hi))
    }
}

/// Binary powering on a nonnegative base with outward-rounded products.
fn pow_nonneg(base: Interval, mut n: u32) -> Interval {
    let mut acc = Interval::ONE;
    let mut b = base;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * b;
        }
        n >>= 1;
        if n > 0 {
            b = b * b;
        }
    }
    acc
}

fn odd_pow_lo(x: f64, n: u32) -> f64 {
    let p = pow_nonneg(Interval::point_or_inf(x.abs()), n);
    if x < 0.0 {
        -p.hi
    } else {
        p.lo
    }
}

fn odd_pow_hi(x: f64, n: u32) -> f64 {
    let p = pow_nonneg(Interval::point_or_inf(x.abs()), n);
    if x < 0.0 {
        -p.lo
    } else {
        p.hi
    }
}

impl Interval {
    fn point_or_inf(x: f64) -> Interval {
        if x.is_infinite() {
            Interval::raw(f64::MAX, f64::INFINITY)
        } else {
            Interval::raw(x, x)
        }
    }
}

/// Whether a decimal literal denotes a number exactly representable as f64.
/// Conservative: anything it cannot decide is reported inexact.
fn decimal_is_exact(text: &str) -> bool {
    let t = text.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => match t[i + 1..].parse::<i32>() {
            Ok(e) => (&t[..i], e),
            Err(_) => return false,
        },
        None => (t, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    let digits: String = int_part.chars().chain(frac_part.chars()).collect();
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return false;
    }
    let digits = digits.trim_start_matches('0');
    if digits.is_empty() {
        return true;
    }
    let Ok(mut m) = digits.parse::<u128>() else {
        return false;
    };
    // value = m * 10^e10
    let mut e10 = exp as i64 - frac_part.len() as i64;
    while e10 < 0 && m % 10 == 0 {
        m /= 10;
        e10 += 1;
    }
    if e10 >= 0 {
        // m * 10^e10 = (m * 5^e10) * 2^e10; exact iff the odd part fits 53 bits.
        let mut v = m;
        for _ in 0..e10 {
            v = match v.checked_mul(5) {
                Some(v) => v,
                None => return false,
            };
        }
        let odd = v >> v.trailing_zeros();
        odd < (1u128 << 53) && e10 < 300
    } else {
        // m / 10^k = (m / 5^k) / 2^k; needs 5^k | m.
        let k = (-e10) as u32;
        if k > 50 {
            return false;
        }
        let five_k = 5u128.pow(k);
        if m % five_k != 0 {
            return false;
        }
        let q = m / five_k;
        let odd = q >> q.trailing_zeros();
        odd < (1u128 << 53) && k < 1000
    }
}

/// Shortest round-trip decimal representation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::raw(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::raw(sub_down(self.lo, rhs.hi), sub_up(self.hi, rhs.lo))
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        let lo = mul_down(a.lo, b.lo)
            .min(mul_down(a.lo, b.hi))
            .min(mul_down(a.hi, b.lo))
            .min(mul_down(a.hi, b.hi));
        let hi = mul_up(a.lo, b.lo)
            .max(mul_up(a.lo, b.hi))
            .max(mul_up(a.hi, b.lo))
            .max(mul_up(a.hi, b.hi));
        Interval::raw(lo, hi)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::raw(-self.hi, -self.lo)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            pos: 0,
            msg: format!("expected `[lo,hi]`, got `{s}`"),
        };
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let lo: f64 = a.trim().parse().map_err(|_| bad())?;
        let hi: f64 = b.trim().parse().map_err(|_| bad())?;
        Interval::new(lo, hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(d)?;
        Interval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}
