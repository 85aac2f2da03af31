//! Bit-exact model of the control hardware's classical arithmetic.
//!
//! Integers are 18-bit two's complement ([`Int18`]) and reals are Q2.16
//! fixed point ([`FixedQ216`]): one sign bit, one integer bit and sixteen
//! fractional bits, covering `[-2, 2 - 2^-16]`. Every run-time operation
//! wraps silently on overflow. Range errors exist only when a literal is
//! converted with [`FixedQ216::encode`].
//!
//! When a fixed value is used as a rotation angle it is read in units of
//! pi, so the full register range spans two periods of `2*pi`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of bits in a hardware word.
pub const WORD_BITS: u32 = 18;
/// Number of fractional bits in a Q2.16 value.
pub const FRAC_BITS: u32 = 16;

const MODULUS: i64 = 1 << WORD_BITS;
const HALF_MODULUS: i64 = 1 << (WORD_BITS - 1);
const ONE_RAW: i64 = 1 << FRAC_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FixedError {
    #[error("value {0} is outside the Q2.16 range [-2, 2 - 2^-16]")]
    OutOfRange(f64),
    #[error("value {0} is outside the 18-bit integer range")]
    IntOutOfRange(i64),
    #[error("division by zero")]
    DivideByZero,
}

/// Reduces an arbitrary integer to the signed 18-bit range by two's-complement wrap.
#[inline]
pub fn wrap18(value: i64) -> i32 {
    (((value + HALF_MODULUS).rem_euclid(MODULUS)) - HALF_MODULUS) as i32
}

/// 18-bit signed integer with wrap-around arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Int18(i32);

impl Int18 {
    pub const MIN: Int18 = Int18(-(1 << 17));
    pub const MAX: Int18 = Int18((1 << 17) - 1);
    pub const ZERO: Int18 = Int18(0);

    /// Builds a value, wrapping anything outside the 18-bit range.
    pub fn wrapping(value: i64) -> Self {
        Int18(wrap18(value))
    }

    /// Builds a value, rejecting anything outside the 18-bit range.
    pub fn checked(value: i64) -> Result<Self, FixedError> {
        if (Self::MIN.0 as i64..=Self::MAX.0 as i64).contains(&value) {
            Ok(Int18(value as i32))
        } else {
            Err(FixedError::IntOutOfRange(value))
        }
    }

    pub fn get(self) -> i32 {
        self.0
    }
}

impl Add for Int18 {
    type Output = Int18;
    fn add(self, rhs: Int18) -> Int18 {
        Int18::wrapping(self.0 as i64 + rhs.0 as i64)
    }
}

impl Sub for Int18 {
    type Output = Int18;
    fn sub(self, rhs: Int18) -> Int18 {
        Int18::wrapping(self.0 as i64 - rhs.0 as i64)
    }
}

impl Mul for Int18 {
    type Output = Int18;
    fn mul(self, rhs: Int18) -> Int18 {
        Int18::wrapping(self.0 as i64 * rhs.0 as i64)
    }
}

impl Neg for Int18 {
    type Output = Int18;
    fn neg(self) -> Int18 {
        Int18::wrapping(-(self.0 as i64))
    }
}

impl fmt::Display for Int18 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Q2.16 fixed-point real stored as its 18-bit raw integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixedQ216(i32);

impl FixedQ216 {
    pub const MIN: FixedQ216 = FixedQ216(-(1 << 17));
    pub const MAX: FixedQ216 = FixedQ216((1 << 17) - 1);
    pub const ZERO: FixedQ216 = FixedQ216(0);
    pub const ONE: FixedQ216 = FixedQ216(1 << FRAC_BITS);
    /// Smallest positive increment, `2^-16`.
    pub const EPSILON: f64 = 1.0 / ONE_RAW as f64;

    /// Converts a real literal, rounding to nearest with ties to even.
    pub fn encode(x: f64) -> Result<Self, FixedError> {
        if !x.is_finite() {
            return Err(FixedError::OutOfRange(x));
        }
        let scaled = (x * ONE_RAW as f64).round_ties_even();
        if scaled < Self::MIN.0 as f64 || scaled > Self::MAX.0 as f64 {
            return Err(FixedError::OutOfRange(x));
        }
        Ok(FixedQ216(scaled as i32))
    }

    /// Interprets any integer as a raw word, wrapping to 18 bits.
    pub fn from_raw(raw: i64) -> Self {
        FixedQ216(wrap18(raw))
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / ONE_RAW as f64
    }

    /// Reads the value as an angle in units of pi.
    pub fn to_radians(self) -> f64 {
        self.to_f64() * std::f64::consts::PI
    }

    /// Full-width product rescaled by truncation toward zero, then wrapped.
    pub fn wrapping_mul(self, rhs: FixedQ216) -> FixedQ216 {
        let product = self.0 as i64 * rhs.0 as i64;
        FixedQ216::from_raw(product / ONE_RAW)
    }

    /// Table-based reciprocal, wrapped into Q2.16.
    pub fn recip(self) -> Result<FixedQ216, FixedError> {
        Ok(FixedQ216::from_raw(self.recip_unwrapped()?))
    }

    /// Raw value of the reciprocal before the final wrap, at full width.
    pub fn recip_unwrapped(self) -> Result<i64, FixedError> {
        let (mantissa_recip, lead) = normalized_recip(self.0)?;
        // 1/a = (y / 2^30) * 2^(16 - lead); raw = that * 2^16
        let magnitude = shift_round(mantissa_recip as i64, 2 - lead as i32);
        Ok(if self.0 < 0 { -magnitude } else { magnitude })
    }

    /// Quotient computed from the full-width table reciprocal of `rhs`, wrapped once at the end.
    ///
    /// Angles derived as `x / sigma` stay correct modulo the register period even when
    /// `1 / sigma` alone would already have wrapped.
    pub fn wrapping_div(self, rhs: FixedQ216) -> Result<FixedQ216, FixedError> {
        let (mantissa_recip, lead) = normalized_recip(rhs.0)?;
        let numerator = self.0.unsigned_abs() as i64;
        let magnitude = (numerator * mantissa_recip as i64) >> (14 + lead);
        let negative = (self.0 < 0) != (rhs.0 < 0);
        Ok(FixedQ216::from_raw(if negative { -magnitude } else { magnitude }))
    }
}

impl Add for FixedQ216 {
    type Output = FixedQ216;
    fn add(self, rhs: FixedQ216) -> FixedQ216 {
        FixedQ216::from_raw(self.0 as i64 + rhs.0 as i64)
    }
}

impl Sub for FixedQ216 {
    type Output = FixedQ216;
    fn sub(self, rhs: FixedQ216) -> FixedQ216 {
        FixedQ216::from_raw(self.0 as i64 - rhs.0 as i64)
    }
}

impl Mul for FixedQ216 {
    type Output = FixedQ216;
    fn mul(self, rhs: FixedQ216) -> FixedQ216 {
        self.wrapping_mul(rhs)
    }
}

impl Neg for FixedQ216 {
    type Output = FixedQ216;
    fn neg(self) -> FixedQ216 {
        FixedQ216::from_raw(-(self.0 as i64))
    }
}

impl fmt::Display for FixedQ216 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

// Reciprocal of a normalized mantissa m in [1, 2), both in Q1.30.
const MANTISSA_BITS: u32 = 30;
const TABLE_BITS: u32 = 6;
const TABLE_LEN: usize = 1 << TABLE_BITS;
const INTERP_BITS: u32 = MANTISSA_BITS - TABLE_BITS;

const fn build_recip_table() -> [u32; TABLE_LEN + 1] {
    let mut table = [0u32; TABLE_LEN + 1];
    let mut i = 0;
    while i <= TABLE_LEN {
        // round(2^30 * 64 / (64 + i))
        let denom = (TABLE_LEN + i) as u64;
        table[i] = (((1u64 << (MANTISSA_BITS + TABLE_BITS)) + denom / 2) / denom) as u32;
        i += 1;
    }
    table
}

static RECIP_TABLE: [u32; TABLE_LEN + 1] = build_recip_table();

/// Returns `(y, p)` with `y / 2^30 ~= 2^p / |raw|` (y in Q1.30) and `p` the
/// position of the leading one of `|raw|`.
fn normalized_recip(raw: i32) -> Result<(u64, u32), FixedError> {
    if raw == 0 {
        return Err(FixedError::DivideByZero);
    }
    let magnitude = raw.unsigned_abs() as u64;
    let lead = 63 - magnitude.leading_zeros();
    let mantissa = magnitude << (MANTISSA_BITS - lead);

    let index = ((mantissa >> INTERP_BITS) as usize) & (TABLE_LEN - 1);
    let frac = mantissa & ((1 << INTERP_BITS) - 1);
    let lo = RECIP_TABLE[index] as u64;
    let hi = RECIP_TABLE[index + 1] as u64;
    // table is decreasing
    let seed = lo - (((lo - hi) * frac) >> INTERP_BITS);

    // one Newton step: y <- y * (2 - m*y)
    let two = 2u64 << MANTISSA_BITS;
    let my = (mantissa * seed) >> MANTISSA_BITS;
    let refined = (seed * (two - my)) >> MANTISSA_BITS;
    Ok((refined, lead))
}

fn shift_round(value: i64, shift: i32) -> i64 {
    if shift >= 0 {
        value << shift
    } else {
        let s = -shift;
        (value + (1 << (s - 1))) >> s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(x: f64) -> FixedQ216 {
        FixedQ216::encode(x).unwrap()
    }

    #[test]
    fn encode_examples() {
        assert_eq!(fx(0.5).raw(), 32768);
        assert_eq!(fx(0.606531).raw(), 39750);
        assert_eq!(FixedQ216::encode(2.0), Err(FixedError::OutOfRange(2.0)));
        assert_eq!(fx(-2.0), FixedQ216::MIN);
        assert_eq!(fx(2.0 - FixedQ216::EPSILON), FixedQ216::MAX);
        assert!(FixedQ216::encode(f64::NAN).is_err());
    }

    #[test]
    fn encode_rounds_ties_to_even() {
        assert_eq!(fx(0.5 * FixedQ216::EPSILON).raw(), 0);
        assert_eq!(fx(1.5 * FixedQ216::EPSILON).raw(), 2);
        assert_eq!(fx(2.5 * FixedQ216::EPSILON).raw(), 2);
        assert_eq!(fx(-1.5 * FixedQ216::EPSILON).raw(), -2);
    }

    #[test]
    fn add_wraps() {
        assert_eq!(fx(0.25) + fx(0.25), fx(0.5));
        assert_eq!(fx(1.5) + fx(1.5), fx(-1.0));
        assert_eq!(FixedQ216::MAX + FixedQ216::from_raw(1), FixedQ216::MIN);
        assert_eq!(-FixedQ216::MIN, FixedQ216::MIN);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(fx(0.5) * fx(0.5), fx(0.25));
        assert_eq!(FixedQ216::from_raw(1) * fx(0.5), FixedQ216::ZERO);
        assert_eq!(FixedQ216::from_raw(-1) * fx(0.5), FixedQ216::ZERO);
        assert_eq!(fx(1.5) * fx(1.5), fx(-1.75));
    }

    #[test]
    fn recip_examples() {
        assert_eq!(fx(1.0).recip().unwrap(), fx(1.0));
        assert_eq!(fx(0.5).recip().unwrap(), fx(-2.0));
        assert_eq!(fx(-1.0).recip().unwrap(), fx(-1.0));
        let r = fx(0.606531).recip().unwrap().to_f64();
        assert!((r - 1.648717).abs() / 1.648717 < 1.0 / 1024.0);
        assert_eq!(FixedQ216::ZERO.recip(), Err(FixedError::DivideByZero));
    }

    #[test]
    fn div_keeps_angles_modular() {
        // 0.3 / 0.07 ~= 4.29, one full wrap
        let q = fx(0.3).wrapping_div(fx(0.07)).unwrap().to_f64();
        let expected = fx(0.3).to_f64() / fx(0.07).to_f64();
        let folded = (expected + 2.0).rem_euclid(4.0) - 2.0;
        assert!((q - folded).abs() < 1e-3, "{q} vs {folded}");
        assert_eq!(fx(0.5).wrapping_div(FixedQ216::ZERO), Err(FixedError::DivideByZero));
    }

    #[test]
    fn radians() {
        use std::f64::consts::PI;
        assert_eq!(fx(0.5).to_radians(), PI / 2.0);
        assert_eq!(fx(-2.0).to_radians(), -2.0 * PI);
        assert_eq!(fx(1.0).to_radians(), PI);
    }

    #[test]
    fn int18_wraps() {
        assert_eq!(Int18::MAX + Int18::wrapping(1), Int18::MIN);
        assert_eq!(-Int18::MIN, Int18::MIN);
        assert_eq!(Int18::checked(1 << 17), Err(FixedError::IntOutOfRange(1 << 17)));
        assert_eq!(Int18::wrapping(3) * Int18::wrapping(-4), Int18::wrapping(-12));
    }
}
