//! Numeric backends: exact rationals and `f64` behind one trait.
//!
//! Every constant produced by the closed forms in this crate is rational
//! (the harmonic-extension weights are 1/5 and 2/5, energies scale by 5/3,
//! measures by 1/3, …), so the computational core is generic over a
//! [`Scalar`] implemented by both [`Rational`] (arbitrary precision) and
//! `f64`.  Identity-style tests run on the rational backend, where
//! agreement is exact; eigenvalue and bulk Poisson work uses `f64`.
//!
//! Floating-point code paths keep a fixed left-to-right summation order so
//! repeated runs are bit-identical.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{AddAssign, Div, MulAssign, Neg, Sub, SubAssign};

/// The exact backend: arbitrary-precision rationals.
pub type Rational = BigRational;

/// Arithmetic abstraction shared by the exact and floating-point backends.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    /// Whether arithmetic is exact. Tests assert equality on exact
    /// backends and use tolerances otherwise.
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;

    /// The fraction `num/den`.
    ///
    /// # Panics
    /// Panics if `den == 0`.
    fn ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    /// The exact rational value, when the backend has one.
    fn to_rational(&self) -> Option<Rational>;

    fn abs(&self) -> Self;

    /// Multiplicative inverse.
    ///
    /// # Panics
    /// Panics on zero; callers guard.
    fn recip(&self) -> Self;

    fn to_f64(&self) -> f64;

    /// Serialized form: `p/q` (or a bare integer) for rationals, shortest
    /// round-trip decimal for floats.
    fn render(&self) -> String;

    /// Integer power, negative exponents allowed (via [`Scalar::recip`]).
    fn pow_i(&self, e: i32) -> Self {
        if e == 0 {
            return Self::one();
        }
        let mut base = if e < 0 { self.recip() } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Self::one();
        loop {
            if k & 1 == 1 {
                acc *= base.clone();
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.clone() * base;
        }
        acc
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn recip(&self) -> Self {
        Rational::recip(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<Rational> {
        None
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn recip(&self) -> Self {
        1.0 / self
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn render(&self) -> String {
        // `Display` for f64 is the shortest string that round-trips.
        format!("{self}")
    }
}

/// Parse a scalar literal: `p/q`, an integer, or a decimal with optional
/// exponent (`0.125`, `-3`, `2/7`, `1e-3`). Always exact.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty scalar literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(n, d));
    }
    // Decimal with optional exponent.
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i32 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?;
            // Exactness means 10^|exp| is materialized as an integer;
            // keep that to a few kilobytes.
            if exp.unsigned_abs() > 16_384 {
                return Err(Error::Parse(format!("exponent out of range in `{s}`")));
            }
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let sign = if int_part.starts_with('-') { -1 } else { 1 };
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || (int_digits.is_empty() && frac_part.is_empty())
    {
        return Err(Error::Parse(format!("bad scalar literal `{s}`")));
    }
    let digits = format!("{int_digits}{frac_part}");
    let unsigned: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits
            .parse()
            .map_err(|_| Error::Parse(format!("bad digits in `{s}`")))?
    };
    let value = Rational::from_integer(BigInt::from(sign) * unsigned);
    let shift = exp - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    Ok(value * Scalar::pow_i(&ten, shift))
}

/// Read a scalar out of a JSON value: strings hold `p/q` or decimal
/// literals; numbers are taken via their literal digits (the JSON parser
/// is configured to preserve them), so `0.1` means exactly 1/10 on the
/// rational backend.
pub fn scalar_from_json<S: Scalar>(v: &serde_json::Value) -> Result<S> {
    let r = match v {
        serde_json::Value::String(s) => parse_rational(s)?,
        serde_json::Value::Number(n) => parse_rational(&n.to_string())?,
        other => {
            return Err(Error::Parse(format!(
                "expected a scalar (string or number), got {other}"
            )))
        }
    };
    Ok(S::from_rational(&r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/5").unwrap(), q(3, 5));
        assert_eq!(parse_rational("-3/5").unwrap(), q(-3, 5));
        assert_eq!(parse_rational("0.125").unwrap(), q(1, 8));
        assert_eq!(parse_rational("-2.5").unwrap(), q(-5, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_rational("2.5e2").unwrap(), q(250, 1));
        assert_eq!(parse_rational("7").unwrap(), q(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn pow_i_handles_negative_exponents() {
        let x = q(3, 5);
        assert_eq!(x.pow_i(2), q(9, 25));
        assert_eq!(x.pow_i(-2), q(25, 9));
        assert_eq!(x.pow_i(0), q(1, 1));
        assert_eq!(2.0f64.pow_i(-3), 0.125);
    }

    #[test]
    fn render_round_trips() {
        assert_eq!(q(3, 5).render(), "3/5");
        assert_eq!(q(7, 1).render(), "7");
        assert_eq!(0.1f64.render(), "0.1");
    }

    #[test]
    fn json_scalars_are_exact() {
        let v: serde_json::Value = serde_json::from_str("0.1").unwrap();
        let r: Rational = scalar_from_json(&v).unwrap();
        assert_eq!(r, q(1, 10));
        let v: serde_json::Value = serde_json::from_str("\"4/3\"").unwrap();
        let r: Rational = scalar_from_json(&v).unwrap();
        assert_eq!(r, q(4, 3));
    }
}
