//! Exact rational helpers shared by the similarity and decision layers.
//!
//! Similarities are ratios of small integers (`1 - d/D`) and results are
//! usually short decimals, so scores are kept as exact rationals and only
//! converted to floating point for display or for the probabilistic layer.

use std::fmt;

use num_rational::Ratio;
use num_traits::Signed;
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Largest denominator rendered as a fraction rather than a decimal.
pub const FRACTION_DENOMINATOR_LIMIT: i128 = 100;

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses `"7"`, `"-2.25"`, `"1/3"` or `"0.5/3"`-free forms into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::InvalidNumber(text.to_string());
    if let Some((n, d)) = text.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(text).ok_or_else(bad)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let scale = 10i128.checked_pow(u32::try_from(frac_part.len()).ok()?)?;
    let whole: i128 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let frac: i128 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().ok()?
    };
    let numer = whole.checked_mul(scale)?.checked_add(frac)?;
    let r = Rational::new(numer, scale);
    Some(if negative { -r } else { r })
}

/// Renders `r` as an integer, a small fraction, or a decimal.
pub fn fraction_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else if r.denom().abs() <= FRACTION_DENOMINATOR_LIMIT {
        format!("{}/{}", r.numer(), r.denom())
    } else {
        format!("{:.6}", to_f64(r))
    }
}

pub fn decimal_string(r: &Rational) -> String {
    format!("{:.6}", to_f64(r))
}

/// Display wrapper printing a rational in fraction form.
pub struct Frac<'a>(pub &'a Rational);

impl fmt::Display for Frac<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&fraction_string(self.0))
    }
}

/// Exact decimal rendering when `r` has a short decimal expansion that
/// survives an `f64` round trip.
fn f64_exact(r: &Rational) -> Option<f64> {
    let x = to_f64(r);
    if !x.is_finite() {
        return None;
    }
    match parse_decimal(&format!("{x}")) {
        Some(back) if back == *r => Some(x),
        _ => None,
    }
}

/// Serde adapter: rationals are written as JSON numbers when that is
/// lossless, otherwise as `"p/q"` strings. Both forms are accepted on read.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        if r.is_integer() {
            if let Ok(i) = i64::try_from(*r.numer()) {
                return s.serialize_i64(i);
            }
        }
        match f64_exact(r) {
            Some(x) => s.serialize_f64(x),
            None => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or a string such as \"2.5\" or \"1/3\"")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
            Ok(Rational::from_integer(v as i128))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
            Ok(Rational::from_integer(v as i128))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
            if !v.is_finite() {
                return Err(E::custom(format!("non-finite number {v}")));
            }
            parse_decimal(&format!("{v}"))
                .ok_or_else(|| E::custom(format!("number {v} cannot be represented exactly")))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
            parse_rational(v).map_err(E::custom)
        }
    }
}
