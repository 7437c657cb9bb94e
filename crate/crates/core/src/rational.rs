//! Exact rational scalars and their `"p/q"` string form.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"p/q"`, `"p"`, or a finite decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((whole, frac)) = s.split_once('.') {
        if !s.contains('/') && frac.chars().all(|c| c.is_ascii_digit()) {
            let digits = format!("{whole}{frac}");
            let num = BigInt::from_str(&digits).map_err(|_| Error::BadRational(s.to_string()))?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(Rational::new(num, den));
        }
    }
    let r = Rational::from_str(s).map_err(|_| Error::BadRational(s.to_string()))?;
    Ok(r)
}

/// Canonical `"p/q"` form; integers are written without a denominator.
pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::MIN } else { f64::MAX })
}

/// Largest integer `k` with `k <= r`.
pub fn floor_i64(r: &Rational) -> i64 {
    r.floor().to_integer().to_i64().expect("floor out of i64 range")
}

/// Serde adapter serializing a rational as a `"p/q"` string.
pub mod serde_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}
