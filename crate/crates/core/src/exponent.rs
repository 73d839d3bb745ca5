//! Exact Lebesgue exponents and rational weights.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// A Lebesgue exponent in `[1, ∞]`, or any positive rational when used as a
/// time-integrability index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational),
    Infinity,
}

impl Exponent {
    pub fn integer(n: i64) -> Self {
        Exponent::Finite(Rational::from_integer(n))
    }

    /// Exponent `p` with `1/p = r`; `r = 0` gives `∞`.
    pub fn from_reciprocal(r: Rational) -> Result<Self> {
        if r.is_zero() {
            Ok(Exponent::Infinity)
        } else if r.is_positive() {
            Ok(Exponent::Finite(r.recip()))
        } else {
            Err(Error::InvalidExponent(format!("reciprocal {r} is negative")))
        }
    }

    /// Parses and checks `1 ≤ p ≤ ∞`.
    pub fn lebesgue(s: &str) -> Result<Self> {
        let e: Exponent = s.parse()?;
        e.check_lebesgue()?;
        Ok(e)
    }

    pub fn check_lebesgue(&self) -> Result<()> {
        match self {
            Exponent::Finite(p) if *p < Rational::one() => Err(Error::InvalidExponent(format!("{p} is below 1"))),
            _ => Ok(()),
        }
    }

    /// `1/p` as an exact rational.
    pub fn reciprocal(&self) -> Rational {
        match self {
            Exponent::Finite(p) => p.recip(),
            Exponent::Infinity => Rational::zero(),
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(p) => rational_to_f64(*p),
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// Hölder conjugate `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(&self) -> Result<Self> {
        Exponent::from_reciprocal(Rational::one() - self.reciprocal())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite(p) => write!(f, "{}", format_rational(*p)),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinity);
        }
        let r = parse_rational(t)?;
        if !r.is_positive() {
            return Err(Error::InvalidExponent(format!("{s} is not positive")));
        }
        Ok(Exponent::Finite(r))
    }
}

impl serde::Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn rational_to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn format_rational(r: Rational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"3"`, `"-4/3"`, `"0.3"`, `"-1.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("cannot read {s:?} as a rational number"));
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() && int_digits.is_empty() {
            return Err(bad());
        }
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let i: i64 = if int_digits.is_empty() {
            0
        } else {
            int_digits.parse().map_err(|_| bad())?
        };
        let den = 10_i64.pow(frac.len() as u32);
        let f: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = i.checked_mul(den).and_then(|v| v.checked_add(f)).ok_or_else(bad)?;
        let r = Rational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    let n: i64 = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Serde adapter writing rationals as `"n/d"` strings.
pub mod rational_serde {
    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(*r))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}
