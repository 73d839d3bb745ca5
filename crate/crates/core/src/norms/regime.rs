//! Exact classification of the scaling-limit families by their weight.
//!
//! With `A = d(1/p + 1/q − 1)` and `B = d(1/q − 1/p)`, each family either
//! collapses, reproduces `M^0_{p,q}`, or defines a new space, depending on where
//! the weight `w` falls relative to `A`, `B` and `0`. All comparisons are on
//! exact rationals.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use super::Family;
use crate::error::{Error, Result};
use crate::exponent::{format_rational, Exponent, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Degenerate,
    CoincidesWithM0,
    NontrivialNewSpace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuRegime {
    ZeroSeminormOnSchwartz,
    CoincidesWithM0,
    NontrivialBanach,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Degenerate => "degenerate",
            Regime::CoincidesWithM0 => "coincides_with_M0",
            Regime::NontrivialNewSpace => "nontrivial_new_space",
        })
    }
}

impl fmt::Display for MuRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MuRegime::ZeroSeminormOnSchwartz => "zero_seminorm_on_schwartz",
            MuRegime::CoincidesWithM0 => "coincides_with_M0",
            MuRegime::NontrivialBanach => "nontrivial_banach",
        })
    }
}

/// `d(1/p + 1/q − 1)`.
pub fn threshold_a(d: usize, p: Exponent, q: Exponent) -> Rational {
    Rational::from_integer(d as i64) * (p.reciprocal() + q.reciprocal() - Rational::one())
}

/// `d(1/q − 1/p)`.
pub fn threshold_b(d: usize, p: Exponent, q: Exponent) -> Rational {
    Rational::from_integer(d as i64) * (q.reciprocal() - p.reciprocal())
}

fn check(p: Exponent, q: Exponent) -> Result<()> {
    p.check_lebesgue()?;
    q.check_lebesgue()
}

/// Regime of the sup-type families `frak_neg`, `frak_pos`, `frak_dot`.
pub fn regime_classify(d: usize, p: Exponent, q: Exponent, w: Rational, family: Family) -> Result<Regime> {
    check(p, q)?;
    let a = threshold_a(d, p, q);
    let b = threshold_b(d, p, q);
    let zero = Rational::zero();
    Ok(match family {
        Family::FrakNeg => {
            if w < a {
                Regime::Degenerate
            } else if w >= a.max(b).max(zero) {
                Regime::CoincidesWithM0
            } else {
                Regime::NontrivialNewSpace
            }
        }
        Family::FrakPos => {
            if w > zero {
                Regime::Degenerate
            } else if w <= a.min(b).min(zero) {
                Regime::CoincidesWithM0
            } else {
                Regime::NontrivialNewSpace
            }
        }
        Family::FrakDot => {
            if w < a || w > zero {
                Regime::Degenerate
            } else if a == zero && b == zero && w == zero {
                Regime::CoincidesWithM0
            } else {
                Regime::NontrivialNewSpace
            }
        }
        other => {
            return Err(Error::InvalidSpec(format!(
                "{other} is not one of frak_neg, frak_pos, frak_dot"
            )))
        }
    })
}

/// Regime of the decomposition families `script_neg`, `script_pos`, `script_dot`.
pub fn mu_regime_classify(d: usize, p: Exponent, q: Exponent, w: Rational, family: Family) -> Result<MuRegime> {
    check(p, q)?;
    let a = threshold_a(d, p, q);
    let b = threshold_b(d, p, q);
    let zero = Rational::zero();
    Ok(match family {
        Family::ScriptNeg => {
            if w > a {
                MuRegime::ZeroSeminormOnSchwartz
            } else if w <= zero.min(a).min(b) {
                MuRegime::CoincidesWithM0
            } else {
                MuRegime::NontrivialBanach
            }
        }
        Family::ScriptPos => {
            if w < zero {
                MuRegime::ZeroSeminormOnSchwartz
            } else if w >= zero.max(a).max(b) {
                MuRegime::CoincidesWithM0
            } else {
                MuRegime::NontrivialBanach
            }
        }
        Family::ScriptDot => {
            if w < zero || w > a {
                MuRegime::ZeroSeminormOnSchwartz
            } else if a == zero && b == zero && w == zero {
                MuRegime::CoincidesWithM0
            } else {
                MuRegime::NontrivialBanach
            }
        }
        other => {
            return Err(Error::InvalidSpec(format!(
                "{other} is not one of script_neg, script_pos, script_dot"
            )))
        }
    })
}

/// Classification label for any of the six scaling-limit families.
pub fn classify_label(d: usize, p: Exponent, q: Exponent, w: Rational, family: Family) -> Result<String> {
    if family.is_frak() {
        regime_classify(d, p, q, w, family).map(|r| r.to_string())
    } else {
        mu_regime_classify(d, p, q, w, family).map(|r| r.to_string())
    }
}

/// CSV raster of the classification over `(1/p, 1/q) ∈ [0,1]²` at step `1/resolution`.
pub fn emit_region_table(d: usize, family: Family, w: Rational, resolution: u32) -> Result<String> {
    if resolution < 8 {
        return Err(Error::Precondition(format!("resolution {resolution} is below 8")));
    }
    let res = resolution as i64;
    let mut out = String::from("inv_p,inv_q,class\n");
    for a in 0..=res {
        for b in 0..=res {
            let ip = Rational::new(a, res);
            let iq = Rational::new(b, res);
            let p = Exponent::from_reciprocal(ip)?;
            let q = Exponent::from_reciprocal(iq)?;
            let class = classify_label(d, p, q, w, family)?;
            out.push_str(&format!("{},{},{}\n", format_rational(ip), format_rational(iq), class));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::r;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn band_is_nontrivial() {
        let got = regime_classify(1, e("4"), e("4/3"), r(3, 10), Family::FrakNeg).unwrap();
        assert_eq!(got, Regime::NontrivialNewSpace);
        assert_eq!(got.to_string(), "nontrivial_new_space");
    }

    #[test]
    fn rejects_wrong_family() {
        assert!(regime_classify(1, e("2"), e("2"), r(0, 1), Family::ScriptNeg).is_err());
        assert!(mu_regime_classify(1, e("2"), e("2"), r(0, 1), Family::FrakNeg).is_err());
    }

    #[test]
    fn region_table_shape() {
        let t = emit_region_table(1, Family::FrakNeg, r(0, 1), 8).unwrap();
        assert_eq!(t.lines().count(), 82);
        assert!(t.contains("1/2,1/2,coincides_with_M0"));
        assert!(emit_region_table(1, Family::FrakNeg, r(0, 1), 4).is_err());
    }
}
