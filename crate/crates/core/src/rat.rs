//! Exact rational arithmetic helpers used by the planner and the gluing bookkeeping.

use num_bigint::{BigInt, Sign};
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

pub type Rat = Ratio<BigInt>;

pub fn rat(num: i64, den: i64) -> Rat {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Ratio::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Integer power with signed exponent.
pub fn rat_pow_i(r: &Rat, e: i64) -> Rat {
    if e >= 0 {
        r.pow(e as i32)
    } else {
        r.pow(-e as i32).recip()
    }
}

/// A rational that may be positive infinity. The reciprocal convention `1/inf = 0`
/// is applied in every exponent formula.
#[derive(Clone, Debug, PartialEq)]
pub enum RatOrInf {
    Finite(Rat),
    Inf,
}

impl RatOrInf {
    pub fn finite(num: i64, den: i64) -> Self {
        RatOrInf::Finite(rat(num, den))
    }

    /// 1/x with 1/inf = 0.
    pub fn reciprocal(&self) -> Rat {
        match self {
            RatOrInf::Finite(r) => r.recip(),
            RatOrInf::Inf => Rat::zero(),
        }
    }

    pub fn as_finite(&self) -> Option<&Rat> {
        match self {
            RatOrInf::Finite(r) => Some(r),
            RatOrInf::Inf => None,
        }
    }

    pub fn is_at_least(&self, bound: &Rat) -> bool {
        match self {
            RatOrInf::Finite(r) => r >= bound,
            RatOrInf::Inf => true,
        }
    }
}

impl fmt::Display for RatOrInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatOrInf::Finite(r) => write!(f, "{r}"),
            RatOrInf::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for RatOrInf {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") || s == "oo" {
            return Ok(RatOrInf::Inf);
        }
        Ok(RatOrInf::Finite(parse_rat(s)?))
    }
}

/// Parses `a`, `a/b`, or a plain decimal like `1.25` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
        let d = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.trim();
        let scale = BigInt::from(10u8).pow(digits.len() as u32);
        let int_part = BigInt::from_str(if int.is_empty() { "0" } else { int })
            .map_err(|e| format!("bad number {s:?}: {e}"))?;
        let frac_part =
            BigInt::from_str(digits).map_err(|e| format!("bad number {s:?}: {e}"))?;
        let signed_frac = if int.trim_start().starts_with('-') {
            -frac_part
        } else {
            frac_part
        };
        return Ok(Ratio::new(int_part * &scale + signed_frac, scale));
    }
    let n = BigInt::from_str(s).map_err(|e| format!("bad number {s:?}: {e}"))?;
    Ok(Ratio::from_integer(n))
}

/// Formats a rational as `num/den` (or `num` when integral).
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn bigint_nth_root_exact(n: &BigInt, d: u64) -> Option<BigInt> {
    if n.is_negative() {
        if d % 2 == 0 {
            return None;
        }
        return bigint_nth_root_exact(&(-n), d).map(|r| -r);
    }
    let r = n.nth_root(d as u32);
    if r.pow(d as u32) == *n {
        Some(r)
    } else {
        None
    }
}

/// Exact `base^exp` for rational exponent; `None` when the result is irrational.
pub fn rat_pow_exact(base: &Rat, exp: &Rat) -> Option<Rat> {
    if base.is_zero() {
        return if exp.is_positive() { Some(Rat::zero()) } else { None };
    }
    let d = exp.denom().to_u64()?;
    let n = exp.numer().to_i64()?;
    let root = if d == 1 {
        base.clone()
    } else {
        let rn = bigint_nth_root_exact(base.numer(), d)?;
        let rd = bigint_nth_root_exact(base.denom(), d)?;
        Ratio::new(rn, rd)
    };
    Some(rat_pow_i(&root, n))
}

/// f64 value of `base^exp` via logs; safe for astronomically large exact powers.
pub fn rat_pow_f64(base: f64, exp: &Rat) -> f64 {
    (rat_to_f64(exp) * base.ln()).exp()
}

/// Signum as -1/0/1, on the exact value.
pub fn rat_sign(r: &Rat) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-5").unwrap(), rat_int(-5));
        assert_eq!(parse_rat("1.25").unwrap(), rat(5, 4));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
        assert_eq!("inf".parse::<RatOrInf>().unwrap(), RatOrInf::Inf);
    }

    #[test]
    fn reciprocal_convention() {
        assert_eq!(RatOrInf::Inf.reciprocal(), Rat::zero());
        assert_eq!(RatOrInf::finite(3, 2).reciprocal(), rat(2, 3));
    }

    #[test]
    fn exact_powers() {
        // (4/9)^(3/2) = 8/27
        assert_eq!(
            rat_pow_exact(&rat(4, 9), &rat(3, 2)).unwrap(),
            rat(8, 27)
        );
        // 2^(-24)*... (1/2)^24 scaled by 3/4 root: (2^-24)^(3/4) = 2^-18
        assert_eq!(
            rat_pow_exact(&rat(1, 16777216), &rat(3, 4)).unwrap(),
            Rat::new(BigInt::from(1), BigInt::from(262144))
        );
        assert_eq!(rat_pow_exact(&rat(2, 1), &rat(1, 2)), None);
    }
}
