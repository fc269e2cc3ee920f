//! Exact rational helpers. Every threshold comparison in the crate goes
//! through these so that certificates never depend on floating point.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Parses `"0.25"`, `"1/4"`, `"3"` or `"-0.5"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::param("rational", format!("cannot parse `{s}`"));
    if let Some((a, b)) = s.split_once('/') {
        let num: i64 = a.trim().parse().map_err(|_| bad())?;
        let den: i64 = b.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if frac.len() > 17 {
        return Err(bad());
    }
    let den = 10i64.pow(frac.len() as u32);
    let int_part: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac_part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int_part
        .checked_mul(den)
        .and_then(|x| x.checked_add(frac_part))
        .ok_or_else(bad)?;
    Ok(Rational::new(if neg { -num } else { num }, den))
}

pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn big_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `count < x * total`
#[inline]
pub fn lt_scaled(count: u128, x: &Rational, total: u128) -> bool {
    debug_assert!(*x.denom() > 0);
    let lhs = count as i128 * *x.denom() as i128;
    let rhs = *x.numer() as i128 * total as i128;
    lhs < rhs
}

/// `count <= x * total`
#[inline]
pub fn le_scaled(count: u128, x: &Rational, total: u128) -> bool {
    let lhs = count as i128 * *x.denom() as i128;
    let rhs = *x.numer() as i128 * total as i128;
    lhs <= rhs
}

/// `count > x * total`
#[inline]
pub fn gt_scaled(count: u128, x: &Rational, total: u128) -> bool {
    !le_scaled(count, x, total)
}

/// ⌈x·n⌉ for nonnegative `x`.
pub fn ceil_mul(x: &Rational, n: usize) -> usize {
    let p = *x.numer() as i128 * n as i128;
    let d = *x.denom() as i128;
    (p + d - 1).div_euclid(d).max(0) as usize
}

/// ⌊x·n⌋ for nonnegative `x`.
pub fn floor_mul(x: &Rational, n: usize) -> usize {
    let p = *x.numer() as i128 * n as i128;
    p.div_euclid(*x.denom() as i128).max(0) as usize
}

pub fn is_open_unit(x: &Rational) -> bool {
    x.is_positive() && *x < Rational::one()
}

pub fn check_epsilon(name: &'static str, x: &Rational) -> Result<()> {
    if is_open_unit(x) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{} not in (0,1)", format_rational(x))))
    }
}

/// Exact `a^k` for big rationals.
pub fn big_pow(a: &BigRational, k: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..k {
        out *= a;
    }
    out
}

pub(crate) fn big_from_counts(num: u128, den: u128) -> BigRational {
    if den == 0 {
        return BigRational::zero();
    }
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[inline]
pub fn pairs(n: usize) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

/// Serde adapter writing a `Rational` as `"p/q"`.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("1/4").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert_eq!(parse_rational(".5").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("-0.1").unwrap(), Rational::new(-1, 10));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn scaled_comparisons_are_exact() {
        let q = Rational::new(1, 3);
        assert!(lt_scaled(0, &q, 3));
        assert!(!lt_scaled(1, &q, 3));
        assert!(le_scaled(1, &q, 3));
        assert!(gt_scaled(2, &q, 3));
        assert_eq!(ceil_mul(&Rational::new(1, 2), 20), 10);
        assert_eq!(ceil_mul(&Rational::new(3, 10), 7), 3);
        assert_eq!(floor_mul(&Rational::new(3, 10), 7), 2);
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 3), 10);
        assert_eq!(binom(12, 4), 495);
        assert_eq!(binom(3, 5), 0);
        assert_eq!(binom(20, 10), 184756);
        assert_eq!(pairs(1), 0);
        assert_eq!(pairs(0), 0);
    }
}
