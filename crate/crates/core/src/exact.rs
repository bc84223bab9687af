//! Exact rational arithmetic for the commensurability and parity criteria.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    // numer/denom separately would overflow for long decimal expansions
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let s = r.numer().bits().max(r.denom().bits()) as i64 - 60;
            let shift = BigInt::one() << (s.max(0) as usize);
            let n = (r.numer() / &shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() / &shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Parses `"3"`, `"-1/3"`, `"0.25"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim())
            .map_err(|_| Error::InvalidConfig(format!("bad numerator in {s:?}")))?;
        let d = BigInt::from_str(d.trim())
            .map_err(|_| Error::InvalidConfig(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::InvalidConfig(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    parse_decimal(s).ok_or_else(|| Error::InvalidConfig(format!("not a number: {s:?}")))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Exact rational value of the shortest decimal that round-trips to `x`.
pub fn from_f64_decimal(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x:e}"))
}

/// Square root if `r` is the square of a rational.
pub fn sqrt_exact(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Largest positive rational `g` such that every input is an integer multiple of `g`.
pub fn gcd_rational(values: &[Rational]) -> Option<Rational> {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for v in values {
        if !v.is_positive() {
            return None;
        }
        num = num.gcd(v.numer());
        den = den.lcm(v.denom());
    }
    if num.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

/// `Some(n)` when `r` is a non-negative integer.
pub fn as_natural(r: &Rational) -> Option<BigInt> {
    if r.is_integer() && !r.is_negative() {
        Some(r.to_integer())
    } else {
        None
    }
}

pub fn is_odd(n: &BigInt) -> bool {
    n.is_odd()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-2.5e1").unwrap(), int(-25));
        assert_eq!(parse_rational("9").unwrap(), int(9));
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn decimal_roundtrip_of_floats() {
        assert_eq!(from_f64_decimal(0.5).unwrap(), rat(1, 2));
        assert_eq!(from_f64_decimal(2.0).unwrap(), int(2));
        assert_eq!(from_f64_decimal(1e-3).unwrap(), rat(1, 1000));
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(sqrt_exact(&rat(9, 4)).unwrap(), rat(3, 2));
        assert!(sqrt_exact(&int(2)).is_none());
    }

    #[test]
    fn rational_gcd() {
        assert_eq!(gcd_rational(&[int(1), int(3)]).unwrap(), int(1));
        assert_eq!(gcd_rational(&[int(1), rat(3, 5), rat(2, 3)]).unwrap(), rat(1, 15));
    }
}
