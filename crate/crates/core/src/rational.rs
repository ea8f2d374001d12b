//! Exact rationals and the small helpers the rest of the crate leans on.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `"3"`, `"-7/4"` or `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.trim_start().starts_with('-');
        let ip: BigInt = if ip.is_empty() || ip == "-" {
            BigInt::zero()
        } else {
            ip.parse().map_err(|_| bad())?
        };
        let fpart: BigInt = fp.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let mag = Q::new(ip.abs() * &den + fpart, den);
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

/// Canonical text form: `"n"` for integers, `"n/d"` otherwise.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// max(|num|, den); used for tie-breaking and shrinking.
pub fn height(x: &Q) -> BigInt {
    let n = x.numer().abs();
    let d = x.denom().clone();
    if n > d {
        n
    } else {
        d
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn is_int(x: &Q) -> bool {
    x.is_integer()
}

/// Rational square root when one exists.
pub fn sqrt_exact(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

pub fn pow_i(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("-7/4").unwrap(), qf(-7, 4));
        assert_eq!(parse_q("0.25").unwrap(), qf(1, 4));
        assert_eq!(parse_q("-1.5").unwrap(), qf(-3, 2));
        assert_eq!(parse_q("12").unwrap(), q(12));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn format_roundtrip() {
        for s in ["0", "-3", "5/7", "-22/9"] {
            assert_eq!(fmt_q(&parse_q(s).unwrap()), s);
        }
    }

    #[test]
    fn exact_sqrt() {
        assert_eq!(sqrt_exact(&qf(9, 4)), Some(qf(3, 2)));
        assert_eq!(sqrt_exact(&q(2)), None);
        assert_eq!(sqrt_exact(&q(-4)), None);
    }
}
