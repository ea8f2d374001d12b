//! Completions of Q: square classes, Hilbert symbols, quadratic characters and absolute values.
//!
//! Elements are global rationals read at a place; nothing p-adic is stored.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::{fmt_q, q, Q};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum LocalField {
    Real,
    Padic(u64),
}

impl LocalField {
    pub fn padic(p: u64) -> Result<LocalField> {
        if is_prime(p) {
            Ok(LocalField::Padic(p))
        } else {
            domain(format!("{p} is not prime"))
        }
    }

    pub fn prime(&self) -> Option<u64> {
        match self {
            LocalField::Real => None,
            LocalField::Padic(p) => Some(*p),
        }
    }

    pub fn spec(&self) -> String {
        match self {
            LocalField::Real => "R".into(),
            LocalField::Padic(p) => format!("Q{p}"),
        }
    }
}

impl fmt::Display for LocalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec())
    }
}

impl FromStr for LocalField {
    type Err = Error;
    fn from_str(s: &str) -> Result<LocalField> {
        let s = s.trim();
        if s == "R" {
            return Ok(LocalField::Real);
        }
        let p = s
            .strip_prefix('Q')
            .and_then(|d| d.parse::<u64>().ok())
            .ok_or_else(|| Error::Parse(format!("field must be R or Q<p>, got {s:?}")))?;
        LocalField::padic(p)
    }
}

impl Serialize for LocalField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.spec())
    }
}

impl<'de> Deserialize<'de> for LocalField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= p {
        if p.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

fn nonzero(x: &Q) -> Result<()> {
    if x.is_zero() {
        domain("zero is not allowed here")
    } else {
        Ok(())
    }
}

fn int_val(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

/// p-adic valuation of a nonzero rational.
pub fn valuation(p: u64, x: &Q) -> Result<i64> {
    nonzero(x)?;
    let pb = BigInt::from(p);
    Ok(int_val(x.numer(), &pb) - int_val(x.denom(), &pb))
}

/// The unit part x / p^v(x) reduced mod `m` (m a power of p), as a residue in [0, m).
fn unit_residue(p: u64, x: &Q, m: u64) -> u64 {
    let pb = BigInt::from(p);
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    while (&n % &pb).is_zero() {
        n /= &pb;
    }
    while (&d % &pb).is_zero() {
        d /= &pb;
    }
    let mb = BigInt::from(m);
    let n = n.mod_floor(&mb);
    let d = d.mod_floor(&mb);
    let dinv = d
        .extended_gcd(&mb)
        .x
        .mod_floor(&mb);
    ((n * dinv).mod_floor(&mb)).to_u64().expect("small residue")
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mm = m as u128;
    let mut r = 1u128;
    let mut bb = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    r as u64
}

/// Legendre symbol of a unit residue u mod odd p.
fn legendre(u: u64, p: u64) -> i8 {
    if pow_mod(u, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

pub fn is_square(k: LocalField, x: &Q) -> Result<bool> {
    nonzero(x)?;
    Ok(match k {
        LocalField::Real => x.is_positive(),
        LocalField::Padic(2) => valuation(2, x)? % 2 == 0 && unit_residue(2, x, 8) == 1,
        LocalField::Padic(p) => valuation(p, x)? % 2 == 0 && legendre(unit_residue(p, x, p), p) == 1,
    })
}

/// Hilbert symbol (a, b) at the place.
pub fn hilbert(k: LocalField, a: &Q, b: &Q) -> Result<i8> {
    nonzero(a)?;
    nonzero(b)?;
    Ok(match k {
        LocalField::Real => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        LocalField::Padic(2) => {
            let al = valuation(2, a)?;
            let be = valuation(2, b)?;
            let u = unit_residue(2, a, 8);
            let v = unit_residue(2, b, 8);
            let eps = |x: u64| ((x - 1) / 2) % 2;
            let omega = |x: u64| ((x * x - 1) / 8) % 2;
            let e = eps(u) * eps(v)
                + (al.rem_euclid(2) as u64) * omega(v)
                + (be.rem_euclid(2) as u64) * omega(u);
            if e.is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
        LocalField::Padic(p) => {
            let al = valuation(p, a)?;
            let be = valuation(p, b)?;
            let u = unit_residue(p, a, p);
            let v = unit_residue(p, b, p);
            let mut s: i8 = 1;
            // (-1)^{al*be*eps(p)}
            if al.rem_euclid(2) == 1 && be.rem_euclid(2) == 1 && (p % 4 == 3) {
                s = -s;
            }
            if be.rem_euclid(2) == 1 {
                s *= legendre(u, p);
            }
            if al.rem_euclid(2) == 1 {
                s *= legendre(v, p);
            }
            s
        }
    })
}

/// The quadratic character of F(sqrt b)/F evaluated at x; trivial when b is a square.
pub fn sgn_char(k: LocalField, b: &Q, x: &Q) -> Result<i8> {
    nonzero(x)?;
    if is_square(k, b)? {
        return Ok(1);
    }
    hilbert(k, x, b)
}

/// Normalized absolute value; |0| = 0.
pub fn abs_value(k: LocalField, x: &Q) -> Q {
    if x.is_zero() {
        return Q::zero();
    }
    match k {
        LocalField::Real => x.abs(),
        LocalField::Padic(p) => {
            let v = valuation(p, x).expect("nonzero");
            crate::rational::pow_i(&q(p as i64), -v)
        }
    }
}

/// Smallest quadratic non-residue mod odd p.
pub fn nonresidue(p: u64) -> u64 {
    (2..p).find(|&u| legendre(u, p) == -1).expect("odd prime has a non-residue")
}

/// Representatives of F^x / F^x2 in a fixed order.
pub fn square_class_reps(k: LocalField) -> Vec<Q> {
    match k {
        LocalField::Real => vec![q(1), q(-1)],
        LocalField::Padic(2) => [1, 3, 5, 7, 2, 6, 10, 14].iter().map(|&x| q(x)).collect(),
        LocalField::Padic(p) => {
            let n = nonresidue(p) as i64;
            let p = p as i64;
            vec![q(1), q(n), q(p), q(n * p)]
        }
    }
}

/// An element of F^x / F^x2.
#[derive(Clone, Debug)]
pub struct SquareClass {
    pub field: LocalField,
    pub rep: Q,
}

impl SquareClass {
    pub fn new(field: LocalField, x: &Q) -> Result<SquareClass> {
        nonzero(x)?;
        Ok(SquareClass {
            field,
            rep: x.clone(),
        })
    }

    /// The class with its representative replaced by the canonical one from `square_class_reps`.
    pub fn canonical(&self) -> SquareClass {
        let rep = canonical_rep(self.field, &self.rep).expect("nonzero rep");
        SquareClass {
            field: self.field,
            rep,
        }
    }

    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        SquareClass {
            field: self.field,
            rep: &self.rep * &other.rep,
        }
        .canonical()
    }

    pub fn label(&self) -> String {
        fmt_q(&self.canonical().rep)
    }
}

impl PartialEq for SquareClass {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && is_square(self.field, &(&self.rep / &other.rep)).expect("nonzero reps")
    }
}

impl Eq for SquareClass {}

pub fn canonical_rep(k: LocalField, x: &Q) -> Result<Q> {
    nonzero(x)?;
    for r in square_class_reps(k) {
        if is_square(k, &(x / &r))? {
            return Ok(r);
        }
    }
    Err(Error::Internal("square class representatives are incomplete".into()))
}

/// Primes that can contribute to the product formula for (a, b).
pub fn bad_primes(a: &Q, b: &Q) -> Vec<u64> {
    let mut out = vec![2u64];
    for n in [a.numer(), a.denom(), b.numer(), b.denom()] {
        let mut n = n.abs();
        let mut f = BigInt::from(2);
        while &f * &f <= n {
            while (&n % &f).is_zero() {
                let fp = f.to_u64().expect("factor fits");
                if !out.contains(&fp) {
                    out.push(fp);
                }
                n /= &f;
            }
            f += BigInt::one();
        }
        if n > BigInt::one() {
            let fp = n.to_u64().expect("factor fits");
            if !out.contains(&fp) {
                out.push(fp);
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn brute_is_square_mod(p: u64, k: u32, x: i64) -> bool {
        // x a unit times an even power handled by caller
        let m = p.pow(k) as i64;
        (0..m).any(|t| (t * t - x).rem_euclid(m) == 0)
    }

    #[test]
    fn spec_examples() {
        let r = LocalField::Real;
        let q5 = LocalField::Padic(5);
        let q2 = LocalField::Padic(2);
        assert!(is_square(r, &qf(4, 9)).unwrap());
        assert!(!is_square(q5, &q(2)).unwrap());
        assert!(is_square(q2, &q(17)).unwrap());
        assert_eq!(hilbert(r, &q(-1), &q(-1)).unwrap(), -1);
        assert_eq!(hilbert(q5, &q(2), &q(5)).unwrap(), -1);
        assert_eq!(sgn_char(q5, &q(5), &q(2)).unwrap(), -1);
        assert_eq!(sgn_char(r, &q(-1), &q(-3)).unwrap(), -1);
        assert_eq!(sgn_char(q5, &q(1), &q(2)).unwrap(), 1);
        assert_eq!(abs_value(q5, &q(50)), qf(1, 25));
        assert_eq!(abs_value(r, &qf(-3, 2)), qf(3, 2));
        assert_eq!(abs_value(q2, &q(7)), q(1));
        assert!(is_square(LocalField::Padic(3), &q(0)).is_err());
    }

    #[test]
    fn squares_against_residue_search() {
        for p in [2u64, 3, 5, 7] {
            let k = LocalField::Padic(p);
            let kk = if p == 2 { 3 } else { 1 };
            for x in 1..60i64 {
                if x % p as i64 == 0 {
                    continue;
                }
                assert_eq!(
                    is_square(k, &q(x)).unwrap(),
                    brute_is_square_mod(p, kk, x),
                    "p={p} x={x}"
                );
            }
        }
    }

    /// Solvability of z^2 = a x^2 + b y^2 with a primitive solution mod p^k.
    fn brute_hilbert(p: u64, a: i64, b: i64) -> i8 {
        let k = if p == 2 { 5 } else { 3 };
        let m = p.pow(k) as i64;
        let pi = p as i64;
        let prim = |x: i64, y: i64, z: i64| x % pi != 0 || y % pi != 0 || z % pi != 0;
        for x in 0..m {
            for y in 0..m {
                let rhs = (a * x * x + b * y * y).rem_euclid(m);
                let sq: Vec<i64> = (0..m).filter(|z| (z * z).rem_euclid(m) == rhs).collect();
                if sq.iter().any(|&z| prim(x, y, z)) {
                    return 1;
                }
            }
        }
        -1
    }

    #[test]
    fn hilbert_against_brute_force() {
        // only squarefree-ish small values keep the mod p^k search exact
        for p in [3u64, 5] {
            for a in [1i64, 2, 3, 5, 6, 10, 15, -1, -2, -5] {
                for b in [1i64, 2, 3, 5, 7, -1, -3, -5] {
                    let k = LocalField::Padic(p);
                    assert_eq!(
                        hilbert(k, &q(a), &q(b)).unwrap(),
                        brute_hilbert(p, a, b),
                        "p={p} a={a} b={b}"
                    );
                }
            }
        }
        for a in [1i64, 3, 5, 7, 2, 6, -1] {
            for b in [1i64, 3, 5, 7, 2, -1] {
                let k = LocalField::Padic(2);
                assert_eq!(hilbert(k, &q(a), &q(b)).unwrap(), brute_hilbert(2, a, b), "2: {a} {b}");
            }
        }
    }

    #[test]
    fn class_counts() {
        assert_eq!(square_class_reps(LocalField::Real).len(), 2);
        assert_eq!(square_class_reps(LocalField::Padic(5)).len(), 4);
        assert_eq!(square_class_reps(LocalField::Padic(2)).len(), 8);
        for k in [LocalField::Padic(2), LocalField::Padic(3), LocalField::Padic(7)] {
            let reps = square_class_reps(k);
            for (i, a) in reps.iter().enumerate() {
                for (j, b) in reps.iter().enumerate() {
                    assert_eq!(is_square(k, &(a / b)).unwrap(), i == j);
                }
            }
        }
    }

    #[test]
    fn parse_field() {
        assert_eq!("R".parse::<LocalField>().unwrap(), LocalField::Real);
        assert_eq!("Q5".parse::<LocalField>().unwrap(), LocalField::Padic(5));
        assert!("Q6".parse::<LocalField>().is_err());
        assert!("C".parse::<LocalField>().is_err());
    }
}
