//! Univariate polynomials over the rationals, coefficients stored low degree first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{fmt_q, q, Q};

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Poly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Poly {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: Q) -> Poly {
        Poly::new(vec![c])
    }

    /// T^k.
    pub fn monomial(k: usize) -> Poly {
        let mut c = vec![Q::zero(); k + 1];
        c[k] = Q::one();
        Poly { coeffs: c }
    }

    pub fn from_i64(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| q(x)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn leading(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, s: &Q) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * q(i as i64))
                .collect(),
        )
    }

    /// The shift D(T^(i+1)) = T^i, D(1) = 0.
    pub fn shift_down(&self) -> Poly {
        Poly::new(self.coeffs.iter().skip(1).cloned().collect())
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let dl = d.leading();
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (Poly::zero(), self.clone());
        }
        let mut quo = vec![Q::zero(); self.degree() - dd + 1];
        for k in (0..quo.len()).rev() {
            let c = &rem[k + dd] / &dl;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    rem[k + i] -= &c * dc;
                }
            }
            quo[k] = c;
        }
        (Poly::new(quo), Poly::new(rem))
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }

    /// Only even powers present.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|c| c.is_zero())
    }

    pub fn from_roots_squared(sq: &[Q]) -> Poly {
        // prod (T^2 - s)
        let mut p = Poly::constant(Q::one());
        for s in sq {
            p = &p * &Poly::new(vec![-s.clone(), Q::zero(), Q::one()]);
        }
        p
    }

    pub fn to_string_coeffs(&self) -> Vec<String> {
        self.coeffs.iter().map(fmt_q).collect()
    }
}


/// Resultant by the Sylvester determinant.
pub fn resultant(a: &Poly, b: &Poly) -> Q {
    let (m, n) = (a.degree(), b.degree());
    if a.is_zero() || b.is_zero() {
        return Q::zero();
    }
    if m == 0 && n == 0 {
        return Q::one();
    }
    let size = m + n;
    let mut s = crate::matrix::Mat::zeros(size, size);
    for i in 0..n {
        for (k, c) in a.coeffs.iter().rev().enumerate() {
            s[(i, i + k)] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in b.coeffs.iter().rev().enumerate() {
            s[(n + i, i + k)] = c.clone();
        }
    }
    s.det()
}

/// Discriminant, normalized so that a monic p gives prod_{i<j} (r_i - r_j)^2.
pub fn discriminant(p: &Poly) -> Q {
    let n = p.degree();
    if n <= 1 {
        return Q::one();
    }
    let sign = if (n * (n - 1) / 2).is_multiple_of(2) { q(1) } else { q(-1) };
    sign * resultant(p, &p.derivative()) / p.leading()
}

/// Rational roots with multiplicity. Candidates come from floating-point root estimates
/// and their continued-fraction convergents; every returned root is checked exactly.
pub fn rational_roots(p: &Poly) -> Vec<Q> {
    let mut out = Vec::new();
    let mut cur = p.clone();
    while cur.degree() >= 1 && cur.coeff(0).is_zero() {
        out.push(Q::zero());
        cur = cur.shift_down();
    }
    loop {
        if cur.degree() == 0 {
            break;
        }
        let mut found = None;
        'outer: for (re, im) in approx_roots(&cur) {
            if im.abs() > 1e-6 * (1.0 + re.abs()) {
                continue;
            }
            for cand in convergents(re) {
                if cur.eval(&cand).is_zero() {
                    found = Some(cand);
                    break 'outer;
                }
            }
        }
        match found {
            Some(x) => {
                cur = cur.div_rem(&Poly::new(vec![-x.clone(), Q::one()])).0;
                out.push(x);
            }
            None => break,
        }
    }
    out.sort();
    out
}

fn convergents(x: f64) -> Vec<Q> {
    use num_bigint::BigInt;
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut h0, mut h1) = (BigInt::from(0), BigInt::from(1));
    let (mut k0, mut k1) = (BigInt::from(1), BigInt::from(0));
    let mut y = x;
    for _ in 0..40 {
        let a = y.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        out.push(Q::new(h2.clone(), k2.clone()));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a;
        if frac.abs() < 1e-12 {
            break;
        }
        y = 1.0 / frac;
    }
    out
}

/// Durand-Kerner iteration on the monic normalization.
fn approx_roots(p: &Poly) -> Vec<(f64, f64)> {
    let n = p.degree();
    let lead = crate::rational::to_f64(&p.leading());
    let c: Vec<f64> = p.coeffs.iter().map(|x| crate::rational::to_f64(x) / lead).collect();
    let bound = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut z: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let th = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            (bound * 0.5 * th.cos(), bound * 0.5 * th.sin())
        })
        .collect();
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let div = |a: (f64, f64), b: (f64, f64)| {
        let d = b.0 * b.0 + b.1 * b.1;
        ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
    };
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut val = (1.0, 0.0);
            for k in (0..n).rev() {
                val = mul(val, z[i]);
                val.0 += c[k];
            }
            let mut den = (1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den = mul(den, (z[i].0 - z[j].0, z[i].1 - z[j].1));
                }
            }
            let step = div(val, den);
            if !step.0.is_finite() || !step.1.is_finite() {
                continue;
            }
            z[i] = (z[i].0 - step.0, z[i].1 - step.1);
            delta = delta.max(step.0.abs() + step.1.abs());
        }
        if delta < 1e-14 {
            break;
        }
    }
    z
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = fmt_q(c);
            terms.push(match i {
                0 => cs,
                1 => format!("{cs}*T"),
                _ => format!("{cs}*T^{i}"),
            });
        }
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    #[test]
    fn division() {
        let a = Poly::from_i64(&[-1, 0, 0, 1]); // T^3 - 1
        let b = Poly::from_i64(&[-1, 1]);
        let (qq, r) = a.div_rem(&b);
        assert!(r.is_zero());
        assert_eq!(qq, Poly::from_i64(&[1, 1, 1]));
    }

    #[test]
    fn squarefree() {
        assert!(Poly::from_i64(&[-1, 0, 1]).is_squarefree());
        assert!(!Poly::from_i64(&[1, -2, 1]).is_squarefree());
    }

    #[test]
    fn discriminant_and_resultant() {
        // (T-1)(T-2)(T-4): differences 1, 3, 2
        let p = &(&Poly::from_i64(&[-1, 1]) * &Poly::from_i64(&[-2, 1])) * &Poly::from_i64(&[-4, 1]);
        assert_eq!(discriminant(&p), q(36));
        assert_eq!(resultant(&Poly::from_i64(&[-1, 1]), &Poly::from_i64(&[-3, 0, 1])), q(-2));
    }

    #[test]
    fn rational_root_finding() {
        let p = Poly::from_roots_squared(&[qf(9, 4), q(25), q(-3)]);
        let p = &p * &Poly::monomial(1);
        let r = rational_roots(&p);
        assert_eq!(r, vec![q(-5), qf(-3, 2), q(0), qf(3, 2), q(5)]);
        assert_eq!(rational_roots(&Poly::from_i64(&[1, 0, 1])), vec![]);
    }

    #[test]
    fn shift() {
        let p = Poly::from_i64(&[5, 0, 3, 1]);
        assert_eq!(p.shift_down(), Poly::from_i64(&[0, 3, 1]));
        assert!(Poly::from_i64(&[7]).shift_down().is_zero());
    }
}
