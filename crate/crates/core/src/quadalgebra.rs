//! Two-dimensional etale algebras F[t]/(t^2 - b) with conjugation, norm and trace.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::error::{domain, Result};
use crate::localfield::{is_square, sgn_char, LocalField};
use crate::matrix::Mat;
use crate::poly::Poly;
use crate::rational::{fmt_q, q, Q};

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct QuadAlgebra {
    pub base: LocalField,
    pub b: Q,
}

impl QuadAlgebra {
    pub fn new(base: LocalField, b: Q) -> Result<QuadAlgebra> {
        if b.is_zero() {
            return domain("quadratic algebra parameter b must be nonzero");
        }
        Ok(QuadAlgebra { base, b })
    }

    pub fn is_field(&self) -> bool {
        !is_square(self.base, &self.b).expect("b nonzero")
    }

    pub fn elem(&self, x: Q, y: Q) -> AlgElem {
        AlgElem {
            b: self.b.clone(),
            x,
            y,
        }
    }

    pub fn from_base(&self, x: Q) -> AlgElem {
        self.elem(x, Q::zero())
    }

    /// The generator sqrt(b).
    pub fn root(&self) -> AlgElem {
        self.elem(Q::zero(), q(1))
    }

    /// x is a norm from this algebra.
    pub fn is_norm(&self, x: &Q) -> Result<bool> {
        Ok(sgn_char(self.base, &self.b, x)? == 1)
    }

    /// Quadratic character of the algebra at x (trivial for split algebras).
    pub fn sgn(&self, x: &Q) -> Result<i8> {
        sgn_char(self.base, &self.b, x)
    }

    /// Two algebras are F-isomorphic iff their parameters agree up to squares.
    pub fn isomorphic(&self, other: &QuadAlgebra) -> bool {
        self.base == other.base && is_square(self.base, &(&self.b / &other.b)).expect("nonzero")
    }
}

/// x + y sqrt(b).
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct AlgElem {
    pub b: Q,
    pub x: Q,
    pub y: Q,
}

impl AlgElem {
    pub fn conj(&self) -> AlgElem {
        AlgElem {
            b: self.b.clone(),
            x: self.x.clone(),
            y: -self.y.clone(),
        }
    }

    pub fn norm(&self) -> Q {
        &self.x * &self.x - &self.b * &self.y * &self.y
    }

    pub fn trace(&self) -> Q {
        &self.x * q(2)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn in_base(&self) -> bool {
        self.y.is_zero()
    }

    /// tau(a) = -a.
    pub fn is_pure_imaginary(&self) -> bool {
        self.x.is_zero()
    }

    pub fn inv(&self) -> Result<AlgElem> {
        let n = self.norm();
        if n.is_zero() {
            return domain("element is a zero divisor");
        }
        let c = self.conj();
        Ok(AlgElem {
            b: self.b.clone(),
            x: &c.x / &n,
            y: &c.y / &n,
        })
    }

    pub fn scale(&self, s: &Q) -> AlgElem {
        AlgElem {
            b: self.b.clone(),
            x: &self.x * s,
            y: &self.y * s,
        }
    }

    /// Multiplication-by-self on the basis {1, sqrt b}.
    pub fn regular_rep(&self) -> Mat {
        Mat::from_rows(vec![
            vec![self.x.clone(), &self.b * &self.y],
            vec![self.y.clone(), self.x.clone()],
        ])
    }

    pub fn pow(&self, e: usize) -> AlgElem {
        let mut r = AlgElem {
            b: self.b.clone(),
            x: q(1),
            y: Q::zero(),
        };
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// Evaluates a rational polynomial at this element.
    pub fn eval_poly(&self, p: &Poly) -> AlgElem {
        let mut acc = AlgElem {
            b: self.b.clone(),
            x: Q::zero(),
            y: Q::zero(),
        };
        for c in p.coeffs().iter().rev() {
            acc = &acc * self;
            acc.x += c;
        }
        acc
    }
}

impl<'a> Add<&'a AlgElem> for &'a AlgElem {
    type Output = AlgElem;
    fn add(self, o: &AlgElem) -> AlgElem {
        debug_assert_eq!(self.b, o.b);
        AlgElem {
            b: self.b.clone(),
            x: &self.x + &o.x,
            y: &self.y + &o.y,
        }
    }
}

impl<'a> Sub<&'a AlgElem> for &'a AlgElem {
    type Output = AlgElem;
    fn sub(self, o: &AlgElem) -> AlgElem {
        debug_assert_eq!(self.b, o.b);
        AlgElem {
            b: self.b.clone(),
            x: &self.x - &o.x,
            y: &self.y - &o.y,
        }
    }
}

impl<'a> Mul<&'a AlgElem> for &'a AlgElem {
    type Output = AlgElem;
    fn mul(self, o: &AlgElem) -> AlgElem {
        debug_assert_eq!(self.b, o.b);
        AlgElem {
            b: self.b.clone(),
            x: &self.x * &o.x + &self.b * &self.y * &o.y,
            y: &self.x * &o.y + &self.y * &o.x,
        }
    }
}

impl Neg for &AlgElem {
    type Output = AlgElem;
    fn neg(self) -> AlgElem {
        AlgElem {
            b: self.b.clone(),
            x: -self.x.clone(),
            y: -self.y.clone(),
        }
    }
}

impl fmt::Display for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt({})", fmt_q(&self.x), fmt_q(&self.y), fmt_q(&self.b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> LocalField {
        LocalField::Padic(5)
    }

    #[test]
    fn basic_ops() {
        let e = QuadAlgebra::new(q5(), q(5)).unwrap();
        let a = e.elem(q(3), q(2));
        assert_eq!(a.conj(), e.elem(q(3), q(-2)));
        assert_eq!(e.elem(q(1), q(1)).norm(), q(-4));
        assert_eq!(e.from_base(q(3)).norm(), q(9));
        assert_eq!(a.conj().conj(), a);
        let r = e.root().regular_rep();
        assert_eq!(r, Mat::from_i64(&[&[0, 5], &[1, 0]]));
        assert_eq!(a.regular_rep().det(), a.norm());
        assert_eq!(a.regular_rep().trace(), a.trace());
        assert_eq!(e.from_base(q(1)).regular_rep(), Mat::identity(2));
    }

    #[test]
    fn norms() {
        let e = QuadAlgebra::new(q5(), q(5)).unwrap();
        assert!(e.is_norm(&q(-4)).unwrap());
        assert!(!e.is_norm(&q(2)).unwrap());
        let split = QuadAlgebra::new(q5(), q(4)).unwrap();
        assert!(!split.is_field());
        assert!(split.is_norm(&q(2)).unwrap());
        let c = QuadAlgebra::new(LocalField::Real, q(-1)).unwrap();
        assert!(!c.is_norm(&q(-1)).unwrap());
    }

    #[test]
    fn multiplicative_norm_and_inverse() {
        let e = QuadAlgebra::new(LocalField::Padic(3), q(-7)).unwrap();
        let a = e.elem(q(2), q(-3));
        let b = e.elem(q(-1), q(5));
        assert_eq!((&a * &b).norm(), a.norm() * b.norm());
        let ai = a.inv().unwrap();
        assert_eq!(&a * &ai, e.from_base(q(1)));
    }

    /// Norm equation search over small-height elements agrees with the character.
    #[test]
    fn norm_search_oracle() {
        for (p, b) in [(5u64, 5i64), (5, 2), (3, 3), (3, -1), (7, 3)] {
            let k = LocalField::Padic(p);
            let e = QuadAlgebra::new(k, q(b)).unwrap();
            let mut found = std::collections::BTreeSet::new();
            for x in -12i64..=12 {
                for y in -12i64..=12 {
                    let n = x * x - b * y * y;
                    if n != 0 {
                        found.insert(crate::localfield::canonical_rep(k, &q(n)).unwrap());
                    }
                }
            }
            for r in crate::localfield::square_class_reps(k) {
                // classes found as norms must be norms; at most half the classes are norms
                if found.contains(&r) {
                    assert!(e.is_norm(&r).unwrap(), "p={p} b={b} r={r}");
                }
            }
            let count = crate::localfield::square_class_reps(k)
                .iter()
                .filter(|r| e.is_norm(r).unwrap())
                .count();
            assert_eq!(count, 2);
            assert_eq!(found.len(), 2, "search should find both norm classes");
        }
    }
}
