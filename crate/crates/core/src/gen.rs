//! Seeded instance generators shared by tests, benches and the verification runner.
//!
//! Every generator draws from a caller-supplied ChaCha8 stream, so an instance is fixed by
//! (seed, parameters).

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::classes::{ClassTriple, TripleEntry};
use crate::localfield::{is_square, square_class_reps, LocalField};
use crate::matrix::Mat;
use crate::quadspace::{admissible_pair, GgpTriple, QuadSpace};
use crate::rational::{q, Q};
use crate::slice::{n_basis, LambdaElem};
use crate::soalg::so_basis;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// A rational n/d with 1 <= |n|, d <= height.
pub fn nonzero_rational(rng: &mut ChaCha8Rng, height: i64) -> Q {
    let n = rng.gen_range(1..=height) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let d = rng.gen_range(1..=height);
    Q::new(n.into(), d.into())
}

/// A rational n/d with |n| <= height, 1 <= d <= height; zero allowed.
pub fn rational(rng: &mut ChaCha8Rng, height: i64) -> Q {
    let n = rng.gen_range(-height..=height);
    let d = rng.gen_range(1..=height);
    Q::new(n.into(), d.into())
}

pub fn small_int(rng: &mut ChaCha8Rng, height: i64) -> Q {
    q(rng.gen_range(-height..=height))
}

/// Nonzero integer diagonal entries of absolute value <= height.
pub fn diagonal_space(rng: &mut ChaCha8Rng, k: LocalField, dim: usize, height: i64) -> QuadSpace {
    let d: Vec<Q> = (0..dim)
        .map(|_| {
            let v = rng.gen_range(1..=height);
            q(if rng.gen_bool(0.5) { v } else { -v })
        })
        .collect();
    QuadSpace::from_diag(k, &d).expect("nonzero diagonal")
}

/// Integer combination of the standard so(gram) basis.
pub fn so_element(rng: &mut ChaCha8Rng, gram: &Mat, height: i64) -> Mat {
    let n = gram.rows();
    so_basis(gram)
        .iter()
        .fold(Mat::zeros(n, n), |acc, b| &acc + &b.scale(&small_int(rng, height)))
}

pub fn ggp_triple(rng: &mut ChaCha8Rng, k: LocalField, m: usize, r: usize, height: i64) -> GgpTriple {
    let w = diagonal_space(rng, k, m, height);
    let nu0 = small_nonzero_int(rng, height);
    admissible_pair(&w, &nu0, r).expect("nonzero nu0")
}

fn small_nonzero_int(rng: &mut ChaCha8Rng, height: i64) -> Q {
    let v = rng.gen_range(1..=height);
    q(if rng.gen_bool(0.5) { v } else { -v })
}

pub fn lambda_elem(rng: &mut ChaCha8Rng, t: &GgpTriple, height: i64) -> LambdaElem {
    LambdaElem {
        xw: so_element(rng, &t.w.gram, height),
        w: (0..t.m()).map(|_| rational(rng, height)).collect(),
        mu: (0..t.r).map(|_| rational(rng, height)).collect(),
    }
}

/// exp of a random element of Lie(N).
pub fn unipotent(rng: &mut ChaCha8Rng, t: &GgpTriple, height: i64) -> Mat {
    let d = t.d();
    n_basis(t)
        .iter()
        .fold(Mat::zeros(d, d), |acc, b| &acc + &b.scale(&small_int(rng, height)))
        .exp_nilpotent()
}

/// A triple whose entries are fields over k with distinct eigenvalue squares, plus
/// `split` hyperbolic planes.
pub fn class_triple(rng: &mut ChaCha8Rng, k: LocalField, fields: usize, split: usize, height: i64) -> ClassTriple {
    let nonsq: Vec<Q> = square_class_reps(k)
        .into_iter()
        .filter(|b| !is_square(k, b).unwrap_or(true))
        .collect();
    loop {
        let mut entries = Vec::new();
        for _ in 0..fields {
            let b = nonsq[rng.gen_range(0..nonsq.len())].clone();
            let y = nonzero_rational(rng, height);
            let c = nonzero_rational(rng, height);
            entries.push(TripleEntry::new(k, &b, &y, &c).expect("nonzero data"));
        }
        let sp: Vec<Q> = (0..split).map(|_| nonzero_rational(rng, height)).collect();
        let t = ClassTriple {
            field: k,
            entries,
            split: sp,
        };
        if t.validate().is_ok() && t.eigen_squares().iter().all(|x| !x.is_zero()) {
            return t;
        }
    }
}

/// One of the fields used by the verification suites: R, Q_2, Q_3, Q_5, Q_7.
pub fn field_from_code(code: i64) -> LocalField {
    match code.rem_euclid(5) {
        0 => LocalField::Real,
        1 => LocalField::Padic(2),
        2 => LocalField::Padic(3),
        3 => LocalField::Padic(5),
        _ => LocalField::Padic(7),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soalg::is_skew;

    #[test]
    fn generators_are_deterministic() {
        let a = so_element(&mut rng(9), &Mat::diag(&[q(1), q(2), q(3)]), 3);
        let b = so_element(&mut rng(9), &Mat::diag(&[q(1), q(2), q(3)]), 3);
        assert_eq!(a, b);
        assert!(is_skew(&Mat::diag(&[q(1), q(2), q(3)]), &a));
        let mut r = rng(4);
        let t = ggp_triple(&mut r, LocalField::Padic(3), 3, 2, 4);
        assert_eq!(t.d(), 8);
        assert!(crate::slice::is_in_unipotent(&t, &unipotent(&mut r, &t, 2)));
        let ct = class_triple(&mut r, LocalField::Padic(5), 2, 1, 4);
        assert!(ct.validate().is_ok());
        assert_eq!(ct.dim(), 6);
    }
}
