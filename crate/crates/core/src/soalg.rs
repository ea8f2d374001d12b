//! so(V) as exact matrices: c(v, w), the element Xi, regularity tests, and regular
//! nilpotent orbits with their square-class labels.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::localfield::{canonical_rep, hilbert, square_class_reps, LocalField};
use crate::matrix::{Mat, Vector};
use crate::poly::Poly;
use crate::quadspace::{GgpTriple, QuadSpace, QuasiSplitWitness};
use crate::rational::{fmt_q, q, Q};

/// X^T G + G X = 0.
pub fn is_skew(gram: &Mat, x: &Mat) -> bool {
    let gx = gram * x;
    (&gx + &gx.transpose()).is_zero()
}

/// Basis of so(V): G^{-1}(E_ij - E_ji), i < j.
pub fn so_basis(gram: &Mat) -> Vec<Mat> {
    let n = gram.rows();
    let gi = gram.inverse().expect("non-degenerate");
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let mut a = Mat::zeros(n, n);
            a[(i, j)] = q(1);
            a[(j, i)] = q(-1);
            out.push(&gi * &a);
        }
    }
    out
}

/// x -> q(v, x) w - q(w, x) v.
pub fn elem_c(space: &QuadSpace, v: &[Q], w: &[Q]) -> Result<Mat> {
    let n = space.dim();
    if v.len() != n || w.len() != n {
        return domain("vector length does not match the space");
    }
    let gv = space.gram.apply(v);
    let gw = space.gram.apply(w);
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = &w[i] * &gv[j] - &v[i] * &gw[j];
        }
    }
    Ok(m)
}

/// Xi z_i = z_{i-1} (1 <= i <= r), Xi z_0 = -nu0 z_{-1}, Xi z_{-i} = -z_{-i-1} (1 <= i < r),
/// Xi(W) = 0.
pub fn xi_element(t: &GgpTriple) -> Mat {
    let d = t.d();
    let r = t.r as i64;
    let mut x = Mat::zeros(d, d);
    for i in 1..=r {
        x[(t.z(i - 1), t.z(i))] = q(1);
    }
    if r >= 1 {
        x[(t.z(-1), t.z(0))] = -t.nu0.clone();
    }
    for i in 1..r {
        x[(t.z(-i - 1), t.z(-i))] = q(-1);
    }
    x
}

pub fn char_poly(x: &Mat) -> Poly {
    x.char_poly()
}

/// Squarefree characteristic polynomial, and no zero eigenvalue in even dimension.
pub fn is_regular_semisimple(x: &Mat) -> bool {
    let p = x.char_poly();
    if !p.is_squarefree() {
        return false;
    }
    x.rows() % 2 == 1 || !p.coeff(0).is_zero()
}

/// Pfaffian of an antisymmetric matrix by congruence elimination.
pub fn pfaffian(a: &Mat) -> Q {
    let n = a.rows();
    if n % 2 == 1 {
        return Q::zero();
    }
    let mut m = a.clone();
    let mut pf = q(1);
    let mut k = 0;
    while k < n {
        let Some(j) = (k + 1..n).find(|&j| !m[(k, j)].is_zero()) else {
            return Q::zero();
        };
        if j != k + 1 {
            swap_sym(&mut m, k + 1, j);
            pf = -pf;
        }
        let piv = m[(k, k + 1)].clone();
        pf *= &piv;
        for i in k + 2..n {
            let c = &m[(k, i)] / &piv;
            if !c.is_zero() {
                add_sym(&mut m, i, k + 1, &-c);
            }
            let e = &m[(k + 1, i)] / &m[(k + 1, k)];
            if !e.is_zero() {
                add_sym(&mut m, i, k, &-e);
            }
        }
        k += 2;
    }
    pf
}

fn swap_sym(m: &mut Mat, a: usize, b: usize) {
    let n = m.rows();
    for j in 0..n {
        let t = m[(a, j)].clone();
        m[(a, j)] = m[(b, j)].clone();
        m[(b, j)] = t;
    }
    for i in 0..n {
        let t = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = t;
    }
}

/// row_i += f row_j, col_i += f col_j.
fn add_sym(m: &mut Mat, i: usize, j: usize, f: &Q) {
    let n = m.rows();
    for c in 0..n {
        let v = &m[(i, c)] + f * &m[(j, c)];
        m[(i, c)] = v;
    }
    for r in 0..n {
        let v = &m[(r, i)] + f * &m[(r, j)];
        m[(r, i)] = v;
    }
}

/// Pfaffian of G X, the SO(V)-invariant square root of det(G) det(X).
pub fn pfaffian_of(gram: &Mat, x: &Mat) -> Q {
    pfaffian(&(gram * x))
}

/// Solves for the entries at `free` positions so that X is in so(G), with the entries in
/// `fixed` prescribed and all others zero.
pub fn skew_complete(gram: &Mat, fixed: &[((usize, usize), Q)], free: &[(usize, usize)]) -> Option<Mat> {
    let n = gram.rows();
    let mut base = Mat::zeros(n, n);
    for ((i, j), v) in fixed {
        base[(*i, *j)] = v.clone();
    }
    let s = |m: &Mat| {
        let gm = gram * m;
        let sym = &gm + &gm.transpose();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                out.push(sym[(i, j)].clone());
            }
        }
        out
    };
    let cols: Vec<Vector> = free
        .iter()
        .map(|&(i, j)| {
            let mut e = Mat::zeros(n, n);
            e[(i, j)] = q(1);
            s(&e)
        })
        .collect();
    let rhs: Vector = s(&base).iter().map(|x| -x.clone()).collect();
    let sol = if cols.is_empty() {
        if rhs.iter().all(|x| x.is_zero()) {
            vec![]
        } else {
            return None;
        }
    } else {
        Mat::from_cols(&cols).solve(&rhs)?
    };
    for (k, &(i, j)) in free.iter().enumerate() {
        base[(i, j)] = sol[k].clone();
    }
    Some(base)
}

/// Cayley transform (1 + A)(1 - A)^{-1}, an element of SO(V) for A in so(V).
pub fn cayley(a: &Mat) -> Option<Mat> {
    let n = a.rows();
    let id = Mat::identity(n);
    let inv = (&id - a).inverse()?;
    Some(&(&id + a) * &inv)
}

/// Block sizes of a nilpotent matrix, largest first; None when not nilpotent.
pub fn jordan_partition(x: &Mat) -> Option<Vec<usize>> {
    let ranks = x.power_ranks();
    let n = x.rows();
    if ranks[n] != 0 {
        return None;
    }
    // number of blocks of size >= k is rank(X^{k-1}) - rank(X^k)
    let mut out = Vec::new();
    for k in (1..=n).rev() {
        let at_least_k = ranks[k - 1] - ranks[k];
        let at_least_k1 = if k < n { ranks[k] - ranks[k + 1] } else { 0 };
        for _ in 0..(at_least_k - at_least_k1) {
            out.push(k);
        }
    }
    Some(out)
}

pub fn regular_partition(d: usize) -> Vec<usize> {
    match d {
        0 => vec![],
        1 => vec![1],
        2 => vec![1, 1],
        _ if d % 2 == 1 => vec![d],
        _ => vec![d - 1, 1],
    }
}

pub fn is_regular_nilpotent(gram: &Mat, x: &Mat) -> bool {
    is_skew(gram, x) && jordan_partition(x).as_deref() == Some(&regular_partition(gram.rows())[..])
}

/// Label of a regular nilpotent orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NilOrbitLabel {
    /// The stable class contains a single orbit.
    Unique,
    /// The value of q on the anisotropic line of the N-stable odd hyperplane, up to squares.
    Nu(Q),
}

impl NilOrbitLabel {
    pub fn text(&self) -> String {
        match self {
            NilOrbitLabel::Unique => "unique".into(),
            NilOrbitLabel::Nu(x) => fmt_q(x),
        }
    }

    pub fn nu(&self) -> Option<&Q> {
        match self {
            NilOrbitLabel::Nu(x) => Some(x),
            NilOrbitLabel::Unique => None,
        }
    }
}

impl Serialize for NilOrbitLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text())
    }
}

fn sign_pow(e: usize) -> Q {
    if e.is_multiple_of(2) {
        q(1)
    } else {
        q(-1)
    }
}

/// For even d >= 4, V = D + W' with D an anisotropic line in ker N and W' = D^perp the
/// N-stable odd split hyperplane; returns the class of q on the anisotropic line of W'.
pub fn classify_regular_nilpotent(space: &QuadSpace, n: &Mat) -> Result<NilOrbitLabel> {
    let d = space.dim();
    if !is_regular_nilpotent(&space.gram, n) {
        return domain("not a regular nilpotent element of so(V)");
    }
    if d % 2 == 1 || d <= 2 {
        return Ok(NilOrbitLabel::Unique);
    }
    let h = d / 2;
    let top = n.pow(d - 2);
    let ell = (0..d)
        .map(|j| top.col(j))
        .find(|c| c.iter().any(|x| !x.is_zero()))
        .ok_or_else(|| Error::Internal("N^(d-2) vanishes".into()))?;
    let kernel = n.nullspace();
    let v = kernel
        .iter()
        .find(|k| Mat::from_cols(&[ell.clone(), (*k).clone()]).rank() == 2)
        .ok_or_else(|| Error::Internal("kernel of N is a line".into()))?;
    let delta = space.norm(v);
    if delta.is_zero() {
        return Err(Error::Internal("kernel complement is isotropic".into()));
    }
    // det(W') = (-1)^(h-1) nu and det V = delta * det W'
    let nu = sign_pow(h - 1) * space.det() / delta;
    Ok(NilOrbitLabel::Nu(canonical_rep(space.field, &nu)?))
}

/// A regular nilpotent orbit with a representative in a model space isometric to V.
#[derive(Clone, Debug)]
pub struct NilOrbit {
    pub label: NilOrbitLabel,
    pub model: QuadSpace,
    pub rep: Mat,
}

/// Split odd space H^k + <nu> on the chain basis x_1..x_{2k+1}, with q(x_j, x_{2k+2-j}) = 1
/// off the centre and q(x_{k+1}, x_{k+1}) = nu, and its regular nilpotent x_{j+1} -> s_j x_j.
pub fn split_odd_chain(field: LocalField, k: usize, nu: &Q) -> (QuadSpace, Mat) {
    let n = 2 * k + 1;
    let mut g = Mat::zeros(n, n);
    for j in 0..n {
        if j == k {
            g[(j, j)] = nu.clone();
        } else {
            g[(j, n - 1 - j)] = q(1);
        }
    }
    let fixed: Vec<((usize, usize), Q)> = (0..k).map(|j| ((j, j + 1), q(1))).collect();
    let free: Vec<(usize, usize)> = (k..n - 1).map(|j| (j, j + 1)).collect();
    let x = skew_complete(&g, &fixed, &free).expect("chain nilpotent exists");
    (QuadSpace { field, gram: g }, x)
}

pub fn enumerate_nilreg(space: &QuadSpace) -> Vec<NilOrbit> {
    let k = space.field;
    let d = space.dim();
    let Some(wit) = space.is_quasi_split() else {
        return vec![];
    };
    if d <= 2 {
        return vec![NilOrbit {
            label: NilOrbitLabel::Unique,
            model: space.clone(),
            rep: Mat::zeros(d, d),
        }];
    }
    if d % 2 == 1 {
        let nu = match &wit {
            QuasiSplitWitness::Odd { nu, .. } => nu.clone(),
            _ => unreachable!("odd dimension"),
        };
        let (model, rep) = split_odd_chain(k, (d - 1) / 2, &nu);
        return vec![NilOrbit {
            label: NilOrbitLabel::Unique,
            model,
            rep,
        }];
    }
    let (b, c) = match &wit {
        QuasiSplitWitness::Even { b, c, .. } => (b.clone(), c.clone()),
        _ => unreachable!("even dimension"),
    };
    let h = d / 2;
    let mut out = Vec::new();
    for nu in square_class_reps(k) {
        // nu must lie in c N_E
        if crate::localfield::sgn_char(k, &b, &(&nu / &c)).expect("nonzero") != 1 {
            continue;
        }
        let delta = sign_pow(h - 1) * space.det() / &nu;
        let (wprime, chain) = split_odd_chain(k, h - 1, &nu);
        let line = QuadSpace {
            field: k,
            gram: Mat::diag(&[delta]),
        };
        let model = QuadSpace::direct_sum(&[&wprime, &line]).expect("same field");
        debug_assert!(model.is_isomorphic(space), "model must be isometric to V");
        let rep = Mat::block_diag(&[&chain, &Mat::zeros(1, 1)]);
        out.push(NilOrbit {
            label: NilOrbitLabel::Nu(nu),
            model,
            rep,
        });
    }
    out
}

/// The set N^V of admissible labels (canonical representatives).
pub fn nil_labels(space: &QuadSpace) -> Vec<Q> {
    enumerate_nilreg(space)
        .into_iter()
        .filter_map(|o| o.label.nu().cloned())
        .collect()
}

/// (a, b) at the field, re-exported for label computations.
pub fn hilbert_sign(k: LocalField, a: &Q, b: &Q) -> i8 {
    hilbert(k, a, b).expect("nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadspace::admissible_pair;

    #[test]
    fn c_is_skew_and_antisymmetric() {
        let k = LocalField::Padic(3);
        let v = QuadSpace::from_diag(k, &[q(1), q(2), q(-5)]).unwrap();
        let a = vec![q(1), q(2), q(3)];
        let b = vec![q(0), q(-1), q(4)];
        let c = elem_c(&v, &a, &b).unwrap();
        assert!(is_skew(&v.gram, &c));
        assert!(elem_c(&v, &a, &a).unwrap().is_zero());
        assert_eq!(elem_c(&v, &b, &a).unwrap(), -&c);
    }

    #[test]
    fn xi_shape() {
        let k = LocalField::Real;
        let w = QuadSpace::from_diag(k, &[q(1), q(3)]).unwrap();
        let t0 = admissible_pair(&w, &q(2), 0).unwrap();
        assert!(xi_element(&t0).is_zero());
        for r in 1..4 {
            let t = admissible_pair(&w, &q(-3), r).unwrap();
            let x = xi_element(&t);
            assert!(is_skew(&t.v.gram, &x), "r={r}");
            assert_eq!(x.apply(&t.unit_z(1)), t.unit_z(0));
        }
    }

    #[test]
    fn pfaffian_squares_to_det() {
        let a = Mat::from_i64(&[&[0, 1, 2, 3], &[-1, 0, 4, 5], &[-2, -4, 0, 6], &[-3, -5, -6, 0]]);
        let pf = pfaffian(&a);
        assert_eq!(&pf * &pf, a.det());
        assert_eq!(pf, q(6 - 2 * 5 + 3 * 4));
    }

    #[test]
    fn partitions() {
        let n = Mat::from_i64(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        assert_eq!(jordan_partition(&n), Some(vec![3]));
        assert_eq!(jordan_partition(&Mat::zeros(2, 2)), Some(vec![1, 1]));
        assert_eq!(jordan_partition(&Mat::identity(2)), None);
    }

    #[test]
    fn regular_semisimple_examples() {
        assert!(!is_regular_semisimple(&Mat::zeros(3, 3)));
        let x = Mat::from_i64(&[&[0, 5], &[1, 0]]);
        assert!(is_regular_semisimple(&x));
    }

    #[test]
    fn orbit_counts_and_round_trip() {
        for (k, expect) in [
            (LocalField::Real, 2),
            (LocalField::Padic(3), 4),
            (LocalField::Padic(5), 4),
            (LocalField::Padic(2), 8),
        ] {
            let v = QuadSpace::hyperbolic(k, 2);
            let orbits = enumerate_nilreg(&v);
            assert_eq!(orbits.len(), expect, "{k}");
            for o in &orbits {
                assert!(o.model.is_isomorphic(&v));
                assert_eq!(classify_regular_nilpotent(&o.model, &o.rep).unwrap(), o.label);
            }
            let odd = QuadSpace::direct_sum(&[&v, &QuadSpace::aniso_line(k, &q(1)).unwrap()]).unwrap();
            assert_eq!(enumerate_nilreg(&odd).len(), 1);
        }
    }
}
