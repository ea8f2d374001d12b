//! Non-degenerate quadratic spaces over a local field, their invariants, and admissible pairs.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::localfield::{canonical_rep, hilbert, is_square, square_class_reps, LocalField, SquareClass};
use crate::matrix::{dot, Mat, Vector};
use crate::quadalgebra::QuadAlgebra;
use crate::rational::{fmt_q, height, q, Q};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuadSpace {
    pub field: LocalField,
    pub gram: Mat,
}

/// dim, signed discriminant, and Hasse invariant (finite place) or signature (real place).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceInvariants {
    pub dim: usize,
    pub disc: SquareClass,
    pub hasse: Option<i8>,
    pub signature: Option<(usize, usize)>,
}

impl Serialize for SpaceInvariants {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("dim", &self.dim)?;
        m.serialize_entry("disc", &self.disc.label())?;
        if let Some(h) = self.hasse {
            m.serialize_entry("hasse", &h)?;
        }
        if let Some((p, n)) = self.signature {
            m.serialize_entry("signature", &[p, n])?;
        }
        m.end()
    }
}

/// Shape of a quasi-split space: H^(n-1) + D_nu (odd) or H^(n-1) + (E, c N_E) (even).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuasiSplitWitness {
    Odd { n: usize, nu: Q },
    Even { n: usize, b: Q, c: Q },
    Zero,
}

impl QuasiSplitWitness {
    /// Even witness whose algebra is split.
    pub fn is_split(&self, k: LocalField) -> bool {
        match self {
            QuasiSplitWitness::Even { b, .. } => is_square(k, b).expect("nonzero"),
            _ => true,
        }
    }
}

impl QuadSpace {
    pub fn new(field: LocalField, gram: Mat) -> Result<QuadSpace> {
        if !gram.is_square() {
            return domain("Gram matrix must be square");
        }
        if gram != gram.transpose() {
            return domain("Gram matrix must be symmetric");
        }
        if gram.rows() > 0 && gram.det().is_zero() {
            return domain("Gram matrix is degenerate");
        }
        Ok(QuadSpace { field, gram })
    }

    pub fn zero(field: LocalField) -> QuadSpace {
        QuadSpace {
            field,
            gram: Mat::zeros(0, 0),
        }
    }

    pub fn from_diag(field: LocalField, d: &[Q]) -> Result<QuadSpace> {
        QuadSpace::new(field, Mat::diag(d))
    }

    /// H^n with q(v_i, v_i*) = 1, basis (v_1, v_1*, v_2, v_2*, ...).
    pub fn hyperbolic(field: LocalField, n: usize) -> QuadSpace {
        let mut g = Mat::zeros(2 * n, 2 * n);
        for i in 0..n {
            g[(2 * i, 2 * i + 1)] = q(1);
            g[(2 * i + 1, 2 * i)] = q(1);
        }
        QuadSpace { field, gram: g }
    }

    pub fn aniso_line(field: LocalField, nu: &Q) -> Result<QuadSpace> {
        if nu.is_zero() {
            return domain("line value must be nonzero");
        }
        QuadSpace::from_diag(field, std::slice::from_ref(nu))
    }

    /// c * N_{E/F} on the basis {1, sqrt b}: diag(c, -c b).
    pub fn norm_form(e: &QuadAlgebra, c: &Q) -> Result<QuadSpace> {
        if c.is_zero() {
            return domain("norm form scalar must be nonzero");
        }
        QuadSpace::from_diag(e.base, &[c.clone(), -(c * &e.b)])
    }

    pub fn direct_sum(parts: &[&QuadSpace]) -> Result<QuadSpace> {
        let field = parts
            .first()
            .map(|p| p.field)
            .ok_or_else(|| Error::Domain("empty direct sum".into()))?;
        if parts.iter().any(|p| p.field != field) {
            return domain("direct sum of spaces over different fields");
        }
        let blocks: Vec<&Mat> = parts.iter().map(|p| &p.gram).collect();
        Ok(QuadSpace {
            field,
            gram: Mat::block_diag(&blocks),
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn det(&self) -> Q {
        if self.dim() == 0 {
            return q(1);
        }
        self.gram.det()
    }

    pub fn pair(&self, v: &[Q], w: &[Q]) -> Q {
        dot(v, &self.gram.apply(w))
    }

    pub fn norm(&self, v: &[Q]) -> Q {
        self.pair(v, v)
    }

    /// Symmetric elimination: returns (diagonal, P) with P^T G P = diag. Pivots are chosen
    /// by smallest height among nonzero diagonal entries, ties to the lowest index.
    pub fn diagonalize(&self) -> (Vec<Q>, Mat) {
        let n = self.dim();
        let mut g = self.gram.clone();
        let mut p = Mat::identity(n);
        let mut diag = Vec::with_capacity(n);
        let mut order = Vec::with_capacity(n);
        let mut remaining: Vec<usize> = (0..n).collect();
        while !remaining.is_empty() {
            let pick = remaining
                .iter()
                .copied()
                .filter(|&i| !g[(i, i)].is_zero())
                .min_by(|&a, &b| height(&g[(a, a)]).cmp(&height(&g[(b, b)])).then(a.cmp(&b)));
            let i = match pick {
                Some(i) => i,
                None => {
                    // all remaining diagonal entries vanish: replace e_i by e_i + e_j
                    let (i, j) = remaining
                        .iter()
                        .flat_map(|&i| remaining.iter().map(move |&j| (i, j)))
                        .find(|&(i, j)| i != j && !g[(i, j)].is_zero())
                        .expect("non-degenerate form has a nonzero entry");
                    add_basis_vector(&mut g, &mut p, i, j, &Q::one());
                    i
                }
            };
            let piv = g[(i, i)].clone();
            for &j in &remaining {
                if j == i || g[(i, j)].is_zero() {
                    continue;
                }
                let f = -(&g[(i, j)] / &piv);
                add_basis_vector(&mut g, &mut p, j, i, &f);
            }
            diag.push(piv);
            order.push(i);
            remaining.retain(|&x| x != i);
        }
        let cols: Vec<Vector> = order.iter().map(|&c| p.col(c)).collect();
        (diag, Mat::from_cols(&cols))
    }

    pub fn invariants(&self) -> SpaceInvariants {
        let (d, _) = self.diagonalize();
        invariants_of_diag(self.field, &d)
    }

    pub fn is_isomorphic(&self, other: &QuadSpace) -> bool {
        self.field == other.field && self.invariants() == other.invariants()
    }

    /// Dimension of a maximal isotropic subspace.
    pub fn witt_index(&self) -> usize {
        let (d, _) = self.diagonalize();
        kernel_of_diag(self.field, &d).0
    }

    /// A diagonal form for the anisotropic kernel.
    pub fn anisotropic_kernel(&self) -> Vec<Q> {
        let (d, _) = self.diagonalize();
        kernel_of_diag(self.field, &d).1
    }

    pub fn is_quasi_split(&self) -> Option<QuasiSplitWitness> {
        let n = self.dim();
        if n == 0 {
            return Some(QuasiSplitWitness::Zero);
        }
        let kern = self.anisotropic_kernel();
        if n % 2 == 1 {
            if kern.len() != 1 {
                return None;
            }
            return Some(QuasiSplitWitness::Odd {
                n: n.div_ceil(2),
                nu: canonical_rep(self.field, &kern[0]).expect("nonzero"),
            });
        }
        match kern.len() {
            0 => Some(QuasiSplitWitness::Even {
                n: n / 2,
                b: q(1),
                c: q(1),
            }),
            2 => {
                let det_k = &kern[0] * &kern[1];
                Some(QuasiSplitWitness::Even {
                    n: n / 2,
                    b: canonical_rep(self.field, &-det_k).expect("nonzero"),
                    c: kern[0].clone(),
                })
            }
            _ => None,
        }
    }

    /// Applies a change of basis: gram becomes P^T G P.
    pub fn congruent(&self, p: &Mat) -> Result<QuadSpace> {
        QuadSpace::new(self.field, &(&p.transpose() * &self.gram) * p)
    }

    pub fn gram_strings(&self) -> Vec<Vec<String>> {
        self.gram.to_strings()
    }
}

fn add_basis_vector(g: &mut Mat, p: &mut Mat, target: usize, src: usize, f: &Q) {
    // e_target += f * e_src
    let n = g.rows();
    for k in 0..n {
        let v = &g[(target, k)] + f * &g[(src, k)];
        g[(target, k)] = v;
    }
    for k in 0..n {
        let v = &g[(k, target)] + f * &g[(k, src)];
        g[(k, target)] = v;
    }
    for k in 0..n {
        let v = &p[(k, target)] + f * &p[(k, src)];
        p[(k, target)] = v;
    }
}

pub fn hasse_of_diag(k: LocalField, d: &[Q]) -> i8 {
    let mut h = 1;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            h *= hilbert(k, &d[i], &d[j]).expect("nonzero");
        }
    }
    h
}

pub fn invariants_of_diag(k: LocalField, d: &[Q]) -> SpaceInvariants {
    let n = d.len();
    let det: Q = d.iter().fold(q(1), |a, b| a * b);
    let sign = if (n * n.saturating_sub(1) / 2).is_multiple_of(2) { q(1) } else { q(-1) };
    let disc = SquareClass::new(k, &(det * sign)).expect("nonzero").canonical();
    match k {
        LocalField::Real => {
            let pos = d.iter().filter(|x| x.is_positive()).count();
            SpaceInvariants {
                dim: n,
                disc,
                hasse: None,
                signature: Some((pos, n - pos)),
            }
        }
        LocalField::Padic(_) => SpaceInvariants {
            dim: n,
            disc,
            hasse: Some(hasse_of_diag(k, d)),
            signature: None,
        },
    }
}

/// Isotropy of a p-adic form from (dim, det, Hasse).
fn padic_isotropic(k: LocalField, n: usize, det: &Q, hasse: i8) -> bool {
    match n {
        0 | 1 => false,
        2 => is_square(k, &-det.clone()).expect("nonzero"),
        3 => hilbert(k, &q(-1), &-det.clone()).expect("nonzero") == hasse,
        4 => {
            !is_square(k, det).expect("nonzero")
                || hasse == hilbert(k, &q(-1), &q(-1)).expect("nonzero")
        }
        _ => true,
    }
}

/// (Witt index, diagonal form of the anisotropic kernel).
pub fn kernel_of_diag(k: LocalField, d: &[Q]) -> (usize, Vec<Q>) {
    match k {
        LocalField::Real => {
            let pos = d.iter().filter(|x| x.is_positive()).count();
            let neg = d.len() - pos;
            let w = pos.min(neg);
            let kern = if pos > neg {
                vec![q(1); pos - neg]
            } else {
                vec![q(-1); neg - pos]
            };
            (w, kern)
        }
        LocalField::Padic(_) => {
            let mut n = d.len();
            let mut det: Q = d.iter().fold(q(1), |a, b| a * b);
            let mut hasse = hasse_of_diag(k, d);
            let mut w = 0;
            while padic_isotropic(k, n, &det, hasse) {
                // q = H + q': det q' = -det q, hasse q' = hasse q * (-1, -det q)
                hasse *= hilbert(k, &q(-1), &-det.clone()).expect("nonzero");
                det = -det;
                n -= 2;
                w += 1;
            }
            let kern = form_with(k, n, &det, hasse).expect("kernel invariants are realizable");
            (w, kern)
        }
    }
}

/// A diagonal p-adic form of dimension n <= 4 with the given det class and Hasse invariant.
fn form_with(k: LocalField, n: usize, det: &Q, hasse: i8) -> Option<Vec<Q>> {
    if n == 0 {
        return Some(vec![]);
    }
    let reps = square_class_reps(k);
    let mut idx = vec![0usize; n - 1];
    loop {
        let mut d: Vec<Q> = idx.iter().map(|&i| reps[i].clone()).collect();
        let prod: Q = d.iter().fold(q(1), |a, b| a * b);
        d.push(canonical_rep(k, &(det / prod)).expect("nonzero"));
        if hasse_of_diag(k, &d) == hasse {
            return Some(d);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return None;
            }
            idx[pos] += 1;
            if idx[pos] < reps.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Whether some form of dimension n with det class `det` completes A to a space with the
/// invariants of W.
pub fn embeds(a: &QuadSpace, w: &QuadSpace) -> bool {
    if a.field != w.field || a.dim() > w.dim() {
        return false;
    }
    let k = a.field;
    let (da, _) = a.diagonalize();
    let (dw, _) = w.diagonalize();
    let n = dw.len() - da.len();
    if n == 0 {
        return a.is_isomorphic(w);
    }
    match k {
        LocalField::Real => {
            let pa = da.iter().filter(|x| x.is_positive()).count();
            let pw = dw.iter().filter(|x| x.is_positive()).count();
            pw >= pa && (dw.len() - pw) >= (da.len() - pa)
        }
        LocalField::Padic(_) => {
            let det_a: Q = da.iter().fold(q(1), |x, y| x * y);
            let det_w: Q = dw.iter().fold(q(1), |x, y| x * y);
            let det_u = &det_w / &det_a;
            let reps = square_class_reps(k);
            // brute force over diagonal complements; n is small in practice
            let want = invariants_of_diag(k, &dw);
            let mut idx = vec![0usize; n];
            loop {
                let mut all = da.clone();
                let u: Vec<Q> = idx.iter().map(|&i| reps[i].clone()).collect();
                let pu: Q = u.iter().fold(q(1), |x, y| x * y);
                if is_square(k, &(&pu / &det_u)).expect("nonzero") {
                    all.extend(u);
                    if invariants_of_diag(k, &all) == want {
                        return true;
                    }
                }
                let mut pos = 0;
                loop {
                    if pos == n {
                        return false;
                    }
                    idx[pos] += 1;
                    if idx[pos] < reps.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
        }
    }
}

/// W inside V = W + D + Z, with D = <z_0>, q(z_0, z_0) = nu0, and Z hyperbolic on z_{+-1..+-r}.
///
/// V's basis is ordered (W, z_r, ..., z_1, z_0, z_-1, ..., z_-r).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GgpTriple {
    pub w: QuadSpace,
    pub v: QuadSpace,
    pub r: usize,
    pub nu0: Q,
}

impl GgpTriple {
    pub fn m(&self) -> usize {
        self.w.dim()
    }

    pub fn d(&self) -> usize {
        self.v.dim()
    }

    pub fn field(&self) -> LocalField {
        self.w.field
    }

    /// Index of z_i in V's basis, -r <= i <= r.
    pub fn z(&self, i: i64) -> usize {
        assert!(i.unsigned_abs() as usize <= self.r, "z index out of range");
        (self.m() as i64 + self.r as i64 - i) as usize
    }

    /// Height grading: z_i has height i, W has height 0.
    pub fn height_of(&self, idx: usize) -> i64 {
        if idx < self.m() {
            0
        } else {
            self.r as i64 - (idx - self.m()) as i64
        }
    }

    /// Embeds a vector of W into V.
    pub fn embed_w(&self, w: &[Q]) -> Vector {
        let mut v = vec![Q::zero(); self.d()];
        v[..w.len()].clone_from_slice(w);
        v
    }

    /// Embeds X in so(W) into so(V), acting by zero on D + Z.
    pub fn embed_w_mat(&self, x: &Mat) -> Mat {
        let mut out = Mat::zeros(self.d(), self.d());
        for i in 0..self.m() {
            for j in 0..self.m() {
                out[(i, j)] = x[(i, j)].clone();
            }
        }
        out
    }

    pub fn unit_z(&self, i: i64) -> Vector {
        crate::matrix::unit(self.d(), self.z(i))
    }
}

pub fn admissible_pair(w: &QuadSpace, nu0: &Q, r: usize) -> Result<GgpTriple> {
    if nu0.is_zero() {
        return domain("nu0 must be nonzero");
    }
    let m = w.dim();
    let d = m + 2 * r + 1;
    let mut g = Mat::zeros(d, d);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = w.gram[(i, j)].clone();
        }
    }
    let t = GgpTriple {
        w: w.clone(),
        v: QuadSpace {
            field: w.field,
            gram: Mat::zeros(0, 0),
        },
        r,
        nu0: nu0.clone(),
    };
    for i in 1..=r as i64 {
        let (a, b) = (t.z(i), t.z(-i));
        g[(a, b)] = q(1);
        g[(b, a)] = q(1);
    }
    g[(t.z(0), t.z(0))] = nu0.clone();
    Ok(GgpTriple {
        v: QuadSpace::new(w.field, g)?,
        ..t
    })
}

pub fn fmt_diag(d: &[Q]) -> Vec<String> {
    d.iter().map(fmt_q).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r() -> LocalField {
        LocalField::Real
    }

    #[test]
    fn constructors() {
        let h = QuadSpace::hyperbolic(r(), 1);
        assert_eq!(h.gram, Mat::from_i64(&[&[0, 1], &[1, 0]]));
        let l = QuadSpace::aniso_line(r(), &q(3)).unwrap();
        assert_eq!(l.gram, Mat::from_i64(&[&[3]]));
        let e = QuadAlgebra::new(LocalField::Padic(5), q(5)).unwrap();
        let nf = QuadSpace::norm_form(&e, &q(2)).unwrap();
        assert_eq!(nf.gram, Mat::from_i64(&[&[2, 0], &[0, -10]]));
        assert!(QuadSpace::aniso_line(r(), &q(0)).is_err());
        assert!(QuadSpace::new(r(), Mat::from_i64(&[&[1, 1], &[1, 1]])).is_err());
    }

    #[test]
    fn diagonalization_is_congruence() {
        let g = Mat::from_i64(&[&[0, 1, 2], &[1, 0, 3], &[2, 3, 0]]);
        let v = QuadSpace::new(LocalField::Padic(3), g.clone()).unwrap();
        let (d, p) = v.diagonalize();
        assert_eq!(&(&p.transpose() * &g) * &p, Mat::diag(&d));
    }

    #[test]
    fn isomorphism_examples() {
        let h = QuadSpace::hyperbolic(r(), 1);
        let d = QuadSpace::from_diag(r(), &[q(1), q(-1)]).unwrap();
        assert!(h.is_isomorphic(&d));
        let pos = QuadSpace::from_diag(r(), &[q(1), q(1)]).unwrap();
        assert!(!pos.is_isomorphic(&d));
        let k = LocalField::Padic(5);
        let a = QuadSpace::from_diag(k, &[q(2), q(5)]).unwrap();
        let b = QuadSpace::from_diag(k, &[q(10), q(1)]).unwrap();
        // same det; Hasse (2,5) = -1 vs (10,1) = 1
        assert!(!a.is_isomorphic(&b));
    }

    /// Representation counts mod 25 separate the two binary forms with det 10 over Q5.
    #[test]
    fn binary_forms_oracle_q5() {
        let count = |a: i64, b: i64, t: i64| {
            (0..25i64)
                .flat_map(|x| (0..25i64).map(move |y| (x, y)))
                .filter(|&(x, y)| (a * x * x + b * y * y - t).rem_euclid(25) == 0)
                .count()
        };
        // <2,5> represents 2 mod 25, <10,1> only represents squares among units
        assert!(count(2, 5, 2) > 0);
        assert_eq!(count(10, 1, 2), 0);
    }

    #[test]
    fn quasi_split_examples() {
        let split4 = QuadSpace::from_diag(r(), &[q(1), q(-1), q(1), q(-1)]).unwrap();
        let w = split4.is_quasi_split().unwrap();
        assert!(w.is_split(r()));
        let pos4 = QuadSpace::from_diag(r(), &vec![q(1); 4]).unwrap();
        assert!(pos4.is_quasi_split().is_none());
        let k = LocalField::Padic(5);
        let e = QuadAlgebra::new(k, q(5)).unwrap();
        let v = QuadSpace::direct_sum(&[
            &QuadSpace::hyperbolic(k, 1),
            &QuadSpace::norm_form(&e, &q(1)).unwrap(),
        ])
        .unwrap();
        match v.is_quasi_split().unwrap() {
            QuasiSplitWitness::Even { n, b, c } => {
                assert_eq!(n, 2);
                let found = QuadAlgebra::new(k, b).unwrap();
                assert!(found.isomorphic(&e));
                let model = QuadSpace::direct_sum(&[
                    &QuadSpace::hyperbolic(k, 1),
                    &QuadSpace::norm_form(&found, &c).unwrap(),
                ])
                .unwrap();
                assert!(model.is_isomorphic(&v));
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn admissible_shape() {
        let k = LocalField::Padic(3);
        let w = QuadSpace::from_diag(k, &[q(1), q(2)]).unwrap();
        let t = admissible_pair(&w, &q(5), 2).unwrap();
        assert_eq!(t.d(), 7);
        assert_eq!(t.v.norm(&t.unit_z(0)), q(5));
        assert_eq!(t.v.pair(&t.unit_z(2), &t.unit_z(-2)), q(1));
        assert_eq!(t.v.pair(&t.unit_z(1), &t.unit_z(1)), q(0));
        let t0 = admissible_pair(&QuadSpace::zero(k), &q(1), 0).unwrap();
        assert_eq!(t0.d(), 1);
    }

    #[test]
    fn witt_index_real() {
        let v = QuadSpace::from_diag(r(), &[q(1), q(1), q(-1)]).unwrap();
        assert_eq!(v.witt_index(), 1);
        assert_eq!(v.anisotropic_kernel(), vec![q(1)]);
    }
}
