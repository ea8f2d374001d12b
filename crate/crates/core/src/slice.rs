//! The slice Sigma = Xi + h^perp inside so(W) x so(V), its cross-section Lambda, and the
//! invariants deciding membership in Sigma', H-conjugacy and rational intersection signs.
//!
//! Elements of g are pairs (X_W, X_V). V carries the height grading of `GgpTriple`
//! (z_i has height i, W + D height 0), and the unipotent group N is generated by the
//! strictly height-raising part of so(V).

use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::localfield::{abs_value, LocalField};
use crate::matrix::{coords_in_span, flatten, unit, Mat, Vector};
use crate::poly::{discriminant, rational_roots, Poly};
use crate::quadalgebra::AlgElem;
use crate::quadspace::{GgpTriple, QuadSpace};
use crate::rational::{pow_i, q, Q};
use crate::soalg::{elem_c, is_skew, so_basis, xi_element};

/// An element (X_W, X_V) of so(W) x so(V).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GElem {
    pub xw: Mat,
    pub xv: Mat,
}

/// A point of Sigma, stored as its pair of matrices.
pub type SigmaElem = GElem;

impl GElem {
    pub fn sub(&self, o: &GElem) -> GElem {
        GElem {
            xw: &self.xw - &o.xw,
            xv: &self.xv - &o.xv,
        }
    }

    fn flat(&self) -> Vector {
        let mut v = flatten(&self.xw);
        v.extend(flatten(&self.xv));
        v
    }
}

/// X_V = Xi - X_W + c(z_r, w) + sum_i mu_i c(z_i, z_{i+1}).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaElem {
    pub xw: Mat,
    pub w: Vector,
    pub mu: Vec<Q>,
}

impl LambdaElem {
    pub fn check(&self, t: &GgpTriple) -> Result<()> {
        let m = t.m();
        if self.xw.rows() != m || self.xw.cols() != m || self.w.len() != m || self.mu.len() != t.r {
            return domain("Lambda element has the wrong shape for this triple");
        }
        if !is_skew(&t.w.gram, &self.xw) {
            return domain("X_W is not in so(W)");
        }
        Ok(())
    }

    pub fn xv(&self, t: &GgpTriple) -> Result<Mat> {
        self.check(t)?;
        let r = t.r as i64;
        let mut x = &xi_element(t) - &t.embed_w_mat(&self.xw);
        x = &x + &elem_c(&t.v, &t.unit_z(r), &t.embed_w(&self.w))?;
        for (i, mu) in self.mu.iter().enumerate() {
            let i = i as i64;
            let c = elem_c(&t.v, &t.unit_z(i), &t.unit_z(i + 1))?;
            x = &x + &c.scale(mu);
        }
        Ok(x)
    }

    pub fn to_sigma(&self, t: &GgpTriple) -> Result<SigmaElem> {
        Ok(GElem {
            xw: self.xw.clone(),
            xv: self.xv(t)?,
        })
    }
}

/// Basis of {X in so(gram) : X_ij = 0 unless allowed(i, j)}.
pub fn so_with_support(gram: &Mat, allowed: impl Fn(usize, usize) -> bool) -> Vec<Mat> {
    let n = gram.rows();
    let pos: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| allowed(i, j))
        .collect();
    if pos.is_empty() {
        return vec![];
    }
    let sym_entries = |e: &Mat| {
        let ge = gram * e;
        let s = &ge + &ge.transpose();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(s[(i, j)].clone());
            }
        }
        out
    };
    let cols: Vec<Vector> = pos
        .iter()
        .map(|&(i, j)| {
            let mut e = Mat::zeros(n, n);
            e[(i, j)] = q(1);
            sym_entries(&e)
        })
        .collect();
    Mat::from_cols(&cols)
        .nullspace()
        .into_iter()
        .map(|v| {
            let mut x = Mat::zeros(n, n);
            for (k, &(i, j)) in pos.iter().enumerate() {
                x[(i, j)] = v[k].clone();
            }
            x
        })
        .collect()
}

fn grade_of(t: &GgpTriple, i: usize, j: usize) -> i64 {
    t.height_of(i) - t.height_of(j)
}

/// Basis of n, the strictly height-raising part of so(V); dim = r^2 + r m.
pub fn n_basis(t: &GgpTriple) -> Vec<Mat> {
    so_with_support(&t.v.gram, |i, j| grade_of(t, i, j) > 0)
}

/// Basis of the grade-k piece of so(V).
pub fn grade_basis(t: &GgpTriple, k: i64) -> Vec<Mat> {
    so_with_support(&t.v.gram, |i, j| grade_of(t, i, j) == k)
}

/// Grade-k component of a matrix on V.
pub fn grade_component(t: &GgpTriple, x: &Mat, k: i64) -> Mat {
    let d = t.d();
    let mut out = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if grade_of(t, i, j) == k {
                out[(i, j)] = x[(i, j)].clone();
            }
        }
    }
    out
}

/// B(X, Y) = (tr X_W Y_W + tr X_V Y_V) / 2.
pub fn b_form(a: &GElem, b: &GElem) -> Q {
    ((&a.xw * &b.xw).trace() + (&a.xv * &b.xv).trace()) / q(2)
}

/// h = so(W) (diagonally embedded) + n.
pub fn h_basis(t: &GgpTriple) -> Vec<GElem> {
    let m = t.m();
    let d = t.d();
    let mut out: Vec<GElem> = so_basis(&t.w.gram)
        .into_iter()
        .map(|y| GElem {
            xv: t.embed_w_mat(&y),
            xw: y,
        })
        .collect();
    out.extend(n_basis(t).into_iter().map(|nn| GElem {
        xw: Mat::zeros(m, m),
        xv: nn,
    }));
    debug_assert!(out.iter().all(|e| e.xv.rows() == d));
    out
}

/// Basis of g = so(W) + so(V).
pub fn g_basis(t: &GgpTriple) -> Vec<GElem> {
    let m = t.m();
    let d = t.d();
    let mut out: Vec<GElem> = so_basis(&t.w.gram)
        .into_iter()
        .map(|y| GElem {
            xw: y,
            xv: Mat::zeros(d, d),
        })
        .collect();
    out.extend(so_basis(&t.v.gram).into_iter().map(|z| GElem {
        xw: Mat::zeros(m, m),
        xv: z,
    }));
    out
}

/// h^perp from its explicit shape: X_V = -X_W + c(z_0, w) + T + N with T on the z-lines.
pub fn h_perp_explicit(t: &GgpTriple) -> Result<Vec<GElem>> {
    let m = t.m();
    let d = t.d();
    let zero_w = Mat::zeros(m, m);
    let mut out: Vec<GElem> = so_basis(&t.w.gram)
        .into_iter()
        .map(|y| GElem {
            xv: -&t.embed_w_mat(&y),
            xw: y,
        })
        .collect();
    for k in 0..m {
        out.push(GElem {
            xw: zero_w.clone(),
            xv: elem_c(&t.v, &t.unit_z(0), &unit(d, k))?,
        });
    }
    for i in 1..=t.r as i64 {
        let mut tt = Mat::zeros(d, d);
        tt[(t.z(i), t.z(i))] = q(1);
        tt[(t.z(-i), t.z(-i))] = q(-1);
        out.push(GElem {
            xw: zero_w.clone(),
            xv: tt,
        });
    }
    out.extend(n_basis(t).into_iter().map(|nn| GElem {
        xw: zero_w.clone(),
        xv: nn,
    }));
    Ok(out)
}

/// h^perp as the B-orthogonal of h, computed by a kernel.
pub fn h_perp_orthogonal(t: &GgpTriple) -> Vec<GElem> {
    let g = g_basis(t);
    let h = h_basis(t);
    if h.is_empty() {
        return g;
    }
    let rows: Vec<Vec<Q>> = h.iter().map(|y| g.iter().map(|x| b_form(y, x)).collect()).collect();
    let m = Mat::from_rows(rows);
    m.nullspace()
        .into_iter()
        .map(|v| {
            let mut acc = GElem {
                xw: Mat::zeros(t.m(), t.m()),
                xv: Mat::zeros(t.d(), t.d()),
            };
            for (c, e) in v.iter().zip(&g) {
                if !c.is_zero() {
                    acc.xw = &acc.xw + &e.xw.scale(c);
                    acc.xv = &acc.xv + &e.xv.scale(c);
                }
            }
            acc
        })
        .collect()
}

pub fn sigma_dim(t: &GgpTriple) -> usize {
    let (m, r) = (t.m(), t.r);
    m * (m + 1) / 2 + m * r + r * r + r
}

pub fn xi_pair(t: &GgpTriple) -> GElem {
    GElem {
        xw: Mat::zeros(t.m(), t.m()),
        xv: xi_element(t),
    }
}

/// X is in g and B(X - Xi, h) = 0.
pub fn is_in_sigma(t: &GgpTriple, x: &SigmaElem) -> bool {
    if x.xw.rows() != t.m() || x.xv.rows() != t.d() {
        return false;
    }
    if !is_skew(&t.w.gram, &x.xw) || !is_skew(&t.v.gram, &x.xv) {
        return false;
    }
    let diff = x.sub(&xi_pair(t));
    h_basis(t).iter().all(|y| b_form(&diff, y).is_zero())
}

/// Lambda_0 spanning set: c(z_r, e_k) for the basis of W, then c(z_i, z_{i+1}).
pub fn lambda0_basis(t: &GgpTriple) -> Result<Vec<Mat>> {
    let d = t.d();
    let r = t.r as i64;
    let mut out = Vec::new();
    for k in 0..t.m() {
        out.push(elem_c(&t.v, &t.unit_z(r), &unit(d, k))?);
    }
    for i in 0..r {
        out.push(elem_c(&t.v, &t.unit_z(i), &t.unit_z(i + 1))?);
    }
    Ok(out)
}

/// n is in N: orthogonal and n - 1 strictly height-raising.
pub fn is_in_unipotent(t: &GgpTriple, n: &Mat) -> bool {
    let d = t.d();
    if n.rows() != d || n.cols() != d {
        return false;
    }
    for i in 0..d {
        for j in 0..d {
            let e = if i == j { &n[(i, j)] - Q::one() } else { n[(i, j)].clone() };
            if !e.is_zero() && grade_of(t, i, j) <= 0 {
                return false;
            }
        }
    }
    &(&n.transpose() * &t.v.gram) * n == t.v.gram
}

fn lambda_sum(t: &GgpTriple, x: &Mat) -> Q {
    let gx = &t.v.gram * x;
    (0..t.r as i64).map(|i| gx[(t.z(-i - 1), t.z(i))].clone()).sum()
}

/// lambda(n) = sum_{i<r} q(z_{-i-1}, n z_i).
pub fn lambda_char(t: &GgpTriple, n: &Mat) -> Result<Q> {
    if !is_in_unipotent(t, n) {
        return domain("matrix is not in the unipotent group N");
    }
    Ok(lambda_sum(t, n))
}

/// The differential of lambda on n; equals B(Xi, (0, X)).
pub fn lambda_lie(t: &GgpTriple, x: &Mat) -> Result<Q> {
    let ok = x.rows() == t.d()
        && is_skew(&t.v.gram, x)
        && (0..t.d()).all(|i| (0..t.d()).all(|j| x[(i, j)].is_zero() || grade_of(t, i, j) > 0));
    if !ok {
        return domain("matrix is not in n");
    }
    Ok(lambda_sum(t, x))
}

/// a(s): z_i -> s^i z_i, identity on W + D. Conjugation scales lambda by s.
pub fn scaling_cocharacter(t: &GgpTriple, s: &Q) -> Mat {
    let d = t.d();
    let mut a = Mat::identity(d);
    for i in 0..d {
        a[(i, i)] = pow_i(s, t.height_of(i));
    }
    a
}

/// (X_W, n X_V n^{-1}).
pub fn slice_conjugate(t: &GgpTriple, n: &Mat, y: &LambdaElem) -> Result<SigmaElem> {
    if !is_in_unipotent(t, n) {
        return domain("matrix is not in the unipotent group N");
    }
    let xv = y.xv(t)?;
    let ni = n.inverse().expect("unipotent");
    Ok(GElem {
        xw: y.xw.clone(),
        xv: &(n * &xv) * &ni,
    })
}

/// Writes X in Sigma as n Y n^{-1} with n in N and Y in Lambda.
///
/// Works up the grading: at step k the grade-(k-1) part of X_V - Xi + X_W is cleared down
/// to Lambda_0 by conjugating with exp(y), y of grade k, which changes that grade by [y, Xi].
pub fn slice_factorize(t: &GgpTriple, x: &SigmaElem) -> Result<(Mat, LambdaElem)> {
    if !is_in_sigma(t, x) {
        return domain("element is not in Sigma");
    }
    let d = t.d();
    let xi = xi_element(t);
    let xw_emb = t.embed_w_mat(&x.xw);
    let l0 = lambda0_basis(t)?;
    let mut cur = x.xv.clone();
    let mut acc = Mat::identity(d);
    for k in 1..=(2 * t.r as i64) {
        let g = k - 1;
        let resid = grade_component(t, &(&(&cur - &xi) + &xw_emb), g);
        let ys = grade_basis(t, k);
        let ls: Vec<&Mat> = l0.iter().filter(|l| grade_component(t, l, g) == **l && !l.is_zero()).collect();
        let mut cols: Vec<Vector> = ys.iter().map(|y| flatten(&y.commutator(&xi))).collect();
        cols.extend(ls.iter().map(|l| flatten(&-*l)));
        if cols.is_empty() {
            if !resid.is_zero() {
                return domain("element is not in Sigma");
            }
            continue;
        }
        let a = Mat::from_cols(&cols);
        if a.rank() != cols.len() {
            return Err(Error::Internal(format!("slice elimination is singular at grade {g}")));
        }
        let rhs: Vector = flatten(&resid).into_iter().map(|v| -v).collect();
        let sol = a
            .solve(&rhs)
            .ok_or_else(|| Error::Internal(format!("slice elimination has no solution at grade {g}")))?;
        let mut y = Mat::zeros(d, d);
        for (c, b) in sol.iter().zip(&ys) {
            y = &y + &b.scale(c);
        }
        let e = y.exp_nilpotent();
        let ei = (-&y).exp_nilpotent();
        cur = &(&e * &cur) * &ei;
        acc = &e * &acc;
    }
    let resid = &(&cur - &xi) + &xw_emb;
    let basis: Vec<Vector> = l0.iter().map(flatten).collect();
    let coords = coords_in_span(&basis, &flatten(&resid))
        .ok_or_else(|| Error::Internal("residual after elimination is not in Lambda_0".into()))?;
    let m = t.m();
    let lam = LambdaElem {
        xw: x.xw.clone(),
        w: coords[..m].to_vec(),
        mu: coords[m..].to_vec(),
    };
    let n = acc.inverse().expect("unipotent");
    Ok((n, lam))
}

/// Both sides of the characteristic polynomial identity on Lambda.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub p_xv: Poly,
    pub p_neg_xw: Poly,
    pub closed_form: Poly,
    pub residual: Poly,
}

/// q(w, X_W^j w) for j = 0..m-1.
pub fn krylov_moments(space: &QuadSpace, xw: &Mat, w: &[Q]) -> Vec<Q> {
    let mut out = Vec::with_capacity(space.dim());
    let mut v = w.to_vec();
    for _ in 0..space.dim() {
        out.push(space.pair(w, &v));
        v = xw.apply(&v);
    }
    out
}

fn identity_columns(t: &GgpTriple, p: &Poly) -> (Vec<Poly>, Vec<Poly>) {
    let r = t.r;
    let sgn_r = if r.is_multiple_of(2) { q(-1) } else { q(1) }; // (-1)^(r+1)
    let mut alpha_cols = Vec::new();
    let mut dp = p.clone();
    for j in 0..t.m() {
        dp = dp.shift_down();
        let s = if j % 2 == 0 { q(-1) } else { q(1) }; // (-1)^(j+1)
        alpha_cols.push(dp.scale(&(&sgn_r * &t.nu0 * s)));
    }
    let mut mu_cols = Vec::new();
    for j in 0..r {
        let s = if j % 2 == 0 { q(-1) } else { q(1) };
        let mono = Poly::monomial(2 * r - 1 - 2 * j).scale(&(s * q(2) * &t.nu0));
        mu_cols.push(p * &mono);
    }
    (alpha_cols, mu_cols)
}

/// P_{X_V} = (-1)^{r+1} nu0 sum_j (-1)^{j+1} q(w, X_W^j w) D^{j+1} P_{-X_W}
///         + P_{-X_W} (T^{2r+1} + sum_j (-1)^{j+1} 2 nu0 mu_j T^{2r-1-2j}).
pub fn charpoly_identity(t: &GgpTriple, y: &LambdaElem) -> Result<IdentityReport> {
    let xv = y.xv(t)?;
    let p_xv = xv.char_poly();
    let p = (-&y.xw).char_poly();
    let moments = krylov_moments(&t.w, &y.xw, &y.w);
    let (ac, mc) = identity_columns(t, &p);
    let mut rhs = &p * &Poly::monomial(2 * t.r + 1);
    for (c, a) in ac.iter().zip(&moments) {
        rhs = &rhs + &c.scale(a);
    }
    for (c, mu) in mc.iter().zip(&y.mu) {
        rhs = &rhs + &c.scale(mu);
    }
    Ok(IdentityReport {
        residual: &p_xv - &rhs,
        p_xv,
        p_neg_xw: p,
        closed_form: rhs,
    })
}

/// Inverts the identity: given X_W and a target P_{X_V}, the moments q(w, X_W^j w) and the mu_j.
/// Odd moments vanish for skew X_W and are returned as zero.
pub fn moments_for_charpoly(t: &GgpTriple, xw: &Mat, target: &Poly) -> Result<(Vec<Q>, Vec<Q>)> {
    let p = (-xw).char_poly();
    let (ac, mc) = identity_columns(t, &p);
    let even: Vec<usize> = (0..t.m()).step_by(2).collect();
    let mut cols: Vec<&Poly> = even.iter().map(|&j| &ac[j]).collect();
    cols.extend(mc.iter());
    let rhs = target - &(&p * &Poly::monomial(2 * t.r + 1));
    let len = t.d() + 1;
    let vecs: Vec<Vector> = cols.iter().map(|c| (0..len).map(|i| c.coeff(i)).collect()).collect();
    let target_vec: Vector = (0..len).map(|i| rhs.coeff(i)).collect();
    let sol = coords_in_span(&vecs, &target_vec)
        .ok_or_else(|| Error::Domain("target polynomial is not reachable from this X_W".into()))?;
    let mut alpha = vec![Q::zero(); t.m()];
    for (k, &j) in even.iter().enumerate() {
        alpha[j] = sol[k].clone();
    }
    Ok((alpha, sol[even.len()..].to_vec()))
}

/// Product of all root values of a matrix in so(n), computed from its characteristic
/// polynomial: write P = R(T^2) or T R(T^2); the product is disc(R), times R(0) for odd n.
pub fn root_product(x: &Mat) -> Q {
    let n = x.rows();
    let p = x.char_poly();
    let half = n / 2;
    let off = n % 2;
    let r = Poly::new((0..=half).map(|k| p.coeff(2 * k + off)).collect());
    let disc = discriminant(&r);
    if off == 1 {
        disc * r.coeff(0)
    } else {
        disc
    }
}

/// d^G, Q_0 and Q = Q_0 d^G on Lambda.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QValues {
    pub q0: Q,
    pub dg: Q,
    pub q: Q,
}

/// Gram determinant of w, X_W w, ..., X_W^{m-1} w.
pub fn q0_value(space: &QuadSpace, xw: &Mat, w: &[Q]) -> Q {
    let k = krylov_basis(xw, w, space.dim());
    let g = &(&k.transpose() * &space.gram) * &k;
    if g.rows() == 0 {
        Q::one()
    } else {
        g.det()
    }
}

fn krylov_basis(x: &Mat, v: &[Q], count: usize) -> Mat {
    let mut cols = Vec::with_capacity(count);
    let mut cur = v.to_vec();
    for _ in 0..count {
        cols.push(cur.clone());
        cur = x.apply(&cur);
    }
    if cols.is_empty() {
        return Mat::zeros(v.len(), 0);
    }
    Mat::from_cols(&cols)
}

pub fn q_values(t: &GgpTriple, y: &LambdaElem) -> Result<QValues> {
    let xv = y.xv(t)?;
    let q0 = q0_value(&t.w, &y.xw, &y.w);
    let dg = root_product(&y.xw) * root_product(&xv);
    Ok(QValues { q: &q0 * &dg, q0, dg })
}

/// Rank of z_r, X_V z_r, ..., X_V^{d-1} z_r.
pub fn krylov_rank(t: &GgpTriple, xv: &Mat) -> usize {
    let k = krylov_basis(xv, &t.unit_z(t.r as i64), t.d());
    k.rank()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaPrimeReport {
    pub krylov_full: bool,
    pub q_nonzero: bool,
    pub regular_semisimple: bool,
    pub lambda: LambdaElem,
    pub n: Mat,
}

impl SigmaPrimeReport {
    pub fn member(&self) -> bool {
        self.q_nonzero
    }

    /// The Krylov description and Q != 0 agree on regular semisimple elements.
    pub fn consistent(&self) -> bool {
        self.q_nonzero == (self.krylov_full && self.regular_semisimple)
    }
}

pub fn sigma_prime_membership(t: &GgpTriple, x: &SigmaElem) -> Result<SigmaPrimeReport> {
    let (n, lam) = slice_factorize(t, x)?;
    let xv = lam.xv(t)?;
    let qv = q_values(t, &lam)?;
    Ok(SigmaPrimeReport {
        krylov_full: krylov_rank(t, &xv) == t.d(),
        q_nonzero: !qv.q.is_zero(),
        regular_semisimple: !qv.dg.is_zero(),
        lambda: lam,
        n,
    })
}

/// The element of SO(W) conjugating X to X' inside Lambda', if any.
pub fn h_conjugacy_test(t: &GgpTriple, a: &LambdaElem, b: &LambdaElem) -> Result<Option<Mat>> {
    for y in [a, b] {
        if q_values(t, y)?.q.is_zero() {
            return domain("element is not in Lambda'");
        }
    }
    if a.mu != b.mu || a.xw.char_poly() != b.xw.char_poly() {
        return Ok(None);
    }
    if krylov_moments(&t.w, &a.xw, &a.w) != krylov_moments(&t.w, &b.xw, &b.w) {
        return Ok(None);
    }
    let m = t.m();
    if m == 0 {
        return Ok(Some(Mat::identity(0)));
    }
    let ka = krylov_basis(&a.xw, &a.w, m);
    let kb = krylov_basis(&b.xw, &b.w, m);
    let g = &kb * &ka.inverse().expect("Krylov basis");
    let gi = g.inverse().expect("invertible");
    let ok = &(&g.transpose() * &t.w.gram) * &g == t.w.gram
        && g.det().is_one()
        && &(&g * &a.xw) * &gi == b.xw
        && g.apply(&a.w) == b.w;
    Ok(ok.then_some(g))
}

/// Value q(w_i, w_i) of the W-component along an eigenvalue pair {a, -a} of X_W, read off
/// from P_{X_V}(a) alone: (-1)^r P_{X_V}(a) / (nu0 a P_a(a)) with P_a = P_{X_W} / (T^2 - a^2).
/// `a` lives in the quadratic algebra generated by the eigenvalue; the result lies in F.
pub fn eigen_block_value(r: usize, nu0: &Q, p_xv: &Poly, p_xw: &Poly, a: &AlgElem) -> Result<Q> {
    if a.is_zero() || nu0.is_zero() {
        return domain("eigenvalue and nu0 must be nonzero");
    }
    let a2 = a * a;
    if !a2.in_base() {
        return domain("eigenvalue square must lie in the base field");
    }
    let quad = Poly::new(vec![-a2.x.clone(), Q::zero(), Q::one()]);
    let (pa, rem) = p_xw.div_rem(&quad);
    if !rem.is_zero() {
        return domain("T^2 - a^2 does not divide the characteristic polynomial of X_W");
    }
    let den = (a * &a.eval_poly(&pa)).scale(nu0);
    if den.norm().is_zero() {
        return domain("repeated eigenvalue: the block value is undefined");
    }
    let mut v = &a.eval_poly(p_xv) * &den.inv()?;
    if r % 2 == 1 {
        v = -&v;
    }
    if !v.in_base() {
        return Err(Error::Internal("block value is not in the base field".into()));
    }
    Ok(v.x)
}

/// Per-block outcome of the rational intersection test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSign {
    /// q(w_i, w_i) forced by the characteristic polynomials.
    pub value: Q,
    /// value / c_i, which must be a norm from F_i.
    pub ratio: Q,
    pub sign: i8,
}

/// Outcome of the intersection test for one choice of zeta.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignTestReport {
    pub zeta: i8,
    pub blocks: Vec<BlockSign>,
    pub member: bool,
    /// sgn_{F1}(-eta nu0) == zeta.
    pub predicted: bool,
}

/// Smallest positive integers t with t^2 avoiding the given squares.
pub fn default_split_spectrum(count: usize, avoid_sq: &[Q]) -> Vec<Q> {
    let mut out = Vec::with_capacity(count);
    let mut t = 1i64;
    while out.len() < count {
        if !avoid_sq.contains(&q(t * t)) {
            out.push(q(t));
        }
        t += 1;
    }
    out
}

/// Decides whether (X_W, X_V) with X_W = X^zeta on W and X_V of the given characteristic
/// polynomial meets Sigma'(F), block by block: the W-component along each eigenvalue pair has
/// forced length q(w_i, w_i), which must be c_i times a norm from F_i.
///
/// Without `p_xv` the spectrum of X_V is {0, +-t_k} with the default split t_k, which needs V
/// split, i.e. sgn_E(-eta nu0) = 1.
pub fn sigma_rational_sign_test(
    cfg: &crate::classes::XpmConfig,
    nu0: &Q,
    r: usize,
    zeta: i8,
    p_xv: Option<&Poly>,
) -> Result<SignTestReport> {
    use crate::localfield::sgn_char;
    if nu0.is_zero() {
        return domain("nu0 must be nonzero");
    }
    let (xw, triple, _) = crate::classes::build_xpm(cfg, zeta)?;
    let m = triple.dim();
    let d = m + 2 * r + 1;
    let p_xw = xw.char_poly();
    let target = match p_xv {
        Some(p) => {
            if p.degree() != d || !p.leading().is_one() {
                return domain(format!("P_X_V must be monic of degree {d}"));
            }
            p.clone()
        }
        None => {
            if let Some(be) = &cfg.disc {
                if sgn_char(cfg.field, be, &-(&cfg.eta * nu0))? != 1 {
                    return domain("V is not split (sgn_E(-eta nu0) = -1); pass an explicit P_X_V");
                }
            }
            let ts = default_split_spectrum((d - 1) / 2, &triple.eigen_squares());
            let sq: Vec<Q> = ts.iter().map(|t| t * t).collect();
            &Poly::from_roots_squared(&sq) * &Poly::monomial(1)
        }
    };
    let scalars = triple.block_scalars();
    let mut blocks = Vec::new();
    for (i, a) in triple.eigen_elems().iter().enumerate() {
        let value = eigen_block_value(r, nu0, &target, &p_xw, a)?;
        let ratio = &value / &scalars[i];
        let sign = if value.is_zero() {
            0
        } else if i < triple.entries.len() {
            triple.entries[i].alg.sgn(&ratio)?
        } else {
            1
        };
        blocks.push(BlockSign { value, ratio, sign });
    }
    let member = blocks.iter().all(|b| b.sign == 1);
    let predicted = sgn_char(cfg.field, &cfg.b1, &-(&cfg.eta * nu0))? == zeta;
    Ok(SignTestReport {
        zeta,
        blocks,
        member,
        predicted,
    })
}

/// |det X| on the image of X.
pub fn delta_disc(k: LocalField, x: &Mat) -> Q {
    let n = x.rows();
    let cols: Vec<Vector> = (0..n).map(|j| x.col(j)).collect();
    let mut basis: Vec<Vector> = Vec::new();
    for c in cols {
        let mut trial = basis.clone();
        trial.push(c.clone());
        if Mat::from_cols(&trial).rank() == trial.len() {
            basis = trial;
        }
    }
    if basis.is_empty() {
        return Q::one();
    }
    let imgs: Vec<Vector> = basis
        .iter()
        .map(|v| coords_in_span(&basis, &x.apply(v)).expect("image is X-stable for semisimple X"))
        .collect();
    abs_value(k, &Mat::from_cols(&imgs).det())
}

/// |det(1 - x)| on the image of 1 - x.
pub fn delta_disc_group(k: LocalField, x: &Mat) -> Q {
    let one = Mat::identity(x.rows());
    delta_disc(k, &(&one - x))
}

/// Eigenvectors of a matrix whose spectrum is rational and simple, ordered for an isotropic
/// flag: positive eigenvalues t_1 > t_2 > .., then zero, then -t_h, .., -t_1, so that the
/// flag is self-dual.
fn split_eigenbasis(x: &Mat) -> Option<Mat> {
    let n = x.rows();
    let roots = rational_roots(&x.char_poly());
    if roots.len() != n {
        return None;
    }
    let mut order: Vec<Q> = roots.iter().filter(|s| **s > Q::zero()).cloned().collect();
    order.sort_by(|a, b| b.cmp(a));
    let mut full = order.clone();
    if roots.iter().any(|s| s.is_zero()) {
        full.push(Q::zero());
    }
    full.extend(order.iter().rev().map(|s| -s.clone()));
    if full.len() != n {
        return None;
    }
    let mut cols = Vec::with_capacity(n);
    for s in &full {
        let shifted = x - &Mat::identity(n).scale(s);
        let ker = shifted.nullspace();
        if ker.len() != 1 {
            return None;
        }
        cols.push(ker[0].clone());
    }
    Some(Mat::from_cols(&cols))
}

/// Borel subalgebra of so(gram) stabilizing the flag spanned by the columns of e in order.
pub fn borel_of_flag(gram: &Mat, e: &Mat) -> Vec<Mat> {
    let g2 = &(&e.transpose() * gram) * e;
    let ei = e.inverse().expect("basis");
    so_with_support(&g2, |i, j| i <= j)
        .into_iter()
        .map(|b| &(e * &b) * &ei)
        .collect()
}

/// For X in Lambda' with X_W and X_V split over F, builds the Borel b containing X from the
/// eigen-flags and checks b + h = g as a direct sum.
pub fn borel_transversality_check(t: &GgpTriple, y: &LambdaElem) -> Result<bool> {
    if q_values(t, y)?.q.is_zero() {
        return domain("element is not in Lambda'");
    }
    let xv = y.xv(t)?;
    let ew = split_eigenbasis(&y.xw).ok_or_else(|| Error::Unsupported("X_W is not split over F".into()))?;
    let ev = split_eigenbasis(&xv).ok_or_else(|| Error::Unsupported("X_V is not split over F".into()))?;
    let (m, d) = (t.m(), t.d());
    let mut vecs: Vec<Vector> = Vec::new();
    for b in borel_of_flag(&t.w.gram, &ew) {
        vecs.push(
            GElem {
                xw: b,
                xv: Mat::zeros(d, d),
            }
            .flat(),
        );
    }
    for b in borel_of_flag(&t.v.gram, &ev) {
        vecs.push(
            GElem {
                xw: Mat::zeros(m, m),
                xv: b,
            }
            .flat(),
        );
    }
    vecs.extend(h_basis(t).iter().map(|h| h.flat()));
    let dim_g = m * m.saturating_sub(1) / 2 + d * (d - 1) / 2;
    if vecs.len() != dim_g {
        return Ok(false);
    }
    Ok(Mat::from_cols(&vecs).rank() == dim_g)
}

/// An element of Lambda with X_W = diag(s_1, -s_1, ...) (and 0 for odd m) on W = H^k or
/// H^k + <delta>, and P_{X_V} = prod (T^2 - t_j^2), times T when dim V is odd. The Krylov moments forced by the target
/// are realized by w = sum (e_s + p_s e_{-s}) + z e_0; for odd m this needs z^2 rational.
pub fn split_lambda_instance(t: &GgpTriple, s: &[Q], targets: &[Q]) -> Result<LambdaElem> {
    let m = t.m();
    if s.len() != m / 2 || targets.len() != t.d() / 2 {
        return domain("spectrum sizes do not match dim W and dim V");
    }
    let h = QuadSpace::hyperbolic(t.field(), m / 2);
    for i in 0..2 * (m / 2) {
        for j in 0..2 * (m / 2) {
            if t.w.gram[(i, j)] != h.gram[(i, j)] {
                return domain("W must be H^k or H^k + <delta> in the standard basis");
            }
        }
    }
    let mut xw = Mat::zeros(m, m);
    for (k, sk) in s.iter().enumerate() {
        xw[(2 * k, 2 * k)] = sk.clone();
        xw[(2 * k + 1, 2 * k + 1)] = -sk.clone();
    }
    let mut target = Poly::monomial(t.d() % 2);
    for tj in targets {
        target = &target * &Poly::new(vec![-(tj * tj), Q::zero(), Q::one()]);
    }
    let (alpha, mu) = moments_for_charpoly(t, &xw, &target)?;
    // q(w, X^{2k} w) = sum_s 2 p_s s^{2k} + [k = 0] z^2 delta
    let eqs = m.div_ceil(2);
    let odd = m % 2 == 1;
    let mut rows = Vec::with_capacity(eqs);
    for k in 0..eqs {
        let mut row: Vec<Q> = s.iter().map(|sk| q(2) * crate::rational::pow_i(sk, 2 * k as i64)).collect();
        if odd {
            row.push(if k == 0 { q(1) } else { Q::zero() });
        }
        rows.push(row);
    }
    let rhs: Vector = (0..eqs).map(|k| alpha[2 * k].clone()).collect();
    let sol = Mat::from_rows(rows)
        .solve(&rhs)
        .ok_or_else(|| Error::Domain("eigenvalues of X_W must be distinct and nonzero".into()))?;
    let mut w = vec![Q::zero(); m];
    for k in 0..s.len() {
        w[2 * k] = Q::one();
        w[2 * k + 1] = sol[k].clone();
    }
    if odd {
        let z2 = &sol[s.len()] / &t.w.gram[(m - 1, m - 1)];
        w[m - 1] = crate::rational::sqrt_exact(&z2).ok_or_else(|| Error::Domain("z^2 is not a square".into()))?;
    }
    let y = LambdaElem { xw, w, mu };
    if y.xv(t)?.char_poly() != target {
        return Err(Error::Internal("generated X_V has the wrong characteristic polynomial".into()));
    }
    Ok(y)
}
