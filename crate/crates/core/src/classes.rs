//! Regular semisimple classes in so(W) for even-dimensional W, parametrized by triples
//! (F_i, a_i, c_i) of quadratic algebras, pure imaginary eigenvalues and norm-form scalars,
//! plus a split part acting on hyperbolic planes.
//!
//! The form on an entry F_i = F(sqrt b_i) is c_i N(x) on the basis {1, sqrt b_i}, i.e. the
//! Gram block diag(c_i, -c_i b_i), and X acts by multiplication by a_i.

use num_traits::{Signed, Zero};

use crate::error::{domain, Error, Result};
use crate::localfield::{canonical_rep, is_square, sgn_char, square_class_reps, LocalField};
use crate::matrix::Mat;
use crate::quadalgebra::{AlgElem, QuadAlgebra};
use crate::quadspace::{embeds, QuadSpace};
use crate::rational::{fmt_q, q, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleEntry {
    pub alg: QuadAlgebra,
    pub a: AlgElem,
    pub c: Q,
}

impl TripleEntry {
    /// Entry F(sqrt b), a = y sqrt b, c.
    pub fn new(field: LocalField, b: &Q, y: &Q, c: &Q) -> Result<TripleEntry> {
        let alg = QuadAlgebra::new(field, b.clone())?;
        if y.is_zero() {
            return domain("eigenvalue parameter y must be nonzero");
        }
        if c.is_zero() {
            return domain("entry scalar c must be nonzero");
        }
        Ok(TripleEntry {
            a: alg.elem(Q::zero(), y.clone()),
            alg,
            c: c.clone(),
        })
    }

    /// a^2, an element of F.
    pub fn a_squared(&self) -> Q {
        (&self.a * &self.a).x
    }
}

/// (I, (a_i), (c_i)) with an optional split part acting by +-s on hyperbolic planes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTriple {
    pub field: LocalField,
    pub entries: Vec<TripleEntry>,
    pub split: Vec<Q>,
}

impl ClassTriple {
    pub fn dim(&self) -> usize {
        2 * (self.entries.len() + self.split.len())
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if e.alg.base != self.field {
                return domain("entry algebra is over a different field");
            }
            if !e.a.is_pure_imaginary() || e.a.is_zero() {
                return domain("a_i must be nonzero with tau(a_i) = -a_i");
            }
            if e.c.is_zero() {
                return domain("c_i must be nonzero");
            }
        }
        let sq = self.eigen_squares();
        for (i, x) in sq.iter().enumerate() {
            if x.is_zero() {
                return domain("zero eigenvalue");
            }
            if sq[..i].contains(x) {
                return domain("repeated eigenvalue");
            }
        }
        Ok(())
    }

    /// a_i^2 for the entries followed by s^2 for the split part.
    pub fn eigen_squares(&self) -> Vec<Q> {
        self.entries
            .iter()
            .map(|e| e.a_squared())
            .chain(self.split.iter().map(|s| s * s))
            .collect()
    }

    /// The eigenvalue representatives a_i, then s as elements of the split algebra F(sqrt 1).
    pub fn eigen_elems(&self) -> Vec<AlgElem> {
        let mut out: Vec<AlgElem> = self.entries.iter().map(|e| e.a.clone()).collect();
        for s in &self.split {
            out.push(AlgElem {
                b: q(1),
                x: Q::zero(),
                y: s.clone(),
            });
        }
        out
    }

    /// Scalar of each block: c_i for entries, 1 for the split planes.
    pub fn block_scalars(&self) -> Vec<Q> {
        self.entries
            .iter()
            .map(|e| e.c.clone())
            .chain(self.split.iter().map(|_| q(1)))
            .collect()
    }
}

/// Blockwise Gram matrix: c_i N on entries, the hyperbolic plane [[0,1],[1,0]] on split planes.
pub fn build_space(t: &ClassTriple) -> Result<QuadSpace> {
    t.validate()?;
    let mut blocks = Vec::new();
    for e in &t.entries {
        blocks.push(QuadSpace::norm_form(&e.alg, &e.c)?.gram);
    }
    for _ in &t.split {
        blocks.push(Mat::from_i64(&[&[0, 1], &[1, 0]]));
    }
    let refs: Vec<&Mat> = blocks.iter().collect();
    QuadSpace::new(t.field, Mat::block_diag(&refs))
}

/// Multiplication by a_i on entries and diag(s, -s) on split planes.
pub fn build_x(t: &ClassTriple) -> Result<Mat> {
    t.validate()?;
    let mut blocks = Vec::new();
    for e in &t.entries {
        blocks.push(e.a.regular_rep());
    }
    for s in &t.split {
        blocks.push(Mat::diag(&[s.clone(), -s.clone()]));
    }
    let refs: Vec<&Mat> = blocks.iter().collect();
    Ok(Mat::block_diag(&refs))
}

/// A matching of blocks: block i of the first triple corresponds to block `map[i]` of the
/// second, with the same eigenvalue square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub map: Vec<usize>,
}

/// Blocks correspond when their eigenvalue squares agree; this is stable conjugacy.
pub fn stable_conjugate_test(t: &ClassTriple, u: &ClassTriple) -> Result<Option<Matching>> {
    t.validate()?;
    u.validate()?;
    if t.field != u.field || t.dim() != u.dim() {
        return Ok(None);
    }
    let (a, b) = (t.eigen_squares(), u.eigen_squares());
    let mut map = Vec::with_capacity(a.len());
    for x in &a {
        match b.iter().position(|y| y == x) {
            Some(j) => map.push(j),
            None => return Ok(None),
        }
    }
    // a field entry can only match a field entry over an isomorphic algebra
    let ne = t.entries.len();
    for (i, &j) in map.iter().enumerate() {
        let fa = i < ne && t.entries[i].alg.is_field();
        let fb = j < u.entries.len() && u.entries[j].alg.is_field();
        if fa != fb {
            return Ok(None);
        }
    }
    Ok(Some(Matching { map }))
}

/// Rational conjugacy inside a stable class: c_i / c'_{phi(i)} is a norm from every field F_i.
pub fn rational_conjugate_test(t: &ClassTriple, u: &ClassTriple) -> Result<bool> {
    let m = stable_conjugate_test(t, u)?
        .ok_or_else(|| Error::Domain("triples are not stably conjugate".into()))?;
    let (ct, cu) = (t.block_scalars(), u.block_scalars());
    for (i, e) in t.entries.iter().enumerate() {
        if !e.alg.is_field() {
            continue;
        }
        let j = m.map[i];
        if e.alg.sgn(&(&ct[i] / &cu[j]))? != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Data for the pair X^+, X^- acting on F_1 + F_2 + split part.
///
/// `disc` is None for the split target space (eta = 1), or Some(b_E) for the quasi-split
/// target whose anisotropic kernel is eta N_E (Gram diag(eta, -eta b_E)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XpmConfig {
    pub field: LocalField,
    pub b1: Q,
    pub y1: Q,
    pub b2: Q,
    pub y2: Q,
    pub eta: Q,
    pub disc: Option<Q>,
    pub split: Vec<Q>,
}

impl XpmConfig {
    pub fn a1(&self) -> AlgElem {
        AlgElem {
            b: self.b1.clone(),
            x: Q::zero(),
            y: self.y1.clone(),
        }
    }

    pub fn a2(&self) -> AlgElem {
        AlgElem {
            b: self.b2.clone(),
            x: Q::zero(),
            y: self.y2.clone(),
        }
    }

    pub fn f1(&self) -> QuadAlgebra {
        QuadAlgebra {
            base: self.field,
            b: self.b1.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        4 + 2 * self.split.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.field;
        if self.y1.is_zero() || self.y2.is_zero() || self.eta.is_zero() {
            return domain("y1, y2 and eta must be nonzero");
        }
        for b in [&self.b1, &self.b2] {
            if b.is_zero() || is_square(k, b)? {
                return domain("F_1 and F_2 must be quadratic field extensions");
            }
        }
        let n1 = self.a1().norm();
        let n2 = self.a2().norm();
        if n1 == n2 {
            return domain("a_1 = +-a_2: eigenvalues collide");
        }
        match &self.disc {
            None => {
                if !is_square(k, &(&self.b1 / &self.b2))? {
                    return domain("split target needs F_1 isomorphic to F_2");
                }
            }
            Some(be) => {
                if be.is_zero() || is_square(k, be)? {
                    return domain("quasi-split target needs a field E");
                }
                if !is_square(k, &(&(&self.b1 * &self.b2) / be))? {
                    return domain("sgn_F1 sgn_F2 must equal sgn_E");
                }
            }
        }
        Ok(())
    }

    /// The target space: H^{n} (split), or the kernel eta N_E plus hyperbolic planes.
    pub fn target_space(&self) -> Result<QuadSpace> {
        let n = self.dim() / 2;
        match &self.disc {
            None => Ok(QuadSpace::hyperbolic(self.field, n)),
            Some(be) => {
                let e = QuadAlgebra::new(self.field, be.clone())?;
                let k = QuadSpace::norm_form(&e, &self.eta)?;
                let h = QuadSpace::hyperbolic(self.field, n - 1);
                QuadSpace::direct_sum(&[&k, &h])
            }
        }
    }

    /// sgn_E(2 eta c N(a_1)) = 1; vacuous in the split case.
    pub fn compatible(&self, c: &Q) -> Result<bool> {
        match &self.disc {
            None => Ok(true),
            Some(be) => Ok(sgn_char(self.field, be, &(q(2) * &self.eta * c * self.a1().norm()))? == 1),
        }
    }

    /// sgn_{F1}(2 eta c (N(a_1) - N(a_2))), the sign that labels c.
    pub fn zeta_of(&self, c: &Q) -> Result<i8> {
        let diff = self.a1().norm() - self.a2().norm();
        sgn_char(self.field, &self.b1, &(q(2) * &self.eta * c * diff))
    }

    /// The smallest square-class representative c with the given label and compatibility.
    pub fn c_for(&self, zeta: i8) -> Result<Q> {
        self.validate()?;
        let mut reps = square_class_reps(self.field);
        reps.sort_by(|a, b| a.abs().cmp(&b.abs()).then(b.cmp(a)));
        for c in reps {
            if self.compatible(&c)? && self.zeta_of(&c)? == zeta {
                return Ok(c);
            }
        }
        domain(format!("no scalar c with label {zeta}"))
    }
}

/// X^zeta: entries (F_1, a_1, 2c), (F_2, a_2, -2c) and the split part, where c carries label
/// zeta. The built space is checked against the target space.
pub fn build_xpm(cfg: &XpmConfig, zeta: i8) -> Result<(Mat, ClassTriple, QuadSpace)> {
    let c = cfg.c_for(zeta)?;
    let c2 = q(2) * &c;
    let t = ClassTriple {
        field: cfg.field,
        entries: vec![
            TripleEntry::new(cfg.field, &cfg.b1, &cfg.y1, &c2)?,
            TripleEntry::new(cfg.field, &cfg.b2, &cfg.y2, &-c2.clone())?,
        ],
        split: cfg.split.clone(),
    };
    let space = build_space(&t)?;
    let target = cfg.target_space()?;
    if !space.is_isomorphic(&target) {
        return domain(format!(
            "built space {:?} does not match the target {:?}",
            space.invariants(),
            target.invariants()
        ));
    }
    Ok((build_x(&t)?, t, space))
}

/// Deterministic X^+- families over `field`: for each F_1 class and each class of b_2/b_1,
/// up to `per_pair` choices of (eta, y_2) for which both X^+ and X^- exist. The split part
/// has `extra` hyperbolic planes.
pub fn xpm_families(field: LocalField, per_pair: usize, extra: usize) -> Vec<XpmConfig> {
    let reps = square_class_reps(field);
    let mut out = Vec::new();
    for b1 in reps.iter().filter(|b| !is_square(field, b).unwrap_or(true)) {
        for s in &reps {
            let b2 = b1 * s;
            if is_square(field, &b2).unwrap_or(true) {
                continue;
            }
            let split_target = is_square(field, s).unwrap_or(false);
            let disc = if split_target {
                None
            } else {
                Some(canonical_rep(field, &(b1 * &b2)).expect("nonzero"))
            };
            let mut found = 0;
            'search: for eta in &reps {
                for y2 in [q(2), q(3), q(1)] {
                    let cfg = XpmConfig {
                        field,
                        b1: b1.clone(),
                        y1: q(1),
                        b2: b2.clone(),
                        y2,
                        eta: eta.clone(),
                        disc: disc.clone(),
                        split: (0..extra).map(|i| q(i as i64 + 1)).collect(),
                    };
                    if build_xpm(&cfg, 1).is_ok() && build_xpm(&cfg, -1).is_ok() {
                        out.push(cfg);
                        found += 1;
                        if found == per_pair {
                            break 'search;
                        }
                        continue 'search;
                    }
                }
            }
        }
    }
    out
}

/// Rationals n/d with 1 <= n, d <= bound in lowest terms, increasing.
pub fn bounded_positive(bound: i64) -> Vec<Q> {
    let mut out: Vec<Q> = Vec::new();
    for n in 1..=bound {
        for d in 1..=bound {
            let x = Q::new(n.into(), d.into());
            if !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out.sort();
    out
}

/// Triples with all entries fields drawn from `disc_set`, y of bounded height, whose space
/// is isomorphic to W, up to rational conjugacy.
pub fn enumerate_gamma_support(w: &QuadSpace, disc_set: &[Q], bound: i64) -> Result<Vec<ClassTriple>> {
    let k = w.field;
    let m = w.dim();
    if m % 2 == 1 {
        return domain("only even-dimensional spaces are parametrized");
    }
    let fields: Vec<&Q> = disc_set
        .iter()
        .filter(|b| !b.is_zero() && !is_square(k, b).unwrap_or(true))
        .collect();
    let ys = bounded_positive(bound);
    let reps = square_class_reps(k);
    let mut atoms: Vec<TripleEntry> = Vec::new();
    for b in &fields {
        let alg = QuadAlgebra::new(k, (*b).clone())?;
        // c modulo norms: one representative per norm class
        let mut cs: Vec<Q> = Vec::new();
        for c in &reps {
            if !cs.iter().any(|x| alg.sgn(&(c / x)).unwrap_or(-1) == 1) {
                cs.push(c.clone());
            }
        }
        for y in &ys {
            for c in &cs {
                atoms.push(TripleEntry::new(k, b, y, c)?);
            }
        }
    }
    let n = m / 2;
    let mut out: Vec<ClassTriple> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    collect_triples(k, w, &atoms, n, 0, &mut chosen, &mut out)?;
    Ok(out)
}

fn collect_triples(
    k: LocalField,
    w: &QuadSpace,
    atoms: &[TripleEntry],
    need: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<ClassTriple>,
) -> Result<()> {
    let t = ClassTriple {
        field: k,
        entries: chosen.iter().map(|&i| atoms[i].clone()).collect(),
        split: vec![],
    };
    if t.validate().is_err() {
        return Ok(());
    }
    if chosen.len() == need {
        let sp = if need == 0 { QuadSpace::zero(k) } else { build_space(&t)? };
        if sp.is_isomorphic(w) {
            for u in out.iter() {
                if stable_conjugate_test(&t, u)?.is_some() && rational_conjugate_test(&t, u)? {
                    return Ok(());
                }
            }
            out.push(t);
        }
        return Ok(());
    }
    if need > chosen.len() && t.dim() > 0 {
        let partial = build_space(&t)?;
        if !embeds(&partial, w) {
            return Ok(());
        }
    }
    for i in start..atoms.len() {
        chosen.push(i);
        collect_triples(k, w, atoms, need, i + 1, chosen, out)?;
        chosen.pop();
    }
    Ok(())
}

/// Text form used by the CLI and logs.
pub fn describe(t: &ClassTriple) -> String {
    let parts: Vec<String> = t
        .entries
        .iter()
        .map(|e| format!("(b={}, a={}*sqrt(b), c={})", fmt_q(&e.alg.b), fmt_q(&e.a.y), fmt_q(&e.c)))
        .collect();
    let split: Vec<String> = t.split.iter().map(fmt_q).collect();
    format!("{} [{}] split [{}]", t.field, parts.join(", "), split.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::so_with_support;
    use crate::soalg::{is_regular_semisimple, is_skew};

    fn q5() -> LocalField {
        LocalField::Padic(5)
    }

    #[test]
    fn single_entry() {
        let t = ClassTriple {
            field: q5(),
            entries: vec![TripleEntry::new(q5(), &q(5), &q(1), &q(3)).unwrap()],
            split: vec![],
        };
        let sp = build_space(&t).unwrap();
        assert_eq!(sp.gram, Mat::from_i64(&[&[3, 0], &[0, -15]]));
        let x = build_x(&t).unwrap();
        assert!(is_skew(&sp.gram, &x));
        // T^2 + N(a) with N(sqrt 5) = -5
        assert_eq!(x.char_poly(), crate::poly::Poly::from_i64(&[-5, 0, 1]));
    }

    #[test]
    fn split_entry_is_hyperbolic() {
        let t = ClassTriple {
            field: q5(),
            entries: vec![TripleEntry::new(q5(), &q(4), &q(1), &q(1)).unwrap()],
            split: vec![q(3)],
        };
        let sp = build_space(&t).unwrap();
        assert_eq!(sp.witt_index(), 2);
    }

    #[test]
    fn centralizer_dimension() {
        let t = ClassTriple {
            field: q5(),
            entries: vec![
                TripleEntry::new(q5(), &q(5), &q(1), &q(1)).unwrap(),
                TripleEntry::new(q5(), &q(2), &q(1), &q(3)).unwrap(),
            ],
            split: vec![q(7)],
        };
        let sp = build_space(&t).unwrap();
        let x = build_x(&t).unwrap();
        assert!(is_regular_semisimple(&x));
        let all = so_with_support(&sp.gram, |_, _| true);
        let comm: Vec<_> = all.iter().map(|b| crate::matrix::flatten(&x.commutator(b))).collect();
        let rank = Mat::from_cols(&comm).rank();
        assert_eq!(all.len() - rank, 3);
    }

    #[test]
    fn stable_and_rational() {
        let e = |y: i64, c: i64| TripleEntry::new(q5(), &q(5), &q(y), &q(c)).unwrap();
        let t = ClassTriple {
            field: q5(),
            entries: vec![e(1, 1)],
            split: vec![q(2)],
        };
        assert!(stable_conjugate_test(&t, &t).unwrap().is_some());
        assert!(rational_conjugate_test(&t, &t).unwrap());
        // -4 = N(1 + sqrt 5) is a norm
        let u = ClassTriple {
            entries: vec![e(1, -4)],
            ..t.clone()
        };
        assert!(rational_conjugate_test(&t, &u).unwrap());
        let v = ClassTriple {
            entries: vec![e(1, 2)],
            ..t.clone()
        };
        assert!(stable_conjugate_test(&t, &v).unwrap().is_some());
        assert!(!rational_conjugate_test(&t, &v).unwrap());
        let w = ClassTriple {
            entries: vec![e(2, 1)],
            ..t.clone()
        };
        assert!(stable_conjugate_test(&t, &w).unwrap().is_none());
        assert_ne!(build_x(&t).unwrap().char_poly(), build_x(&w).unwrap().char_poly());
    }

    #[test]
    fn xpm_pair() {
        let cfg = XpmConfig {
            field: q5(),
            b1: q(5),
            y1: q(1),
            b2: q(5),
            y2: q(2),
            eta: q(1),
            disc: None,
            split: vec![],
        };
        let (xp, tp, _) = build_xpm(&cfg, 1).unwrap();
        let (xm, tm, _) = build_xpm(&cfg, -1).unwrap();
        assert_eq!(xp.char_poly(), xm.char_poly());
        assert!(stable_conjugate_test(&tp, &tm).unwrap().is_some());
        assert!(!rational_conjugate_test(&tp, &tm).unwrap());
    }

    #[test]
    fn xpm_quasi_split() {
        for (p, b1, b2, be, eta) in [(5u64, 5, 10, 2, 1), (5, 5, 10, 2, 2), (3, 3, -1, -3, 1), (7, 7, 3, 21, -1)] {
            let cfg = XpmConfig {
                field: LocalField::Padic(p),
                b1: q(b1),
                y1: q(1),
                b2: q(b2),
                y2: q(1),
                eta: q(eta),
                disc: Some(q(be)),
                split: vec![q(1)],
            };
            for zeta in [1, -1] {
                let (_, t, sp) = build_xpm(&cfg, zeta).unwrap();
                assert_eq!(cfg.zeta_of(&(&t.entries[0].c / q(2))).unwrap(), zeta);
                assert!(sp.is_quasi_split().is_some());
                assert!(!sp.is_quasi_split().unwrap().is_split(sp.field));
            }
        }
    }

    #[test]
    fn gamma_support_small() {
        let k = LocalField::Real;
        let w = QuadSpace::from_diag(k, &[q(1), q(1)]).unwrap();
        let ts = enumerate_gamma_support(&w, &[q(-1)], 1).unwrap();
        assert_eq!(ts.len(), 1);
        let z = enumerate_gamma_support(&QuadSpace::zero(k), &[q(-1)], 2).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].entries.is_empty());
    }
}
