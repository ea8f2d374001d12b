//! Named verification suites. Each suite draws integer parameter vectors from the seeded
//! stream and checks one instance per vector; failures are shrunk coordinatewise.

use std::sync::OnceLock;
use std::time::Instant;

use ggp_core::classes::{build_x, build_xpm, rational_conjugate_test, stable_conjugate_test, xpm_families, XpmConfig};
use ggp_core::endoscopy::{
    eta_pin_for, germ_slice_consistency, germ_table, inv_pair, length, pinned_label, r_function, reduced_word,
    weyl_enumerate, Pinning, WeylElem,
};
use ggp_core::gen;
use ggp_core::kostant::{crosscheck_pinnings, germ_kostant_crosscheck, normalize_to_slice, regularity_check, KostantSlice};
use ggp_core::localfield::{bad_primes, hilbert, is_square, sgn_char, square_class_reps, LocalField};
use ggp_core::matrix::{unit, vscale};
use ggp_core::rational::{q, Q};
use ggp_core::slice::{charpoly_identity, h_perp_orthogonal, sigma_dim, slice_conjugate, slice_factorize};
use ggp_core::soalg::{classify_regular_nilpotent, enumerate_nilreg, nil_labels};
use ggp_core::{Mat, QuadSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::RunConfig;

pub type Params = Vec<i64>;

pub struct Suite {
    pub name: &'static str,
    pub about: &'static str,
    /// Instances to run for the given configuration.
    pub count: fn(&RunConfig) -> usize,
    /// Parameters of instance i.
    pub gen: fn(&mut ChaCha8Rng, &RunConfig, usize) -> Params,
    pub check: fn(&[i64]) -> Result<(), String>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Failure {
    pub params: Params,
    pub shrunk: Params,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    pub failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Greedy coordinatewise shrinking towards zero; every accepted step still fails.
pub fn shrink(check: fn(&[i64]) -> Result<(), String>, params: &[i64]) -> (Params, String) {
    let mut cur = params.to_vec();
    let mut msg = match check(&cur) {
        Err(m) => m,
        Ok(()) => return (cur, String::new()),
    };
    let mut budget = 200;
    loop {
        let mut improved = false;
        for i in 0..cur.len() {
            let v = cur[i];
            let mut cands = vec![0, v / 2, v - v.signum()];
            cands.retain(|&c| c.abs() < v.abs());
            cands.dedup();
            for c in cands {
                if budget == 0 {
                    return (cur, msg);
                }
                budget -= 1;
                let mut trial = cur.clone();
                trial[i] = c;
                if let Err(m) = check(&trial) {
                    cur = trial;
                    msg = m;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            return (cur, msg);
        }
    }
}

pub fn run_suite(s: &Suite, cfg: &RunConfig) -> CheckReport {
    let start = Instant::now();
    let mut rng = gen::rng(cfg.seed ^ fnv(s.name));
    let n = (s.count)(cfg);
    let mut failures = Vec::new();
    for i in 0..n {
        let p = (s.gen)(&mut rng, cfg, i);
        if let Err(message) = (s.check)(&p) {
            let (shrunk, _) = shrink(s.check, &p);
            failures.push(Failure {
                params: p,
                shrunk,
                message,
            });
        }
    }
    CheckReport {
        name: s.name.into(),
        instances: n,
        failures,
        wall_ms: cfg.timings.then(|| start.elapsed().as_millis() as u64),
    }
}

/// Stable per-suite seed offset.
fn fnv(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

pub fn registry() -> Vec<Suite> {
    vec![
        Suite {
            name: "hilbert-laws",
            about: "bilinearity, symmetry, Steinberg relation and product formula of Hilbert symbols",
            count: |c| c.samples.max(200),
            gen: gen_hilbert,
            check: check_hilbert,
        },
        Suite {
            name: "charpoly-identity",
            about: "characteristic polynomial of X_V on Lambda equals the closed form",
            count: |c| c.samples.max(100),
            gen: gen_slice_params,
            check: check_charpoly_identity,
        },
        Suite {
            name: "slice-bijection",
            about: "factorization N x Lambda -> Sigma inverts conjugation; dim Sigma by rank",
            count: |c| c.samples.max(100),
            gen: gen_slice_params,
            check: check_slice_bijection,
        },
        Suite {
            name: "weyl-section-signs",
            about: "n(w) e_j = (-1)^{r(j,w)} e_{w(j)}, the length cocycle, reduced-word independence",
            count: |_| 28,
            gen: |_, _, i| if i < 4 { vec![4, i as i64] } else { vec![6, i as i64 - 4] },
            check: check_weyl,
        },
        Suite {
            name: "germ-dichotomy",
            about: "Gamma(X+, O_nu) - Gamma(X-, O_nu) = sgn_F1(nu eta) and inv(X^zeta) = (zeta, zeta)",
            count: |_| criterion_families().len(),
            gen: |_, _, i| vec![i as i64],
            check: check_germ_dichotomy,
        },
        Suite {
            name: "germ-orbit-sum",
            about: "sum over regular nilpotent orbits of Gamma(X^zeta, O_nu) equals 1",
            count: |_| criterion_families().len(),
            gen: |_, _, i| vec![i as i64],
            check: check_germ_sum,
        },
        Suite {
            name: "germ-slice-consistency",
            about: "germ at O_{-nu0}, rational slice membership and sgn_F1(-eta nu0) = zeta agree",
            count: |_| criterion_families().len(),
            gen: |_, _, i| vec![i as i64],
            check: check_germ_slice,
        },
        Suite {
            name: "conjugacy-oracle",
            about: "stable conjugacy iff equal characteristic polynomials; rational conjugacy via norms",
            count: |c| c.samples.max(50),
            gen: |rng, _, i| {
                vec![
                    rng.gen_range(0..5),
                    rng.gen_range(1..=2),
                    rng.gen_range(0..=1),
                    rng.gen_range(0..1_000_000),
                    (i % 3) as i64,
                ]
            },
            check: check_conjugacy,
        },
        Suite {
            name: "orbit-counts",
            about: "number of regular nilpotent orbits, label round trip, pinned nilpotent label",
            count: |_| 24,
            gen: |_, _, i| vec![(i / 6) as i64, 3 + (i % 6) as i64],
            check: check_orbits,
        },
        Suite {
            name: "kostant-section",
            about: "regularity on b_inf + X_+ and unique normalization into a + X_+",
            count: |c| c.samples.max(200),
            gen: |rng, _, i| vec![3 + (i % 6) as i64, rng.gen_range(0..1_000_000)],
            check: check_kostant,
        },
        Suite {
            name: "kostant-germ-crosscheck",
            about: "section saturation, germ value, slice membership and the trivial invariant of section points",
            count: |_| kostant_families().len(),
            gen: |_, _, i| vec![i as i64],
            check: check_kostant_cross,
        },
    ]
}

pub fn find(name: &str) -> Option<Suite> {
    registry().into_iter().find(|s| s.name == name)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn frac(n: i64, d: i64) -> Option<Q> {
    (n != 0 && d != 0).then(|| Q::new(n.into(), d.into()))
}

fn gen_hilbert(rng: &mut ChaCha8Rng, cfg: &RunConfig, _: usize) -> Params {
    let h = cfg.height.max(2) * 10;
    let mut v = vec![rng.gen_range(0..5)];
    for _ in 0..3 {
        let n = rng.gen_range(1..=h);
        v.push(if rng.gen_bool(0.5) { n } else { -n });
        v.push(rng.gen_range(1..=h));
    }
    v
}

fn check_hilbert(p: &[i64]) -> Result<(), String> {
    let k = gen::field_from_code(p[0]);
    let (Some(a), Some(b), Some(c)) = (frac(p[1], p[2]), frac(p[3], p[4]), frac(p[5], p[6])) else {
        return Ok(());
    };
    let h = |x: &Q, y: &Q| hilbert(k, x, y).map_err(|e| e.to_string());
    ensure(h(&(&a * &c), &b)? == h(&a, &b)? * h(&c, &b)?, || format!("bilinearity fails at {k}"))?;
    ensure(h(&a, &b)? == h(&b, &a)?, || format!("symmetry fails at {k}"))?;
    if a != q(1) {
        ensure(h(&a, &(q(1) - &a))? == 1, || format!("Steinberg fails at {k}"))?;
    }
    let mut prod = hilbert(LocalField::Real, &a, &b).map_err(|e| e.to_string())?;
    for pr in bad_primes(&a, &b) {
        prod *= hilbert(LocalField::Padic(pr), &a, &b).map_err(|e| e.to_string())?;
    }
    ensure(prod == 1, || "product formula fails".into())
}

fn gen_slice_params(rng: &mut ChaCha8Rng, _: &RunConfig, i: usize) -> Params {
    vec![
        rng.gen_range(0..5),
        1 + (i % 6) as i64,
        ((i / 6) % 4) as i64,
        rng.gen_range(0..1_000_000),
    ]
}

fn slice_instance(p: &[i64]) -> Option<(ggp_core::GgpTriple, ChaCha8Rng)> {
    if p[1] < 1 || p[2] < 0 || p[1] > 8 || p[2] > 4 {
        return None;
    }
    let mut rng = gen::rng(p[3] as u64);
    let t = gen::ggp_triple(&mut rng, gen::field_from_code(p[0]), p[1] as usize, p[2] as usize, 5);
    Some((t, rng))
}

fn check_charpoly_identity(p: &[i64]) -> Result<(), String> {
    let Some((t, mut rng)) = slice_instance(p) else { return Ok(()) };
    let y = gen::lambda_elem(&mut rng, &t, 3);
    let rep = charpoly_identity(&t, &y).map_err(|e| e.to_string())?;
    ensure(rep.residual.is_zero(), || format!("residual {}", rep.residual))
}

fn check_slice_bijection(p: &[i64]) -> Result<(), String> {
    let Some((t, mut rng)) = slice_instance(p) else { return Ok(()) };
    if t.m() > 5 || t.r > 3 {
        return Ok(());
    }
    let y = gen::lambda_elem(&mut rng, &t, 3);
    let n = gen::unipotent(&mut rng, &t, 2);
    let x = slice_conjugate(&t, &n, &y).map_err(|e| e.to_string())?;
    let (n2, y2) = slice_factorize(&t, &x).map_err(|e| e.to_string())?;
    ensure(n2 == n && y2 == y, || "factorization does not invert conjugation".into())?;
    let (m, r) = (t.m(), t.r);
    let expect = m * (m + 1) / 2 + m * r + r * r + r;
    let by_rank = h_perp_orthogonal(&t).len();
    ensure(by_rank == expect && sigma_dim(&t) == expect, || format!("dim Sigma {by_rank}, expected {expect}"))
}

fn check_weyl(p: &[i64]) -> Result<(), String> {
    let d = p[0] as usize;
    if d != 4 && d != 6 {
        return Ok(());
    }
    let all = weyl_enumerate(d).map_err(|e| e.to_string())?;
    let Some(w) = all.get(p[1] as usize) else { return Ok(()) };
    for eta in [q(1), q(-3)] {
        let pin = Pinning::new(d, &eta).map_err(|e| e.to_string())?;
        let n = pin.section_matrix(w);
        for j in 1..=d {
            let sign = if r_function(j, w).is_multiple_of(2) { q(1) } else { q(-1) };
            ensure(n.col(j - 1) == vscale(&unit(d, w.apply(j) - 1), &sign), || {
                format!("sign law fails for w = {:?}, j = {j}", w.perm)
            })?;
        }
        let word = reduced_word(w);
        ensure(word.len() == length(w), || "reduced word has the wrong length".into())?;
        ensure(pin.section_of_word(&word) == n, || "section depends on the word".into())?;
    }
    for t in 1..=d / 2 {
        let w2 = WeylElem::simple(d, t);
        let w12 = w.compose(&w2);
        if length(&w12) != length(w) + 1 {
            continue;
        }
        for j in 1..=d {
            let s = r_function(j, &w12) + r_function(j, &w2) + r_function(w2.apply(j), w);
            ensure(s.is_multiple_of(2), || format!("cocycle fails for w = {:?}, t = {t}, j = {j}", w.perm))?;
        }
    }
    Ok(())
}

/// The X^+- configurations used by the germ suites: up to ten per field over R, Q_3, Q_5,
/// Q_2, spread over the generated list so that split and quasi-split targets both occur.
pub fn criterion_families() -> &'static [XpmConfig] {
    static FAMILIES: OnceLock<Vec<XpmConfig>> = OnceLock::new();
    FAMILIES.get_or_init(|| {
        let mut out = Vec::new();
        for k in [LocalField::Real, LocalField::Padic(3), LocalField::Padic(5), LocalField::Padic(2)] {
            let all = xpm_families(k, 1, 0);
            let step = all.len().div_ceil(10).max(1);
            out.extend(all.into_iter().step_by(step));
        }
        out
    })
}

/// Split-target families paired with every section pinning.
pub fn kostant_families() -> &'static [(XpmConfig, Q)] {
    static FAMILIES: OnceLock<Vec<(XpmConfig, Q)>> = OnceLock::new();
    FAMILIES.get_or_init(|| {
        criterion_families()
            .iter()
            .filter(|c| c.disc.is_none())
            .flat_map(|c| crosscheck_pinnings(c).into_iter().map(move |e| (c.clone(), e)))
            .collect()
    })
}

fn family(p: &[i64]) -> Option<&'static XpmConfig> {
    usize::try_from(p[0]).ok().and_then(|i| criterion_families().get(i))
}

fn check_germ_dichotomy(p: &[i64]) -> Result<(), String> {
    let Some(cfg) = family(p) else { return Ok(()) };
    let tab = germ_table(cfg).map_err(|e| e.to_string())?;
    for (zeta, inv) in &tab.inv {
        ensure(inv.iter().all(|s| s == zeta), || format!("inv(X^{zeta}) = {inv:?}"))?;
    }
    for nu in &tab.labels {
        let plus = tab.gamma(1, nu).unwrap_or(0) as i8;
        let minus = tab.gamma(-1, nu).unwrap_or(0) as i8;
        let s = sgn_char(cfg.field, &cfg.b1, &(nu * &cfg.eta)).map_err(|e| e.to_string())?;
        ensure(plus - minus == s, || format!("nu = {nu}: {plus} - {minus} != {s}"))?;
    }
    Ok(())
}

fn check_germ_sum(p: &[i64]) -> Result<(), String> {
    let Some(cfg) = family(p) else { return Ok(()) };
    let tab = germ_table(cfg).map_err(|e| e.to_string())?;
    for zeta in [1i8, -1] {
        let total = tab.total(zeta);
        ensure(total == 1, || {
            format!("{}: sum over {} orbits is {total} for zeta = {zeta}", cfg.field, tab.labels.len())
        })?;
    }
    Ok(())
}

fn check_germ_slice(p: &[i64]) -> Result<(), String> {
    let Some(cfg) = family(p) else { return Ok(()) };
    let (_, _, w) = build_xpm(cfg, 1).map_err(|e| e.to_string())?;
    let mut used = 0;
    for nu in nil_labels(&w) {
        let nu0 = -nu;
        let rows = match germ_slice_consistency(cfg, &nu0, 1) {
            Ok(r) => r,
            Err(ggp_core::Error::Domain(_)) => continue,
            Err(e) => return Err(e.to_string()),
        };
        used += 1;
        for row in &rows {
            ensure(row.agrees(), || format!("nu0 = {nu0}: {row:?}"))?;
        }
        ensure(rows.iter().filter(|r| r.member).count() == 1, || format!("nu0 = {nu0}: not exactly one zeta"))?;
    }
    ensure(used > 0, || "no admissible nu0".into())
}

fn check_conjugacy(p: &[i64]) -> Result<(), String> {
    let k = gen::field_from_code(p[0]);
    let (fields, split) = (p[1].clamp(1, 3) as usize, p[2].clamp(0, 2) as usize);
    let mut rng = gen::rng(p[3] as u64);
    let t = gen::class_triple(&mut rng, k, fields, split, 4);
    let err = |e: ggp_core::Error| e.to_string();
    match p[4].rem_euclid(3) {
        0 | 1 => {
            let mut u = t.clone();
            u.entries.reverse();
            let flip = p[4].rem_euclid(3) == 1;
            for (i, e) in u.entries.iter_mut().enumerate() {
                let factor = if flip && i == 0 {
                    square_class_reps(k)
                        .into_iter()
                        .find(|x| e.alg.sgn(x).ok() == Some(-1))
                        .expect("a field has non-norms")
                } else {
                    e.alg.elem(q(1), q(1)).norm()
                };
                e.c = &e.c * &factor;
            }
            ensure(stable_conjugate_test(&t, &u).map_err(err)?.is_some(), || "stable test misses".into())?;
            ensure(rational_conjugate_test(&t, &u).map_err(err)? != flip, || {
                format!("rational test wrong (non-norm twist: {flip})")
            })
        }
        _ => {
            let u = gen::class_triple(&mut rng, k, fields, split, 4);
            let same = build_x(&t).map_err(err)?.char_poly() == build_x(&u).map_err(err)?.char_poly();
            ensure(stable_conjugate_test(&t, &u).map_err(err)?.is_some() == same, || {
                "stable test disagrees with characteristic polynomials".into()
            })
        }
    }
}

fn split_space(k: LocalField, d: usize) -> QuadSpace {
    let h = QuadSpace::hyperbolic(k, d / 2);
    if d.is_multiple_of(2) {
        h
    } else {
        QuadSpace::direct_sum(&[&h, &QuadSpace::from_diag(k, &[q(1)]).expect("line")]).expect("same field")
    }
}

fn check_orbits(p: &[i64]) -> Result<(), String> {
    let k = match p[0] {
        0 => LocalField::Real,
        1 => LocalField::Padic(3),
        2 => LocalField::Padic(5),
        3 => LocalField::Padic(2),
        _ => return Ok(()),
    };
    let d = p[1] as usize;
    if !(3..=8).contains(&d) {
        return Ok(());
    }
    let v = split_space(k, d);
    let orbits = enumerate_nilreg(&v);
    let expect = if d % 2 == 1 {
        1
    } else {
        match k {
            LocalField::Real => 2,
            LocalField::Padic(2) => 8,
            LocalField::Padic(_) => 4,
        }
    };
    ensure(orbits.len() == expect, || format!("{k}, d = {d}: {} orbits, expected {expect}", orbits.len()))?;
    for o in &orbits {
        let back = classify_regular_nilpotent(&o.model, &o.rep).map_err(|e| e.to_string())?;
        ensure(back == o.label, || format!("label {} classified as {}", o.label.text(), back.text()))?;
    }
    if d.is_multiple_of(2) {
        for eta in square_class_reps(k) {
            let nu = pinned_label(k, d, &eta_pin_for(d, &eta), None).map_err(|e| e.to_string())?;
            ensure(is_square(k, &(&nu / &eta)).unwrap_or(false), || format!("pinned label {nu} for eta = {eta}"))?;
        }
    }
    Ok(())
}

fn check_kostant(p: &[i64]) -> Result<(), String> {
    let d = p[0] as usize;
    if !(3..=8).contains(&d) {
        return Ok(());
    }
    let k = LocalField::Padic(5);
    let s = KostantSlice::build(&split_space(k, d), &q(1)).map_err(|e| e.to_string())?;
    let mut rng = gen::rng(p[1] as u64);
    let z = s
        .borel_basis()
        .iter()
        .fold(s.x_plus.clone(), |acc, b| &acc + &b.scale(&gen::small_int(&mut rng, 2)));
    ensure(regularity_check(&s, &z), || "sample is not regular".into())?;
    let (n, y) = normalize_to_slice(&s, &z).map_err(|e| e.to_string())?;
    let ni = n.inverse().ok_or("n is singular")?;
    ensure(&(&n * &z) * &ni == y, || "Ad(n) Z differs from Y".into())?;
    let u = s
        .nilradical_basis()
        .iter()
        .fold(Mat::zeros(d, d), |acc, b| &acc + &b.scale(&gen::small_int(&mut rng, 1)));
    let m = u.exp_nilpotent();
    let z2 = &(&m * &z) * &(-&u).exp_nilpotent();
    let (n2, y2) = normalize_to_slice(&s, &z2).map_err(|e| e.to_string())?;
    ensure(y2 == y && &n2 * &m == n, || "normalization is not unique".into())
}

fn check_kostant_cross(p: &[i64]) -> Result<(), String> {
    let Some((cfg, eta_pin)) = usize::try_from(p[0]).ok().and_then(|i| kostant_families().get(i)) else {
        return Ok(());
    };
    let rep = germ_kostant_crosscheck(cfg, eta_pin).map_err(|e| e.to_string())?;
    ensure(rep.agrees(), || format!("{rep:?}"))?;
    // the section point's own invariant is trivial under the same pinning
    for zeta in [1i8, -1] {
        let (_, t, _) = build_xpm(cfg, zeta).map_err(|e| e.to_string())?;
        let inv = inv_pair(&t, eta_pin).map_err(|e| e.to_string())?;
        let member = rep.rows.iter().find(|r| r.zeta == zeta).map(|r| r.in_saturation);
        ensure(member == Some(inv.iter().all(|&v| v == 1)), || "saturation differs from trivial invariant".into())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fails_above_ten(p: &[i64]) -> Result<(), String> {
        if p[0] > 10 {
            Err(format!("{} too big", p[0]))
        } else {
            Ok(())
        }
    }

    #[test]
    fn shrinking_keeps_failure() {
        let (s, msg) = shrink(fails_above_ten, &[1000, 77]);
        assert_eq!(s, vec![11, 0]);
        assert!(fails_above_ten(&s).is_err());
        assert_eq!(msg, "11 too big");
        assert_eq!(shrink(fails_above_ten, &[3, 3]).0, vec![3, 3]);
    }

    #[test]
    fn registry_names_unique() {
        let names: Vec<_> = registry().iter().map(|s| s.name).collect();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }

    #[test]
    fn families_cover_fields_and_targets() {
        let f = criterion_families();
        assert!(f.len() >= 20);
        for k in [LocalField::Real, LocalField::Padic(3), LocalField::Padic(5), LocalField::Padic(2)] {
            assert!(f.iter().any(|c| c.field == k));
        }
        assert!(f.iter().any(|c| c.disc.is_some()));
        assert!(f.iter().any(|c| c.disc.is_none()));
    }
}
