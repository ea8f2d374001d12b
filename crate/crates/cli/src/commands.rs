//! Command handlers. Each returns an [`Output`] holding both renderings.

use std::time::Instant;

use anyhow::{bail, Result};
use ggp_core::classes::{build_xpm, describe, XpmConfig};
use ggp_core::endoscopy::{eta_pin_for, germ_table, germ_value, inv_nilpotent, inv_pair};
use ggp_core::gen;
use ggp_core::kostant::{adjoint_quotient_coords, normalize_to_slice, regularity_check, KostantSlice};
use ggp_core::localfield::canonical_rep;
use ggp_core::poly::Poly;
use ggp_core::quadspace::{GgpTriple, QuasiSplitWitness};
use ggp_core::rational::{fmt_q, q};
use ggp_core::slice::{
    charpoly_identity, sigma_prime_membership, sigma_rational_sign_test, slice_conjugate, slice_factorize, LambdaElem,
};
use ggp_core::soalg::{enumerate_nilreg, nil_labels};
use ggp_core::{Mat, QuadSpace, Q};
use serde_json::{json, Value};

use crate::input::SliceInput;
use crate::suites::{find, registry, run_suite, CheckReport};
use crate::{table, Output, RunConfig};

fn qs(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

fn qv(xs: &[Q]) -> Value {
    Value::Array(xs.iter().map(qs).collect())
}

fn mat(m: &Mat) -> Value {
    serde_json::to_value(m).expect("matrices serialize")
}

fn poly(p: &Poly) -> Value {
    json!(p.to_string_coeffs())
}

fn poly_text(p: &Poly) -> String {
    let mut terms = Vec::new();
    for i in (0..=p.degree()).rev() {
        let c = p.coeff(i);
        if c == q(0) {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "T".into(),
            _ => format!("T^{i}"),
        };
        terms.push(match (fmt_q(&c).as_str(), i) {
            ("1", k) if k > 0 => mono,
            ("-1", k) if k > 0 => format!("-{mono}"),
            (s, 0) => s.to_string(),
            (s, _) => format!("{s}*{mono}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ").replace("+ -", "- ")
    }
}

fn mat_text(m: &Mat) -> String {
    let rows: Vec<Vec<String>> = m.to_strings();
    let w = rows.iter().flatten().map(String::len).max().unwrap_or(1);
    rows.iter()
        .map(|r| format!("  [{}]", r.iter().map(|c| format!("{c:>w$}")).collect::<Vec<_>>().join(" ")))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn classify(v: &QuadSpace) -> Output {
    let inv = v.invariants();
    let witness = v.is_quasi_split();
    let shape = match &witness {
        None => json!(null),
        Some(QuasiSplitWitness::Odd { n, nu }) => json!({"kind": "odd", "hyperbolic": n.saturating_sub(1), "nu": qs(nu)}),
        Some(QuasiSplitWitness::Even { n, b, c }) => {
            json!({"kind": "even", "hyperbolic": n.saturating_sub(1), "b": qs(b), "c": qs(c), "split": witness.as_ref().unwrap().is_split(v.field)})
        }
        Some(QuasiSplitWitness::Zero) => json!({"kind": "zero"}),
    };
    let j = json!({
        "command": "classify",
        "field": v.field,
        "invariants": inv,
        "witt_index": v.witt_index(),
        "quasi_split": witness.is_some(),
        "shape": shape,
    });
    let mut rows = vec![
        vec!["field".into(), v.field.to_string()],
        vec!["dim".into(), inv.dim.to_string()],
        vec!["disc".into(), inv.disc.label()],
    ];
    if let Some(h) = inv.hasse {
        rows.push(vec!["hasse".into(), h.to_string()]);
    }
    if let Some((p, n)) = inv.signature {
        rows.push(vec!["signature".into(), format!("({p}, {n})")]);
    }
    rows.push(vec!["witt index".into(), v.witt_index().to_string()]);
    rows.push(vec!["quasi-split".into(), if witness.is_some() { "yes" } else { "no" }.into()]);
    Output::new(j, table(&["invariant", "value"], &rows))
}

pub fn orbits(v: &QuadSpace) -> Output {
    let os = enumerate_nilreg(v);
    let j = json!({
        "command": "orbits",
        "field": v.field,
        "dim": v.dim(),
        "count": os.len(),
        "orbits": os.iter().map(|o| json!({
            "label": o.label,
            "model_gram": mat(&o.model.gram),
            "representative": mat(&o.rep),
        })).collect::<Vec<_>>(),
    });
    let rows: Vec<Vec<String>> = os
        .iter()
        .enumerate()
        .map(|(i, o)| vec![i.to_string(), o.label.text(), o.rep.power_ranks().iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")])
        .collect();
    let mut text = format!("{} regular nilpotent orbit(s) in so(V), dim V = {}, over {}\n", os.len(), v.dim(), v.field);
    if os.is_empty() {
        text.push_str("V is not quasi-split\n");
    } else {
        text.push_str(&table(&["#", "label", "ranks of N^k"], &rows));
    }
    Output::new(j, text)
}

/// A seeded GGP instance when no input is given.
fn slice_instance(cfg: &RunConfig, input: Option<&SliceInput>, m: usize, r: usize) -> Result<(GgpTriple, Option<LambdaElem>, ChaRng)> {
    let mut rng = gen::rng(cfg.seed);
    match input {
        Some(i) => {
            let t = i.triple(cfg.field)?;
            let y = i.lambda(&t)?;
            Ok((t, y, rng))
        }
        None => {
            let t = gen::ggp_triple(&mut rng, cfg.field, m, r, cfg.height.max(1));
            let y = gen::lambda_elem(&mut rng, &t, cfg.height.max(1));
            Ok((t, Some(y), rng))
        }
    }
}

type ChaRng = rand_chacha::ChaCha8Rng;

fn triple_json(t: &GgpTriple) -> Value {
    json!({"field": t.field(), "w_gram": mat(&t.w.gram), "nu0": qs(&t.nu0), "r": t.r, "v_gram": mat(&t.v.gram)})
}

fn lambda_json(y: &LambdaElem) -> Value {
    json!({"xw": mat(&y.xw), "w": qv(&y.w), "mu": qv(&y.mu)})
}

pub fn slice_factorize_cmd(cfg: &RunConfig, input: Option<&SliceInput>, m: usize, r: usize) -> Result<Output> {
    let (t, y, mut rng) = slice_instance(cfg, input, m, r)?;
    let (x, planted) = match input.map(SliceInput::sigma).transpose()?.flatten() {
        Some(x) => (x, None),
        None => {
            let Some(y) = y else { bail!("give xw and xv (Sigma element) or xw and w (Lambda element)") };
            let n = gen::unipotent(&mut rng, &t, cfg.height.max(1));
            (slice_conjugate(&t, &n, &y)?, Some((n, y)))
        }
    };
    let (n, lam) = slice_factorize(&t, &x)?;
    let recovered = planted.as_ref().map(|(n0, y0)| *n0 == n && *y0 == lam);
    let mut out = Output::new(
        json!({
            "command": "slice factorize",
            "triple": triple_json(&t),
            "n": mat(&n),
            "lambda": lambda_json(&lam),
            "recovered_planted": recovered,
        }),
        format!(
            "m = {}, r = {}, nu0 = {}\nn =\n{}\nLambda component: X_W =\n{}\n  w = [{}]\n  mu = [{}]\n{}",
            t.m(),
            t.r,
            fmt_q(&t.nu0),
            mat_text(&n),
            mat_text(&lam.xw),
            lam.w.iter().map(fmt_q).collect::<Vec<_>>().join(", "),
            lam.mu.iter().map(fmt_q).collect::<Vec<_>>().join(", "),
            match recovered {
                Some(true) => "planted (n, Y) recovered\n",
                Some(false) => "planted (n, Y) NOT recovered\n",
                None => "",
            }
        ),
    );
    out.ok = recovered != Some(false);
    Ok(out)
}

pub fn slice_identity_cmd(cfg: &RunConfig, input: Option<&SliceInput>, m: usize, r: usize) -> Result<Output> {
    let (t, y, _) = slice_instance(cfg, input, m, r)?;
    let Some(y) = y else { bail!("give xw, w and mu") };
    let rep = charpoly_identity(&t, &y)?;
    let ok = rep.residual.is_zero();
    let mut out = Output::new(
        json!({
            "command": "slice identity-check",
            "triple": triple_json(&t),
            "lambda": lambda_json(&y),
            "p_xv": poly(&rep.p_xv),
            "p_neg_xw": poly(&rep.p_neg_xw),
            "closed_form": poly(&rep.closed_form),
            "residual_zero": ok,
        }),
        format!(
            "P_XV(T)        = {}\nP_-XW(T)       = {}\nclosed form    = {}\nresidual       = {}\n",
            poly_text(&rep.p_xv),
            poly_text(&rep.p_neg_xw),
            poly_text(&rep.closed_form),
            poly_text(&rep.residual)
        ),
    );
    out.ok = ok;
    Ok(out)
}

pub fn slice_membership_cmd(cfg: &RunConfig, input: Option<&SliceInput>, m: usize, r: usize) -> Result<Output> {
    let (t, y, _) = slice_instance(cfg, input, m, r)?;
    let x = match input.map(SliceInput::sigma).transpose()?.flatten() {
        Some(x) => x,
        None => match y {
            Some(y) => y.to_sigma(&t)?,
            None => bail!("give a Sigma element (xw, xv) or a Lambda element (xw, w, mu)"),
        },
    };
    let rep = sigma_prime_membership(&t, &x)?;
    let j = json!({
        "command": "slice sigma-membership",
        "triple": triple_json(&t),
        "member": rep.member(),
        "krylov_full": rep.krylov_full,
        "q_nonzero": rep.q_nonzero,
        "regular_semisimple": rep.regular_semisimple,
        "consistent": rep.consistent(),
    });
    let yn = |b: bool| if b { "yes" } else { "no" }.to_string();
    let text = table(
        &["test", "value"],
        &[
            vec!["Q(X) != 0 (in Sigma')".into(), yn(rep.member())],
            vec!["Krylov span of X_V full".into(), yn(rep.krylov_full)],
            vec!["regular semisimple".into(), yn(rep.regular_semisimple)],
        ],
    );
    Ok(Output::new(j, text))
}

pub fn slice_sign_test_cmd(xpm: &XpmConfig, nu0: &Q, r: usize) -> Result<Output> {
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for zeta in [1i8, -1] {
        let rep = sigma_rational_sign_test(xpm, nu0, r, zeta, None)?;
        rows.push(vec![
            zeta.to_string(),
            rep.blocks.iter().map(|b| fmt_q(&b.value)).collect::<Vec<_>>().join(", "),
            rep.blocks.iter().map(|b| b.sign.to_string()).collect::<Vec<_>>().join(", "),
            rep.member.to_string(),
            rep.predicted.to_string(),
        ]);
        reports.push(json!({
            "zeta": zeta,
            "blocks": rep.blocks.iter().map(|b| json!({"value": qs(&b.value), "ratio": qs(&b.ratio), "sign": b.sign})).collect::<Vec<_>>(),
            "member": rep.member,
            "predicted": rep.predicted,
        }));
    }
    Ok(Output::new(
        json!({"command": "slice sign-test", "nu0": qs(nu0), "r": r, "rows": reports}),
        table(&["zeta", "forced q(w_i,w_i)", "signs", "member", "sgn(-eta nu0) = zeta"], &rows),
    ))
}

pub fn germ_eval_cmd(xpm: &XpmConfig, orbit: &Q, zeta: Option<i8>) -> Result<Output> {
    let d = xpm.dim();
    let ep = eta_pin_for(d, &xpm.eta);
    let nu = canonical_rep(xpm.field, orbit)?;
    let (_, _, w) = build_xpm(xpm, 1)?;
    if !nil_labels(&w).contains(&nu) {
        bail!("{} is not a regular nilpotent label of the target space", fmt_q(orbit));
    }
    let zetas: Vec<i8> = zeta.map_or(vec![1, -1], |z| vec![z]);
    let mut rows = Vec::new();
    let mut js = Vec::new();
    for z in zetas {
        if z != 1 && z != -1 {
            bail!("zeta must be 1 or -1");
        }
        let (_, t, _) = build_xpm(xpm, z)?;
        let g = germ_value(&t, &ep, &xpm.eta, &nu)?;
        let a = inv_pair(&t, &ep)?;
        let b = inv_nilpotent(&t, &nu, &xpm.eta)?;
        rows.push(vec![z.to_string(), format!("{a:?}"), format!("{b:?}"), g.to_string()]);
        js.push(json!({"zeta": z, "triple": describe(&t), "inv_pair": a, "inv_nilpotent": b, "gamma": g}));
    }
    Ok(Output::new(
        json!({"command": "germ eval", "orbit": qs(&nu), "eta_pin": qs(&ep), "rows": js}),
        format!("orbit O_{}, eta_pin = {}\n{}", fmt_q(&nu), fmt_q(&ep), table(&["zeta", "inv(X)", "inv(O)", "Gamma"], &rows)),
    ))
}

pub fn germ_table_cmd(xpm: &XpmConfig) -> Result<Output> {
    let tab = germ_table(xpm)?;
    let mut rows = Vec::new();
    for nu in &tab.labels {
        rows.push(vec![
            fmt_q(nu),
            tab.gamma(1, nu).map_or("-".into(), |g| g.to_string()),
            tab.gamma(-1, nu).map_or("-".into(), |g| g.to_string()),
        ]);
    }
    rows.push(vec!["sum".into(), tab.total(1).to_string(), tab.total(-1).to_string()]);
    let j = json!({
        "command": "germ table",
        "field": xpm.field,
        "dim": xpm.dim(),
        "target_gram": mat(&tab.space.gram),
        "labels": qv(&tab.labels),
        "rows": tab.rows.iter().map(|r| json!({"zeta": r.zeta, "nu": qs(&r.nu), "gamma": r.gamma})).collect::<Vec<_>>(),
        "inv": tab.inv.iter().map(|(z, v)| json!({"zeta": z, "inv_pair": v})).collect::<Vec<_>>(),
        "totals": {"plus": tab.total(1), "minus": tab.total(-1)},
    });
    Ok(Output::new(
        j,
        format!(
            "{} b1 = {} b2 = {} eta = {}{}\n{}",
            xpm.field,
            fmt_q(&xpm.b1),
            fmt_q(&xpm.b2),
            fmt_q(&xpm.eta),
            xpm.disc.as_ref().map_or(" (split target)".into(), |b| format!(" (quasi-split, E = F(sqrt {}))", fmt_q(b))),
            table(&["nu", "Gamma(X+)", "Gamma(X-)"], &rows)
        ),
    ))
}

fn split_space(cfg: &RunConfig, d: usize) -> Result<QuadSpace> {
    let h = QuadSpace::hyperbolic(cfg.field, d / 2);
    if d.is_multiple_of(2) {
        return Ok(h);
    }
    Ok(QuadSpace::direct_sum(&[&h, &QuadSpace::from_diag(cfg.field, &[q(1)])?])?)
}

fn kostant_sample(s: &KostantSlice, rng: &mut ChaRng, height: i64) -> Mat {
    s.borel_basis()
        .iter()
        .fold(s.x_plus.clone(), |acc, b| &acc + &b.scale(&gen::small_int(rng, height)))
}

pub fn kostant_normalize_cmd(cfg: &RunConfig, d: usize) -> Result<Output> {
    let s = KostantSlice::build(&split_space(cfg, d)?, &q(1))?;
    let z = kostant_sample(&s, &mut gen::rng(cfg.seed), cfg.height.max(1));
    let (n, y) = normalize_to_slice(&s, &z)?;
    let coords = s.slice_coords(&y).unwrap_or_default();
    let quotient = adjoint_quotient_coords(&s.gram, &y);
    Ok(Output::new(
        json!({
            "command": "kostant normalize",
            "d": d,
            "gram": mat(&s.gram),
            "z": mat(&z),
            "n": mat(&n),
            "y": mat(&y),
            "slice_coords": qv(&coords),
            "quotient_coords": qv(&quotient),
        }),
        format!(
            "Z =\n{}\nn =\n{}\nY = Ad(n) Z =\n{}\nslice coordinates: [{}]\nadjoint quotient: [{}]\n",
            mat_text(&z),
            mat_text(&n),
            mat_text(&y),
            coords.iter().map(fmt_q).collect::<Vec<_>>().join(", "),
            quotient.iter().map(fmt_q).collect::<Vec<_>>().join(", ")
        ),
    ))
}

pub fn kostant_check_cmd(cfg: &RunConfig, d: usize, samples: usize) -> Result<Output> {
    let start = Instant::now();
    let s = KostantSlice::build(&split_space(cfg, d)?, &q(1))?;
    let mut rng = gen::rng(cfg.seed);
    let (mut regular, mut normalized) = (0usize, 0usize);
    for _ in 0..samples {
        let z = kostant_sample(&s, &mut rng, cfg.height.max(1));
        if regularity_check(&s, &z) {
            regular += 1;
        }
        if let Ok((n, y)) = normalize_to_slice(&s, &z) {
            if n.inverse().is_some_and(|ni| &(&n * &z) * &ni == y) {
                normalized += 1;
            }
        }
    }
    let mut j = json!({
        "command": "kostant check",
        "d": d,
        "rank": s.rank(),
        "samples": samples,
        "regular": regular,
        "normalized": normalized,
    });
    if cfg.timings {
        j["wall_ms"] = json!(start.elapsed().as_millis() as u64);
    }
    let mut out = Output::new(
        j,
        format!("d = {d}, rank = {}: {regular}/{samples} regular, {normalized}/{samples} normalized\n", s.rank()),
    );
    out.ok = regular == samples && normalized == samples;
    Ok(out)
}

/// Runs one suite or all of them; suites run on separate threads and are reported in
/// registry order.
pub fn verify(cfg: &RunConfig, name: &str) -> Result<Output> {
    let start = Instant::now();
    let suites = if name == "all" {
        registry()
    } else {
        match find(name) {
            Some(s) => vec![s],
            None => bail!(
                "unknown suite {name:?}; available: all, {}",
                registry().iter().map(|s| s.name).collect::<Vec<_>>().join(", ")
            ),
        }
    };
    let reports: Vec<CheckReport> = std::thread::scope(|sc| {
        let handles: Vec<_> = suites.iter().map(|s| sc.spawn(|| run_suite(s, cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });
    let ok = reports.iter().all(CheckReport::passed);
    let mut j = json!({
        "command": "verify",
        "suite": name,
        "seed": cfg.seed,
        "passed": ok,
        "reports": reports,
    });
    if cfg.timings {
        j["wall_ms"] = json!(start.elapsed().as_millis() as u64);
    }
    let mut rows = Vec::new();
    for r in &reports {
        let mut row = vec![
            r.name.clone(),
            r.instances.to_string(),
            r.failures.len().to_string(),
            if r.passed() { "PASS" } else { "FAIL" }.into(),
        ];
        if let Some(ms) = r.wall_ms {
            row.push(format!("{ms} ms"));
        }
        rows.push(row);
    }
    let mut headers = vec!["suite", "instances", "failures", "verdict"];
    if cfg.timings {
        headers.push("time");
    }
    let mut text = table(&headers, &rows);
    for r in &reports {
        for f in r.failures.iter().take(3) {
            text.push_str(&format!("{}: params {:?} (shrunk {:?}): {}\n", r.name, f.params, f.shrunk, f.message));
        }
    }
    let mut out = Output::new(j, text);
    out.ok = ok;
    Ok(out)
}

pub fn list_suites() -> Output {
    let reg = registry();
    Output::new(
        json!({"command": "verify list", "suites": reg.iter().map(|s| json!({"name": s.name, "about": s.about})).collect::<Vec<_>>()}),
        table(&["suite", "checks"], &reg.iter().map(|s| vec![s.name.to_string(), s.about.to_string()]).collect::<Vec<_>>()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_rendering() {
        assert_eq!(poly_text(&Poly::from_i64(&[-2, 0, 1])), "T^2 - 2");
        assert_eq!(poly_text(&Poly::from_i64(&[0, 3, -1])), "-T^2 + 3*T");
        assert_eq!(poly_text(&Poly::zero()), "0");
    }

    #[test]
    fn seeded_slice_commands_succeed() {
        let cfg = RunConfig::default();
        assert!(slice_factorize_cmd(&cfg, None, 2, 1).unwrap().ok);
        assert!(slice_identity_cmd(&cfg, None, 3, 2).unwrap().ok);
        assert!(kostant_check_cmd(&cfg, 5, 10).unwrap().ok);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(verify(&RunConfig::default(), "nope").is_err());
    }

    #[test]
    fn classify_hyperbolic() {
        let o = classify(&QuadSpace::hyperbolic(ggp_core::LocalField::Padic(3), 2));
        assert_eq!(o.json["witt_index"], 2);
        assert_eq!(o.json["quasi_split"], true);
    }
}
