//! JSON inputs. Rationals may be written as integers or as strings such as "-7/4".

use anyhow::{anyhow, bail, Context, Result};
use ggp_core::classes::XpmConfig;
use ggp_core::quadspace::{admissible_pair, GgpTriple};
use ggp_core::rational::parse_q;
use ggp_core::slice::{LambdaElem, SigmaElem};
use ggp_core::{LocalField, Mat, QuadSpace, Q};
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    pub fn value(&self) -> Result<Q> {
        match self {
            Num::Int(n) => Ok(Q::from_integer((*n).into())),
            Num::Text(s) => Ok(parse_q(s)?),
        }
    }
}

fn vec_q(v: &[Num]) -> Result<Vec<Q>> {
    v.iter().map(Num::value).collect()
}

fn mat_q(rows: &[Vec<Num>]) -> Result<Mat> {
    let n = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n) {
        bail!("matrix rows have different lengths");
    }
    Ok(Mat::from_rows(rows.iter().map(|r| vec_q(r)).collect::<Result<_>>()?))
}

fn field_or(f: &Option<String>, default: LocalField) -> Result<LocalField> {
    match f {
        Some(s) => Ok(s.parse()?),
        None => Ok(default),
    }
}

/// Reads an argument that is either inline JSON or a path to a JSON file.
pub fn load<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let t = arg.trim_start();
    let (text, origin) = if t.starts_with('{') || t.starts_with('[') {
        (arg.to_string(), "inline JSON".to_string())
    } else {
        (std::fs::read_to_string(arg).with_context(|| format!("cannot read {arg}"))?, arg.to_string())
    };
    serde_json::from_str(&text).map_err(|e| anyhow!("parse error in {origin}: {e}"))
}

/// A quadratic space, by Gram matrix or diagonal.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceInput {
    pub field: Option<String>,
    pub gram: Option<Vec<Vec<Num>>>,
    pub diag: Option<Vec<Num>>,
}

impl SpaceInput {
    pub fn space(&self, default: LocalField) -> Result<QuadSpace> {
        let k = field_or(&self.field, default)?;
        match (&self.gram, &self.diag) {
            (Some(g), None) => Ok(QuadSpace::new(k, mat_q(g)?)?),
            (None, Some(d)) => Ok(QuadSpace::from_diag(k, &vec_q(d)?)?),
            _ => bail!("give exactly one of \"gram\" and \"diag\""),
        }
    }
}

/// Parses "1,-2,3/4" into a diagonal.
pub fn parse_diag(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(|x| Ok(parse_q(x)?)).collect()
}

/// Data of an X^+- configuration.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XpmInput {
    pub field: Option<String>,
    pub b1: Num,
    pub y1: Num,
    pub b2: Num,
    pub y2: Num,
    pub eta: Num,
    #[serde(default)]
    pub disc: Option<Num>,
    #[serde(default)]
    pub split: Vec<Num>,
}

impl XpmInput {
    pub fn config(&self, default: LocalField) -> Result<XpmConfig> {
        let cfg = XpmConfig {
            field: field_or(&self.field, default)?,
            b1: self.b1.value()?,
            y1: self.y1.value()?,
            b2: self.b2.value()?,
            y2: self.y2.value()?,
            eta: self.eta.value()?,
            disc: self.disc.as_ref().map(Num::value).transpose()?,
            split: vec_q(&self.split)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A GGP pair (W, nu0, r) and optionally an element of Lambda or of Sigma.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceInput {
    pub field: Option<String>,
    /// Gram matrix of W.
    pub w_gram: Option<Vec<Vec<Num>>>,
    pub w_diag: Option<Vec<Num>>,
    pub nu0: Num,
    pub r: usize,
    /// Lambda element: X_W, w, mu.
    pub xw: Option<Vec<Vec<Num>>>,
    pub w: Option<Vec<Num>>,
    pub mu: Option<Vec<Num>>,
    /// Sigma element: X_W together with X_V.
    pub xv: Option<Vec<Vec<Num>>>,
}

impl SliceInput {
    pub fn triple(&self, default: LocalField) -> Result<GgpTriple> {
        let space = SpaceInput {
            field: self.field.clone(),
            gram: self.w_gram.clone(),
            diag: self.w_diag.clone(),
        }
        .space(default)?;
        Ok(admissible_pair(&space, &self.nu0.value()?, self.r)?)
    }

    pub fn lambda(&self, t: &GgpTriple) -> Result<Option<LambdaElem>> {
        let (Some(xw), Some(w)) = (&self.xw, &self.w) else {
            return Ok(None);
        };
        let y = LambdaElem {
            xw: mat_q(xw)?,
            w: vec_q(w)?,
            mu: vec_q(self.mu.as_deref().unwrap_or(&[]))?,
        };
        y.check(t)?;
        Ok(Some(y))
    }

    pub fn sigma(&self) -> Result<Option<SigmaElem>> {
        let (Some(xw), Some(xv)) = (&self.xw, &self.xv) else {
            return Ok(None);
        };
        Ok(Some(SigmaElem {
            xw: mat_q(xw)?,
            xv: mat_q(xv)?,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ggp_core::rational::q;

    #[test]
    fn xpm_from_json() {
        let i: XpmInput =
            load(r#"{"field": "Q5", "b1": 2, "y1": 1, "b2": "10", "y2": 2, "eta": 1, "disc": 5}"#).unwrap();
        let c = i.config(LocalField::Real).unwrap();
        assert_eq!(c.field, LocalField::Padic(5));
        assert_eq!(c.disc, Some(q(5)));
    }

    #[test]
    fn parse_errors_have_location() {
        let e = load::<XpmInput>("{\"b1\": 2,\n \"y1\": }").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = load::<SpaceInput>(r#"{"diag": [1, 2], "bogus": 1}"#).unwrap_err().to_string();
        assert!(e.contains("bogus"), "{e}");
    }

    #[test]
    fn space_input() {
        let s: SpaceInput = load(r#"{"diag": [1, "-3/2"]}"#).unwrap();
        assert_eq!(s.space(LocalField::Real).unwrap().det(), Q::new((-3).into(), 2.into()));
        let s: SpaceInput = load(r#"{"gram": [[0, 1], [1, 0]], "field": "Q2"}"#).unwrap();
        assert_eq!(s.space(LocalField::Real).unwrap().witt_index(), 1);
        assert_eq!(parse_diag("1, -2,3/4").unwrap(), vec![q(1), q(-2), Q::new(3.into(), 4.into())]);
    }
}
