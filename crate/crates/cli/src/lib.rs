//! Command-line front end for ggp-core: run configuration, JSON input, command handlers and
//! the verification-suite runner.

pub mod commands;
pub mod input;
pub mod suites;

use ggp_core::LocalField;
use serde_json::{Map, Value};

/// Settings shared by every command. The seed fixes every random instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub field: LocalField,
    pub seed: u64,
    /// Requested sample count; suites never go below their own minimum.
    pub samples: usize,
    pub height: i64,
    pub json: bool,
    /// Include wall-clock times in reports. Off by default so JSON is reproducible.
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            field: LocalField::Padic(3),
            seed: 7,
            samples: 0,
            height: 3,
            json: false,
            timings: false,
        }
    }
}

/// Result of a command: a JSON document, its text rendering, and whether it succeeded.
#[derive(Clone, Debug)]
pub struct Output {
    pub json: Value,
    pub text: String,
    pub ok: bool,
}

impl Output {
    pub fn new(json: Value, text: String) -> Output {
        Output { json, text, ok: true }
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut m = Map::new();
            m.insert("schema".into(), Value::String("1".into()));
            match &self.json {
                Value::Object(o) => m.extend(o.clone()),
                other => {
                    m.insert("result".into(), other.clone());
                }
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("json values serialize");
            s.push('\n');
            s
        } else {
            self.text.clone()
        }
    }
}

/// Left-aligned text table with two-space gutters.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            if i < width.len() {
                width[i] = width[i].max(c.chars().count());
            }
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<w$}", w = width[i]))
            .collect::<Vec<_>>()
            .join("  ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(headers.to_vec());
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * width.len().saturating_sub(1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_aligned() {
        let t = table(&["a", "long"], &[vec!["xyz".into(), "1".into()], vec!["q".into(), "22".into()]]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "a    long");
        assert_eq!(lines[1], "---------");
        assert_eq!(lines[2], "xyz  1");
        assert_eq!(lines[3], "q    22");
    }

    #[test]
    fn json_has_schema() {
        let o = Output::new(serde_json::json!({"x": 1}), String::new());
        let v: Value = serde_json::from_str(&o.render(true)).unwrap();
        assert_eq!(v["schema"], "1");
        assert_eq!(v["x"], 1);
    }
}
