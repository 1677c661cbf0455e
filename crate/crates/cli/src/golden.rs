//! Golden-file regression of the canonical reports.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;

use crate::commands;
use crate::config::ExperimentConfig;
use crate::report::Report;

/// Tolerance for float fields; rational and integer fields compare exactly.
pub const FLOAT_TOL: f64 = 1e-9;
/// Diffs listed per mismatch report.
pub const MAX_DIFFS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Rate,
    Codec,
    Entropy,
    Steer,
    Digitize,
    Counterexample,
}

#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub file: &'static str,
    pub kind: Kind,
    pub config: ExperimentConfig,
    /// Whether the report depends on the seed.
    pub seeded: bool,
}

fn cfg(json: &str) -> ExperimentConfig {
    serde_json::from_str(json).expect("static golden config")
}

pub fn cases() -> Vec<GoldenCase> {
    vec![
        GoldenCase {
            file: "rate_uniform.csv",
            kind: Kind::Rate,
            config: cfg(r#"{"dist": "1/2,1/2", "eps": "0.5,0.1,0.02", "nmax": 12}"#),
            seeded: false,
        },
        GoldenCase {
            file: "rate_biased.csv",
            kind: Kind::Rate,
            config: cfg(r#"{"dist": "0.9,0.1", "eps": "0.05,0.02", "nmax": 18}"#),
            seeded: false,
        },
        GoldenCase {
            file: "rate_pure.csv",
            kind: Kind::Rate,
            config: cfg(r#"{"dist": "1,0", "eps": "0.1", "nmax": 18}"#),
            seeded: false,
        },
        GoldenCase {
            file: "codec_biased.json",
            kind: Kind::Codec,
            config: cfg(r#"{"dist": "0.9,0.1", "n": 12, "delta": 0.1, "eps": "0.1"}"#),
            seeded: false,
        },
        GoldenCase {
            file: "entropy_uniform.json",
            kind: Kind::Entropy,
            config: cfg(r#"{"dist": "1/2,1/2", "nmax": 4, "seed": 0}"#),
            seeded: true,
        },
        GoldenCase {
            file: "entropy_ternary.json",
            kind: Kind::Entropy,
            config: cfg(r#"{"dist": "1/2,1/3,1/6", "nmax": 8, "seed": 1}"#),
            seeded: true,
        },
        GoldenCase {
            file: "steer.json",
            kind: Kind::Steer,
            config: cfg(r#"{"seed": 7, "samples": 50}"#),
            seeded: true,
        },
        GoldenCase {
            file: "digitize.json",
            kind: Kind::Digitize,
            config: cfg(r#"{"a": 5, "b": 2}"#),
            seeded: false,
        },
        GoldenCase {
            file: "counterexample_uniform.json",
            kind: Kind::Counterexample,
            config: cfg(r#"{"dist": "0.5,0.5", "nmax": 6}"#),
            seeded: false,
        },
        GoldenCase {
            file: "counterexample_biased.json",
            kind: Kind::Counterexample,
            config: cfg(r#"{"dist": "0.9,0.1", "nmax": 6}"#),
            seeded: false,
        },
    ]
}

pub fn generate(kind: Kind, config: &ExperimentConfig) -> Result<Report> {
    match kind {
        Kind::Rate => commands::rate(config),
        Kind::Codec => commands::codec(config),
        Kind::Entropy => commands::entropy(config),
        Kind::Steer => commands::steer_cmd(config),
        Kind::Digitize => commands::digitize(config),
        Kind::Counterexample => commands::counterexample(config),
    }
}

/// Rewrites every golden file in `dir`.
pub fn update(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for case in cases() {
        let path = dir.join(case.file);
        let report = generate(case.kind, &case.config)?;
        std::fs::write(&path, report.body).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenOutcome {
    pub compared: usize,
    /// Per-file mismatch descriptions, at most [`MAX_DIFFS`] each.
    pub mismatches: Vec<(String, Vec<String>)>,
}

impl GoldenOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn check(dir: &Path) -> Result<GoldenOutcome> {
    check_cases(dir, &cases())
}

pub fn check_cases(dir: &Path, cases: &[GoldenCase]) -> Result<GoldenOutcome> {
    let mut mismatches = Vec::new();
    for case in cases {
        let path = dir.join(case.file);
        let expected = std::fs::read_to_string(&path)
            .with_context(|| format!("reading golden file {}", path.display()))?;
        let actual = generate(case.kind, &case.config)?.body;
        let diffs = compare(case.file, &expected, &actual);
        if !diffs.is_empty() {
            mismatches.push((case.file.to_string(), diffs));
        }
    }
    Ok(GoldenOutcome {
        compared: cases.len(),
        mismatches,
    })
}

/// Field-wise comparison of two report bodies, CSV or JSON by extension.
pub fn compare(file: &str, expected: &str, actual: &str) -> Vec<String> {
    let mut diffs = Vec::new();
    if file.ends_with(".json") {
        match (serde_json::from_str::<Value>(expected), serde_json::from_str::<Value>(actual)) {
            (Ok(e), Ok(a)) => compare_json("$", &e, &a, &mut diffs),
            (Err(e), _) => diffs.push(format!("golden file is not JSON: {e}")),
            (_, Err(e)) => diffs.push(format!("regenerated report is not JSON: {e}")),
        }
    } else {
        compare_csv(expected, actual, &mut diffs);
    }
    diffs.truncate(MAX_DIFFS);
    diffs
}

fn floats_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FLOAT_TOL * a.abs().max(b.abs()).max(1.0)
}

fn compare_json(path: &str, e: &Value, a: &Value, diffs: &mut Vec<String>) {
    match (e, a) {
        (Value::Number(x), Value::Number(y)) => {
            let float = x.is_f64() || y.is_f64();
            let same = if float {
                floats_close(x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN))
            } else {
                x == y
            };
            if !same {
                diffs.push(format!("{path}: expected {x}, found {y}"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                diffs.push(format!("{path}: expected {} items, found {}", x.len(), y.len()));
            }
            for (k, (u, v)) in x.iter().zip(y).enumerate() {
                compare_json(&format!("{path}[{k}]"), u, v, diffs);
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            for (key, u) in x {
                match y.get(key) {
                    Some(v) => compare_json(&format!("{path}.{key}"), u, v, diffs),
                    None => diffs.push(format!("{path}.{key}: missing")),
                }
            }
            for key in y.keys().filter(|k| !x.contains_key(*k)) {
                diffs.push(format!("{path}.{key}: unexpected field"));
            }
        }
        (x, y) if x == y => {}
        (x, y) => diffs.push(format!("{path}: expected {x}, found {y}")),
    }
}

fn compare_csv(expected: &str, actual: &str, diffs: &mut Vec<String>) {
    let e: Vec<&str> = expected.lines().collect();
    let a: Vec<&str> = actual.lines().collect();
    if e.len() != a.len() {
        diffs.push(format!("expected {} lines, found {}", e.len(), a.len()));
    }
    for (k, (le, la)) in e.iter().zip(&a).enumerate() {
        let ce: Vec<&str> = le.split(',').collect();
        let ca: Vec<&str> = la.split(',').collect();
        if ce.len() != ca.len() {
            diffs.push(format!("line {}: expected {} fields, found {}", k + 1, ce.len(), ca.len()));
            continue;
        }
        for (col, (x, y)) in ce.iter().zip(&ca).enumerate() {
            let is_float = |s: &str| s.contains(['.', 'e']) && s.parse::<f64>().is_ok();
            let same = if is_float(x) && is_float(y) {
                floats_close(x.parse().unwrap_or(f64::NAN), y.parse().unwrap_or(f64::NAN))
            } else {
                x == y
            };
            if !same {
                diffs.push(format!("line {} field {}: expected {x}, found {y}", k + 1, col + 1));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_float_tolerance() {
        assert!(compare("a.csv", "N,r\n1,0.5\n", "N,r\n1,0.5000000000001\n").is_empty());
        assert_eq!(compare("a.csv", "N,r\n1,0.5\n", "N,r\n1,0.51\n").len(), 1);
        assert_eq!(compare("a.csv", "N,M\n1,2\n", "N,M\n1,3\n").len(), 1);
    }

    #[test]
    fn json_rationals_exact() {
        let e = r#"{"p": "1/3", "x": 0.5, "n": 3}"#;
        assert!(compare("a.json", e, r#"{"p": "1/3", "x": 0.5000000000001, "n": 3}"#).is_empty());
        assert_eq!(compare("a.json", e, r#"{"p": "2/6", "x": 0.5, "n": 3}"#).len(), 1);
        assert_eq!(compare("a.json", e, r#"{"p": "1/3", "x": 0.5, "n": 4}"#).len(), 1);
        assert_eq!(compare("a.json", e, r#"{"p": "1/3", "x": 0.5}"#).len(), 1);
    }

    #[test]
    fn diffs_are_capped() {
        let e: String = (0..20).map(|k| format!("{k}\n")).collect();
        let a: String = (0..20).map(|k| format!("{}\n", k + 1)).collect();
        assert_eq!(compare("a.csv", &e, &a).len(), MAX_DIFFS);
    }
}
