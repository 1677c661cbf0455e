//! Canonical number formatting and report containers.

use bct_core::rational::format_rational;
use bct_core::Q;
use serde_json::{json, Value};

/// Significant digits for every float written to a report.
pub const SIG_DIGITS: usize = 12;

/// `x` with 12 significant digits, trailing zeros trimmed; integral values
/// keep one decimal (`1.0`) so they still read as floats.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return format!("{s}.0");
    }
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

/// JSON number rounded to the canonical 12 digits.
pub fn jf(x: f64) -> Value {
    match fmt_float(x).parse::<f64>() {
        Ok(v) if v.is_finite() => json!(v),
        _ => Value::String(fmt_float(x)),
    }
}

/// Exact rational as a `"p/q"` string.
pub fn jq(x: &Q) -> Value {
    Value::String(format_rational(x))
}

pub fn jq_list(xs: &[Q]) -> Value {
    Value::Array(xs.iter().map(jq).collect())
}

/// Output of one subcommand: the file body, a human summary and any
/// invariant violations found while producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub summary: String,
    pub violations: Vec<String>,
}

impl Report {
    pub fn json(value: &Value, summary: String, violations: Vec<String>) -> Self {
        let mut body = serde_json::to_string_pretty(value).expect("serializable");
        body.push('\n');
        Self {
            body,
            summary,
            violations,
        }
    }
}

/// Plain fixed-width table for terminal summaries.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header.iter().map(|s| s.to_string()).collect());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.clone()));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_float(1.0), "1.0");
        assert_eq!(fmt_float(0.5), "0.5");
        assert_eq!(fmt_float(0.7344977967946), "0.734497796795");
        assert_eq!(fmt_float(-0.125), "-0.125");
        assert_eq!(fmt_float(1.75), "1.75");
        assert_eq!(fmt_float(1e-7), "1e-7");
        assert_eq!(fmt_float(123456789012345678.0), "1.23456789012e17");
        assert_eq!(fmt_float(0.0), "0.0");
        assert_eq!(fmt_float(2.0 / 3.0), "0.666666666667");
    }

    #[test]
    fn table_alignment() {
        let t = table(&["N", "rate"], &[vec!["1".into(), "1.0".into()]]);
        assert_eq!(t, "N  rate\n1   1.0\n");
    }
}
