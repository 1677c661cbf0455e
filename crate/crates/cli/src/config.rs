//! Experiment configuration: a JSON file mirroring the flags, with flags
//! taking precedence.

use std::fmt;
use std::path::{Path, PathBuf};

use bct_core::rational::{format_rational, parse_rational};
use bct_core::Q;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Invalid configuration, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

impl ConfigError {
    pub fn new(field: &str, msg: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid --{}: {}", self.field, self.msg)
    }
}

impl std::error::Error for ConfigError {}

/// A list given either as one comma-separated string or as a JSON array of
/// numbers and strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ListSpec {
    Text(String),
    Items(Vec<Value>),
}

impl ListSpec {
    fn items(&self) -> Vec<String> {
        match self {
            ListSpec::Text(s) => s.split(',').map(|t| t.trim().to_string()).collect(),
            ListSpec::Items(v) => v
                .iter()
                .map(|x| match x {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect(),
        }
    }
}

impl From<&str> for ListSpec {
    fn from(s: &str) -> Self {
        ListSpec::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub dist: Option<ListSpec>,
    pub eps: Option<ListSpec>,
    pub nmin: Option<usize>,
    pub nmax: Option<usize>,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub states: Option<usize>,
    pub budget: Option<usize>,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub k1max: Option<u32>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub memory_bound: Option<u64>,
}

macro_rules! merge_fields {
    ($self:ident, $other:ident; $($f:ident),*) => {
        ExperimentConfig { $($f: $self.$f.or($other.$f)),* }
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())).into())
    }

    /// Fields set in `self` win over `fallback`.
    pub fn merge(self, fallback: ExperimentConfig) -> Self {
        merge_fields!(self, fallback; dist, eps, nmin, nmax, n, delta, seed, samples, states,
            budget, a, b, k1max, out, report, memory_bound)
    }

    pub fn dist(&self) -> Result<Vec<Q>, ConfigError> {
        let list = self
            .dist
            .as_ref()
            .ok_or_else(|| ConfigError::new("dist", "a source distribution is required"))?;
        let p = list
            .items()
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<Q>, _>>()
            .map_err(|e| ConfigError::new("dist", e.to_string()))?;
        if p.len() < 2 {
            return Err(ConfigError::new("dist", "at least two probabilities are needed"));
        }
        if let Some(x) = p.iter().find(|x| x.is_negative()) {
            return Err(ConfigError::new("dist", format!("negative entry {}", format_rational(x))));
        }
        let total: Q = p.iter().sum();
        if !total.is_one() {
            return Err(ConfigError::new(
                "dist",
                format!("entries sum to {}, not 1", format_rational(&total)),
            ));
        }
        Ok(p)
    }

    pub fn eps(&self, default: &str) -> Result<Vec<Q>, ConfigError> {
        let list = self.eps.clone().unwrap_or_else(|| default.into());
        let eps = list
            .items()
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<Q>, _>>()
            .map_err(|e| ConfigError::new("eps", e.to_string()))?;
        if eps.is_empty() {
            return Err(ConfigError::new("eps", "empty list"));
        }
        let two = Q::from_integer(2.into());
        if let Some(e) = eps.iter().find(|e| !e.is_positive() || **e >= two) {
            return Err(ConfigError::new(
                "eps",
                format!("{} is outside (0, 2)", format_rational(e)),
            ));
        }
        Ok(eps)
    }

    pub fn n_range(&self, default_max: usize) -> Result<Vec<usize>, ConfigError> {
        let lo = self.nmin.unwrap_or(1);
        let hi = self.nmax.unwrap_or(default_max);
        if lo == 0 {
            return Err(ConfigError::new("nmin", "must be at least 1"));
        }
        if hi < lo {
            return Err(ConfigError::new("nmax", format!("{hi} is below nmin {lo}")));
        }
        if hi > 64 {
            return Err(ConfigError::new("nmax", format!("{hi} exceeds the supported 64")));
        }
        Ok((lo..=hi).collect())
    }

    pub fn n_single(&self, default: usize) -> Result<usize, ConfigError> {
        let n = self.n.unwrap_or(default);
        if n == 0 || n > 64 {
            return Err(ConfigError::new("n", format!("{n} is outside 1..=64")));
        }
        Ok(n)
    }

    pub fn delta(&self, default: f64) -> Result<f64, ConfigError> {
        let d = self.delta.unwrap_or(default);
        if !(d > 0.0 && d.is_finite()) {
            return Err(ConfigError::new("delta", format!("{d} must be positive")));
        }
        Ok(d)
    }

    pub fn memory_bound(&self) -> u128 {
        self.memory_bound
            .map(u128::from)
            .unwrap_or(bct_core::DEFAULT_MEMORY_BOUND)
    }

    pub fn positive(&self, field: &str, value: Option<usize>, default: usize) -> Result<usize, ConfigError> {
        match value.unwrap_or(default) {
            0 => Err(ConfigError::new(field, "must be positive")),
            v => Ok(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bct_core::rational::q;

    #[test]
    fn flags_override_file() {
        let file: ExperimentConfig =
            serde_json::from_str(r#"{"dist": [0.9, "1/10"], "nmax": 12, "seed": 3}"#).unwrap();
        let flags = ExperimentConfig {
            nmax: Some(5),
            ..Default::default()
        };
        let merged = flags.merge(file);
        assert_eq!(merged.nmax, Some(5));
        assert_eq!(merged.seed, Some(3));
        assert_eq!(merged.dist().unwrap(), vec![q(9, 10), q(1, 10)]);
    }

    #[test]
    fn errors_name_the_field() {
        let c = ExperimentConfig {
            dist: Some("0.5,0.6".into()),
            eps: Some("0.1,2".into()),
            ..Default::default()
        };
        assert_eq!(c.dist().unwrap_err().field, "dist");
        assert_eq!(c.eps("0.1").unwrap_err().field, "eps");
        let c = ExperimentConfig {
            dist: Some("a,b".into()),
            ..Default::default()
        };
        assert!(c.dist().unwrap_err().to_string().starts_with("invalid --dist"));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"dsit": "1,0"}"#).is_err());
    }
}
