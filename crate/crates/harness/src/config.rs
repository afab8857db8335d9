//! Experiment configuration, read from JSON.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use sbs_core::benchmarks::lookup;
use sbs_core::optimizers::MethodConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    pub dim: usize,
}

/// ```json
/// {
///   "functions": [{"name": "ackley", "dim": 2}],
///   "methods": [{"method": "sbs"}, {"method": "cma-es"}],
///   "budget": 200000,
///   "repetitions": 10,
///   "base_seed": 0,
///   "output_dir": "out"
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub functions: Vec<FunctionSpec>,
    pub methods: Vec<MethodConfig>,
    pub budget: u64,
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Write a trajectory log for every SBS-family run.
    #[serde(default)]
    pub log_trajectory: bool,
    /// Snapshot interval of the trajectory logs, in iterations.
    #[serde(default = "default_log_every")]
    pub log_every: usize,
}

fn default_log_every() -> usize {
    10
}

impl ExperimentConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|source| HarnessError::Parse {
            path: origin.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(HarnessError::config("repetitions", "must be at least 1"));
        }
        if self.budget == 0 {
            return Err(HarnessError::config("budget", "must be positive"));
        }
        if self.log_every == 0 {
            return Err(HarnessError::config("log_every", "must be positive"));
        }
        if self.functions.is_empty() {
            return Err(HarnessError::config("functions", "list is empty"));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::config("methods", "list is empty"));
        }
        let mut seen = HashSet::new();
        for (i, f) in self.functions.iter().enumerate() {
            let entry = lookup(&f.name).map_err(|e| HarnessError::config(format!("functions[{i}].name"), e.to_string()))?;
            entry
                .domain_for(f.dim)
                .map_err(|e| HarnessError::config(format!("functions[{i}].dim"), e.to_string()))?;
            if !seen.insert((entry.name, f.dim)) {
                return Err(HarnessError::config(
                    format!("functions[{i}]"),
                    format!("{} in dimension {} is listed twice", entry.name, f.dim),
                ));
            }
        }
        let mut names = HashSet::new();
        for (i, m) in self.methods.iter().enumerate() {
            if !names.insert(m.name()) {
                return Err(HarnessError::config(
                    format!("methods[{i}]"),
                    format!("method `{}` is listed twice", m.name()),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(text, Path::new("test.json"))
    }

    const BASE: &str = r#"{"functions":[{"name":"ackley","dim":2}],"methods":[{"method":"sbs"}],
        "budget":1000,"repetitions":2,"output_dir":"out"}"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse(BASE).unwrap();
        assert_eq!(cfg.base_seed, 0);
        assert!(!cfg.log_trajectory);
        assert_eq!(cfg.log_every, 10);
    }

    #[test]
    fn rejects_bad_fields() {
        let bad = [
            (BASE.replace(r#""repetitions":2"#, r#""repetitions":0"#), "repetitions"),
            (BASE.replace("ackley", "nosuch"), "functions[0].name"),
            (BASE.replace(r#""dim":2"#, r#""dim":3"#).replace("ackley", "branin"), "functions[0].dim"),
            (
                BASE.replace(r#"[{"method":"sbs"}]"#, r#"[{"method":"sbs"},{"method":"sbs"}]"#),
                "methods[1]",
            ),
        ];
        for (text, field) in bad {
            match parse(&text) {
                Err(HarnessError::Config { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected config error for {field}, got {other:?}"),
            }
        }
        assert!(matches!(
            parse(&BASE.replace("budget", "budgett")),
            Err(HarnessError::Parse { .. })
        ));
        assert!(parse(&BASE.replace(r#""sbs""#, r#""adalipo""#)).unwrap_err().is_config_error());
    }
}
