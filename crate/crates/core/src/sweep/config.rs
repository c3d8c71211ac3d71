//! Experiment configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::derivative::DerivativePolicy;
use crate::error::{Error, Result};
use crate::models::{build_appendix_e, build_chain, build_two_qubit, ChainParams, PartitionedHamiltonian, TwoQubitXYZParams};
use crate::thermometry::{GreedyPath, MeasurementMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    TwoQubit { b1: f64, b2: f64, jx: f64, jy: f64, jz: f64 },
    Chain { n: usize, b: f64, j: f64, alpha: f64 },
    AppendixE { j: f64, lambda: f64, jz: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> Result<PartitionedHamiltonian> {
        match *self {
            ModelSpec::TwoQubit { b1, b2, jx, jy, jz } => build_two_qubit(&TwoQubitXYZParams::new(b1, b2, jx, jy, jz)),
            ModelSpec::Chain { n, b, j, alpha } => build_chain(&ChainParams { n, b, j, alpha }),
            ModelSpec::AppendixE { j, lambda, jz } => build_appendix_e(j, lambda, jz),
        }
    }

    pub fn sites(&self) -> usize {
        match self {
            ModelSpec::Chain { n, .. } => *n,
            _ => 2,
        }
    }

    /// Named numeric parameters in a fixed order, as written to CSV.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ModelSpec::TwoQubit { b1, b2, jx, jy, jz } => {
                vec![("b1", b1), ("b2", b2), ("jx", jx), ("jy", jy), ("jz", jz)]
            }
            ModelSpec::Chain { n, b, j, alpha } => vec![("n", n as f64), ("b", b), ("j", j), ("alpha", alpha)],
            ModelSpec::AppendixE { j, lambda, jz } => vec![("j", j), ("lambda", lambda), ("jz", jz)],
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some((name, v)) = self.parameters().into_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!("model parameter {name} = {v} is not finite")));
        }
        if let ModelSpec::Chain { n, .. } = self {
            if *n < 2 {
                return Err(Error::Config(format!("chain needs n >= 2, got {n}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    #[default]
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TemperatureGrid {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Config(format!("temperature grid needs count >= 2, got {}", self.count)));
        }
        if !(self.min > 0.0) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Config(format!("temperature bounds must be finite with min > 0, got [{}, {}]", self.min, self.max)));
        }
        if self.max < self.min {
            return Err(Error::Config(format!("temperature max {} below min {}", self.max, self.min)));
        }
        Ok(())
    }

    /// Grid points in increasing order; endpoints are exact.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k == n - 1 {
                    return self.max;
                }
                let s = k as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + s * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub temperature: TemperatureGrid,
    /// Measurement orders as 1-based labels; defaults to the identity order.
    #[serde(default)]
    pub paths: Vec<String>,
    #[serde(default)]
    pub mode: MeasurementMode,
    #[serde(default)]
    pub derivative: DerivativePolicy,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.temperature.validate()?;
        self.derivative.validate()?;
        let n = self.model.sites();
        for p in self.greedy_paths()? {
            if p.len() != n {
                return Err(Error::Config(format!("path {} does not cover the {n} sites of the model", p.label())));
            }
        }
        Ok(())
    }

    pub fn greedy_paths(&self) -> Result<Vec<GreedyPath>> {
        if self.paths.is_empty() {
            return GreedyPath::identity(self.model.sites()).map(|p| vec![p]).map_err(config_error);
        }
        self.paths.iter().map(|s| GreedyPath::parse(s).map_err(config_error)).collect()
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Usage(m) => Error::Config(m),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2A: &str = r#"
paths = ["12", "21"]
mode = "sld_eigenbasis"

[model]
kind = "two_qubit"
b1 = 3.0
b2 = 1.0
jx = 1.0
jy = 1.0
jz = 2.0

[temperature]
min = 0.1
max = 100.0
count = 5
spacing = "log"

[derivative]
relative_step = 1e-4
"#;

    #[test]
    fn parses_two_qubit_config() {
        let c = ExperimentConfig::from_toml(FIG2A).unwrap();
        assert_eq!(c.model, ModelSpec::TwoQubit { b1: 3.0, b2: 1.0, jx: 1.0, jy: 1.0, jz: 2.0 });
        assert_eq!(c.greedy_paths().unwrap().len(), 2);
        assert!(c.derivative.richardson);
        let pts = c.temperature.points();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], 0.1);
        assert_eq!(pts[4], 100.0);
        assert!((pts[2] - 10.0_f64.sqrt()).abs() < 1e-12);
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_count = FIG2A.replace("count = 5", "count = 1");
        assert!(matches!(ExperimentConfig::from_toml(&bad_count), Err(Error::Config(_))));
        let bad_min = FIG2A.replace("min = 0.1", "min = 0.0");
        assert!(matches!(ExperimentConfig::from_toml(&bad_min), Err(Error::Config(_))));
        let bad_path = FIG2A.replace(r#"["12", "21"]"#, r#"["123"]"#);
        assert!(matches!(ExperimentConfig::from_toml(&bad_path), Err(Error::Config(_))));
        let unknown = FIG2A.replace("kind = \"two_qubit\"", "kind = \"ladder\"");
        assert!(matches!(ExperimentConfig::from_toml(&unknown), Err(Error::Config(_))));
        let typo = FIG2A.replace("b2 = 1.0", "bb2 = 1.0");
        assert!(matches!(ExperimentConfig::from_toml(&typo), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_toml("not toml ["), Err(Error::Config(_))));
    }

    #[test]
    fn linear_grid() {
        let g = TemperatureGrid { min: 1.0, max: 2.0, count: 3, spacing: Spacing::Linear };
        assert_eq!(g.points(), vec![1.0, 1.5, 2.0]);
    }
}
