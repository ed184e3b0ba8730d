use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::geometry::DomainSequenceSpec;
use crate::solver::{parse_source, SolveOptions, Source};
use crate::young::{parse_young, YoungFunction};

use super::GammaError;

/// Experiment description, read from JSON.
///
/// ```json
/// { "young": "power:3", "f": "const:1", "sequence": "inscribed_polygon",
///   "k": [8, 16, 32, 64], "n": 256 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub young: String,
    #[serde(default = "default_source")]
    pub f: String,
    pub sequence: String,
    pub k: Vec<u32>,
    /// Cells per side of the design box.
    pub n: usize,
    #[serde(default, rename = "box")]
    pub bbox: Option<[f64; 4]>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub dump_fields: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub grad_regularization: f64,
    pub tol_energy: f64,
    pub tol_residual: f64,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let o = SolveOptions::default();
        Self {
            grad_regularization: o.grad_regularization,
            tol_energy: o.tol_energy,
            tol_residual: o.tol_residual,
            max_iterations: o.max_iterations,
        }
    }
}

fn default_source() -> String {
    "const:1".into()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, GammaError> {
        serde_json::from_str(text).map_err(|e| GammaError::InvalidInput(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn young_function(&self) -> Result<YoungFunction, GammaError> {
        Ok(parse_young(&self.young)?)
    }

    pub fn source(&self) -> Result<Source, GammaError> {
        parse_source(&self.f).map_err(|e| GammaError::InvalidInput(e.to_string()))
    }

    pub fn solve_options(&self) -> Result<SolveOptions, GammaError> {
        let t = &self.tolerances;
        let o = SolveOptions {
            grad_regularization: t.grad_regularization,
            tol_energy: t.tol_energy,
            tol_residual: t.tol_residual,
            max_iterations: t.max_iterations,
        };
        o.validate()
            .map_err(|e| GammaError::InvalidInput(e.to_string()))?;
        Ok(o)
    }

    pub fn sequence_spec(&self) -> DomainSequenceSpec {
        let mut spec = DomainSequenceSpec::new(&self.sequence, self.k.clone(), self.n);
        spec.bbox = self.bbox;
        spec.params = self.params.clone();
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full_configs() {
        let c = ExperimentConfig::from_json(
            r#"{"young": "power:3", "sequence": "inscribed_polygon", "k": [8, 16], "n": 64}"#,
        )
        .unwrap();
        assert_eq!(c.f, "const:1");
        assert_eq!(c.solve_options().unwrap(), SolveOptions::default());
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);

        let c = ExperimentConfig::from_json(
            r#"{"young": "power:2", "f": "x1sq:1,1", "sequence": "perforated", "k": [4],
                "n": 32, "box": [0, 0, 1, 1], "params": {"radius_power": 1.5},
                "tolerances": {"tol_residual": 1e-9}, "output_dir": "out", "dump_fields": true}"#,
        )
        .unwrap();
        assert_eq!(c.tolerances.tol_residual, 1e-9);
        assert_eq!(c.tolerances.max_iterations, 200);
        assert_eq!(c.sequence_spec().params["radius_power"], 1.5);
        assert!(c.source().is_ok());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_json(
            r#"{"young": "power:3", "sequence": "x", "k": [], "n": 4, "bogus": 1}"#
        )
        .is_err());
        let c = ExperimentConfig::from_json(
            r#"{"young": "power:0.5", "sequence": "x", "k": [], "n": 4}"#,
        )
        .unwrap();
        assert!(c.young_function().is_err());
    }
}
