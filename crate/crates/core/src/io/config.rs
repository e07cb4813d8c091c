//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};
use crate::rom::{BasisStrategy, Pairing, ProblemSpec, Tolerances, TrainingOptions};
use crate::sampling::LhsMode;

/// Per-basis tolerance lists; the grid is their Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceGrid {
    pub master: Vec<f64>,
    pub deim: Vec<f64>,
    pub slave: Vec<f64>,
}

impl ToleranceGrid {
    /// Triples with the master tolerance varying slowest.
    pub fn triples(&self) -> Vec<Tolerances> {
        let mut out = Vec::with_capacity(self.master.len() * self.deim.len() * self.slave.len());
        for &master in &self.master {
            for &deim in &self.deim {
                for &slave in &self.slave {
                    out.push(Tolerances { master, deim, slave });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub n_train: usize,
    pub seed: u64,
    #[serde(default)]
    pub sampling: LhsMode,
    #[serde(default)]
    pub pairing: Pairing,
    #[serde(default)]
    pub basis: BasisStrategy,
    #[serde(default)]
    pub reassemble_loads: bool,
    /// A single tolerance triple; exclusive with `grid`.
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub grid: Option<ToleranceGrid>,
}

impl TrainingConfig {
    pub fn options(&self) -> TrainingOptions {
        TrainingOptions {
            n_train: self.n_train,
            seed: self.seed,
            sampling: self.sampling,
            pairing: self.pairing,
            basis: self.basis,
            reassemble_loads: self.reassemble_loads,
        }
    }

    pub fn triples(&self) -> Vec<Tolerances> {
        match (&self.tolerances, &self.grid) {
            (Some(t), _) => vec![*t],
            (None, Some(g)) => g.triples(),
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestingConfig {
    pub n_test: usize,
    pub seed: u64,
}

impl Default for TestingConfig {
    fn default() -> Self {
        TestingConfig { n_test: 5, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub training: TrainingConfig,
    #[serde(default)]
    pub testing: TestingConfig,
    /// Output directory; relative paths are taken from the config file's directory.
    pub output: PathBuf,
}

fn check_tolerance(field: &str, v: f64, errs: &mut Vec<String>) {
    if !(v > 0.0 && v < 1.0) {
        errs.push(format!("{field}: tolerance must lie in (0, 1), got {v}"));
    }
}

impl ExperimentConfig {
    /// Parses JSON, reporting the field path of the first structural error.
    pub fn from_json(text: &str) -> std::result::Result<ExperimentConfig, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path.is_empty() || path == "." {
                inner.to_string()
            } else {
                format!("{path}: {inner}")
            }
        })
    }

    /// Reads and validates a config; `output` is resolved against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RomError::io(path, e))?;
        let cfg_err = |message: String| RomError::Config { path: Some(path.into()), message };
        let mut cfg = ExperimentConfig::from_json(&text).map_err(cfg_err)?;
        cfg.validate().map_err(|errs| cfg_err(errs.join("; ")))?;
        if cfg.output.is_relative() {
            let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            cfg.output = base.join(&cfg.output);
        }
        Ok(cfg)
    }

    /// Semantic checks beyond the JSON shape; one message per violated field.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let t = &self.training;
        if t.n_train == 0 {
            errs.push("training.n_train: must be at least 1".into());
        }
        match (&t.tolerances, &t.grid) {
            (Some(_), Some(_)) => errs.push("training: give either `tolerances` or `grid`, not both".into()),
            (None, None) => errs.push("training: one of `tolerances` or `grid` is required".into()),
            (Some(tol), None) => {
                check_tolerance("training.tolerances.master", tol.master, &mut errs);
                check_tolerance("training.tolerances.deim", tol.deim, &mut errs);
                check_tolerance("training.tolerances.slave", tol.slave, &mut errs);
            }
            (None, Some(g)) => {
                for (name, list) in [("master", &g.master), ("deim", &g.deim), ("slave", &g.slave)] {
                    if list.is_empty() {
                        errs.push(format!("training.grid.{name}: must not be empty"));
                    }
                    for (i, &v) in list.iter().enumerate() {
                        check_tolerance(&format!("training.grid.{name}[{i}]"), v, &mut errs);
                    }
                }
            }
        }
        if self.testing.n_test == 0 {
            errs.push("testing.n_test: must be at least 1".into());
        }
        for (side, model) in [("master", &self.problem.master), ("slave", &self.problem.slave)] {
            for (i, p) in model.parameters.params.iter().enumerate() {
                let [lo, hi] = p.range;
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    errs.push(format!("problem.{side}.parameters[{i}].range: need finite lo <= hi, got [{lo}, {hi}]"));
                }
            }
            if model.mesh.subdivisions.contains(&0) {
                errs.push(format!("problem.{side}.mesh.subdivisions: entries must be positive"));
            }
        }
        if self.problem.is_unsteady() {
            match self.problem.time {
                None => errs.push("problem.time: required when a model is time dependent".into()),
                Some(ts) => {
                    if !(ts.dt > 0.0 && ts.dt.is_finite()) {
                        errs.push(format!("problem.time.dt: must be positive, got {}", ts.dt));
                    }
                    if ts.steps == 0 {
                        errs.push("problem.time.steps: must be at least 1".into());
                    }
                }
            }
        }
        if self.output.as_os_str().is_empty() {
            errs.push("output: must not be empty".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rom::problems::steady_reaction_diffusion;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            problem: steady_reaction_diffusion(2, 2, 1, 1),
            training: TrainingConfig {
                n_train: 3,
                seed: 7,
                sampling: LhsMode::default(),
                pairing: Pairing::Paired,
                basis: BasisStrategy::Pod,
                reassemble_loads: false,
                tolerances: Some(Tolerances::uniform(1e-4)),
                grid: None,
            },
            testing: TestingConfig::default(),
            output: "out".into(),
        }
    }

    #[test]
    fn json_round_trip() {
        let c = config();
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn tolerance_outside_unit_interval_names_field() {
        let mut c = config();
        c.training.tolerances = Some(Tolerances { master: 1e-3, deim: 1.5, slave: 0.0 });
        let errs = c.validate().unwrap_err();
        assert!(errs.iter().any(|e| e.starts_with("training.tolerances.deim")));
        assert!(errs.iter().any(|e| e.starts_with("training.tolerances.slave")));
        assert_eq!(errs.len(), 2);
    }

    #[test]
    fn type_errors_carry_paths() {
        let mut v = serde_json::to_value(config()).unwrap();
        v["training"]["n_train"] = serde_json::json!("five");
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert!(err.starts_with("training.n_train"), "{err}");
    }

    #[test]
    fn grid_is_master_major() {
        let g = ToleranceGrid { master: vec![1e-2, 1e-3], deim: vec![1e-2], slave: vec![1e-2, 1e-4] };
        let t = g.triples();
        assert_eq!(t.len(), 4);
        assert_eq!(t[1], Tolerances { master: 1e-2, deim: 1e-2, slave: 1e-4 });
        assert_eq!(t[2].master, 1e-3);
    }

    #[test]
    fn tolerances_and_grid_are_exclusive() {
        let mut c = config();
        c.training.grid = Some(ToleranceGrid { master: vec![0.1], deim: vec![0.1], slave: vec![0.1] });
        assert!(c.validate().is_err());
        c.training.tolerances = None;
        assert!(c.validate().is_ok());
    }
}
