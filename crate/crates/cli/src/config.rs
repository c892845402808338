use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use torsionlab::model::CircleModel;
use torsionlab::ModelConfig;

use crate::catalog::Experiment;
use crate::error::ConfigError;

/// `u` values for the experiment; an empty list selects the experiment's default grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub u: Vec<f64>,
    /// Where `asymptotics` evaluates `S` directly for comparison with the fit.
    pub reference: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { u: vec![], reference: 25.0 }
    }
}

/// Limits for the pass/fail assertions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    /// `|S − 1|` for `torsion`
    pub s: f64,
    /// `max |S/S_ref − 1|` for `anomaly-sweep`
    pub sweep: f64,
    /// Minimum `R²` of the small-eigenvalue decay fit.
    pub gap_r2: f64,
    /// `|τ(Int_sm)(u/π)^e − 1|` at the largest `u` for `whs`
    pub whs_final: f64,
    pub a2_relative: f64,
    pub a1_relative: f64,
    /// `|S_fit − S_direct|` for `asymptotics`
    pub s_from_a0: f64,
    /// `|a_L + a_−L|` for `density`
    pub density: f64,
    /// `|FT|` for a system against itself.
    pub identical_ft: f64,
    /// `|S²_A/S²_B − 1|` from the ratio test.
    pub ratio: f64,
    /// `|S′(f)S′(−f) − 1|`
    pub sign_root: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            s: 1e-3,
            sweep: 1e-3,
            gap_r2: 0.99,
            whs_final: 1e-3,
            a2_relative: 2e-2,
            a1_relative: 2e-2,
            s_from_a0: 1e-2,
            density: 1e-8,
            identical_ft: 1e-6,
            ratio: 1e-2,
            sign_root: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Members of the homotopy `b_t = e^{tψ} b`, `t ∈ [0, 1]`.
    pub b_members: usize,
    /// Amplitudes of `1 + ε cos 2x` in the base metric.
    pub metric_amplitudes: Vec<f64>,
    /// Adds the four-critical-point variant of `f`.
    pub f_variant: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { b_members: 5, metric_amplitudes: vec![0.0, 0.1, 0.2], f_variant: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityConfig {
    /// Number of random local symbols.
    pub symbols: usize,
    pub seed: u64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self { symbols: 10, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub model: ModelConfig,
    /// Second system for `relative-ft`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_b: Option<ModelConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let mut config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if config.grid.u.is_empty() {
            config.grid.u = config.experiment.default_grid();
        }
        if config.experiment == Experiment::RelativeFt && config.model_b.is_none() {
            config.model_b = Some(default_partner(&config.model));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    /// Turns validation residuals into errors on every model section.
    pub fn make_strict(&mut self) {
        self.model.validation.strict = true;
        if let Some(b) = &mut self.model_b {
            b.validation.strict = true;
        }
    }

    /// Builds every model once and checks the grid, so that a bad file fails before any work.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (k, u) in self.grid.u.iter().enumerate() {
            if !(u.is_finite() && *u > 0.0) {
                return Err(ConfigError::field(format!("grid.u[{k}]"), format!("{u} is not a positive number")));
            }
        }
        if !(self.grid.reference.is_finite() && self.grid.reference > 0.0) {
            return Err(ConfigError::field("grid.reference", "must be a positive number"));
        }
        if self.experiment != Experiment::Density {
            check_model("model", &self.model)?;
        }
        if let Some(b) = &self.model_b {
            check_model("model_b", b)?;
        }
        let min_points = self.experiment.min_grid_points();
        if self.grid.u.len() < min_points {
            return Err(ConfigError::field("grid.u", format!("{} needs at least {min_points} values", self.experiment.name())));
        }
        if self.experiment == Experiment::AnomalySweep && self.sweep.b_members == 0 && self.sweep.metric_amplitudes.is_empty() {
            return Err(ConfigError::field("sweep", "the sweep has no members"));
        }
        Ok(())
    }
}

fn check_model(section: &str, config: &ModelConfig) -> Result<(), ConfigError> {
    CircleModel::<f64>::new(config).map(|_| ()).map_err(|source| ConfigError::Model { section: section.into(), source })
}

/// `f = cos x + 0.15 sin 2x`: same critical counts as the cosine with shifted, unequal curvatures.
pub fn default_partner(model: &ModelConfig) -> ModelConfig {
    let mut b = model.clone();
    b.morse.preset = torsionlab::model::MorsePreset::Fourier;
    b.morse.cos = vec![1.0];
    b.morse.sin = vec![0.0, 0.15];
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_materialized() {
        let c = ExperimentConfig::from_toml("experiment = \"gap\"").unwrap();
        assert_eq!(c.grid.u, Experiment::Gap.default_grid());
        assert_eq!(c.model.discretization.n, ModelConfig::default().discretization.n);
        let echo = toml::to_string(&c).unwrap();
        assert!(echo.contains("[tolerances]"));
        assert_eq!(ExperimentConfig::from_toml(&echo).unwrap(), c);
    }

    #[test]
    fn shipped_configs_validate() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = Vec::new();
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            let c = ExperimentConfig::load(&path).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(path.file_stem().unwrap(), c.experiment.name());
            seen.push(c.experiment);
        }
        assert_eq!(seen.len(), Experiment::ALL.len());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(ExperimentConfig::from_toml("experiment = \"gap\"\nspeed = 3"), Err(ConfigError::Parse(_))));
        assert!(ExperimentConfig::from_toml("experiment = \"gap\"\n[model.morse]\nradius = 0.4").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"").is_err());
    }

    #[test]
    fn bad_grid_names_the_entry() {
        let c = ExperimentConfig::from_toml("experiment = \"torsion\"\n[grid]\nu = [25.0, -1.0]").unwrap();
        match c.validate() {
            Err(ConfigError::Field { field, .. }) => assert_eq!(field, "grid.u[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn relative_runs_get_a_partner() {
        let c = ExperimentConfig::from_toml("experiment = \"relative-ft\"").unwrap();
        let b = c.model_b.unwrap();
        assert_eq!(b.morse.sin, vec![0.0, 0.15]);
    }
}
