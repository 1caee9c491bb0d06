//! JSON scenario configuration.

use std::fmt;

use atomirror::analysis::{AnalysisOptions, OptimizerOptions, DEFAULT_D_RANGE, DEFAULT_THRESHOLD};
use atomirror::{ChainSpec, EmitterChain, Engine, Error as CoreError, FrequencyGrid, PhaseModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Probe grid `[min, max, count]` in units of Γ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64, usize)", into = "(f64, f64, usize)")]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { min: -3.0, max: 3.0, count: 601 }
    }
}

impl From<(f64, f64, usize)> for GridSpec {
    fn from((min, max, count): (f64, f64, usize)) -> Self {
        Self { min, max, count }
    }
}

impl From<GridSpec> for (f64, f64, usize) {
    fn from(g: GridSpec) -> Self {
        (g.min, g.max, g.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineChoice {
    #[default]
    All,
    Exact,
    Modal,
    Recurrence,
    TransferMatrix,
}

impl EngineChoice {
    pub fn engines(self) -> Vec<Engine> {
        match self {
            EngineChoice::All => Engine::ALL.to_vec(),
            EngineChoice::Exact => vec![Engine::Exact],
            EngineChoice::Modal => vec![Engine::Modal],
            EngineChoice::Recurrence => vec![Engine::Recurrence],
            EngineChoice::TransferMatrix => vec![Engine::TransferMatrix],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeRequest {
    pub n_list: Vec<usize>,
    pub d_range: (f64, f64),
    pub scan_points: usize,
}

impl Default for OptimizeRequest {
    fn default() -> Self {
        let search = OptimizerOptions::default();
        Self { n_list: vec![10, 20, 30, 40, 50, 60], d_range: DEFAULT_D_RANGE, scan_points: search.scan_points }
    }
}

impl OptimizeRequest {
    pub fn options(&self) -> OptimizerOptions {
        OptimizerOptions { d_range: self.d_range, scan_points: self.scan_points, ..Default::default() }
    }
}

/// Which analyses to run on top of the spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisRequest {
    pub window: bool,
    pub zeros: bool,
    pub eigen: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeRequest>,
    /// External loss rates for the dissipation table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dissipation: Option<Vec<f64>>,
    /// Engine behind window, zero and dissipation probes.
    pub engine: Engine,
    pub step: f64,
}

impl Default for AnalysisRequest {
    fn default() -> Self {
        let opts = AnalysisOptions::default();
        Self {
            window: true,
            zeros: false,
            eigen: false,
            optimize: None,
            dissipation: None,
            engine: opts.engine,
            step: opts.step,
        }
    }
}

impl AnalysisRequest {
    pub fn options(&self) -> AnalysisOptions {
        AnalysisOptions { engine: self.engine, step: self.step, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

/// One scattering scenario. Separations in λ₀, rates and detunings in Γ₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detunings: Option<Vec<f64>>,
    #[serde(default = "unit_rate")]
    pub gamma1d: f64,
    #[serde(default)]
    pub gamma_ext: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub engine: EngineChoice,
    #[serde(default)]
    pub phase_model: PhaseModel,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_range: Option<(f64, f64)>,
    #[serde(default)]
    pub analysis: AnalysisRequest,
    #[serde(default)]
    pub output: OutputSpec,
}

fn unit_rate() -> f64 {
    1.0
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration:\n{}", list(.0))]
    Invalid(Vec<FieldError>),
}

fn list(errors: &[FieldError]) -> String {
    errors.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n")
}

impl ConfigError {
    /// Names of every field mentioned by the error.
    pub fn fields(&self) -> Vec<&str> {
        match self {
            ConfigError::Parse { .. } => Vec::new(),
            ConfigError::Invalid(errors) => errors.iter().map(|e| e.field.as_str()).collect(),
        }
    }
}

/// Parses and validates a JSON scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

impl ScenarioConfig {
    /// Uniform chain of `n` atoms at spacing `d` with every other field defaulted.
    pub fn uniform(n: usize, d: f64) -> Self {
        Self {
            n: Some(n),
            d: Some(d),
            delta_step: None,
            positions: None,
            detunings: None,
            gamma1d: 1.0,
            gamma_ext: 0.0,
            grid: GridSpec::default(),
            engine: EngineChoice::default(),
            phase_model: PhaseModel::default(),
            threshold: DEFAULT_THRESHOLD,
            search_range: None,
            analysis: AnalysisRequest::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 of the compact serialisation; defaults are filled in before
    /// hashing, so omitted and explicit defaults hash alike.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Reports every violated precondition at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        let mut fail = |field: &str, reason: &str| {
            errors.push(FieldError { field: field.into(), reason: reason.into() });
        };

        if let Some(positions) = &self.positions {
            if self.d.is_some() || self.delta_step.is_some() {
                fail("positions", "explicit positions cannot be combined with d or delta_step");
            }
            if positions.is_empty() {
                fail("positions", "at least one position is required");
            }
            if let Some(n) = self.n {
                if n != positions.len() {
                    fail("n", "does not match the number of positions");
                }
            }
            match &self.detunings {
                Some(det) if det.len() != positions.len() => fail("detunings", "must have one entry per position"),
                Some(det) if det.iter().any(|x| !x.is_finite()) => fail("detunings", "must be finite"),
                _ => {}
            }
        } else {
            match self.n {
                None => fail("n", "required unless positions are given"),
                Some(0) => fail("n", "must be at least 1"),
                _ => {}
            }
            match self.d {
                None => fail("d", "required unless positions are given"),
                Some(d) if !(d.is_finite() && d > 0.0) => fail("d", "must be positive and finite"),
                _ => {}
            }
            if self.delta_step.is_some_and(|x| !x.is_finite()) {
                fail("delta_step", "must be finite");
            }
            if self.detunings.is_some() {
                fail("detunings", "only allowed together with positions");
            }
        }
        if !(self.gamma1d.is_finite() && self.gamma1d > 0.0) {
            fail("gamma1d", "must be positive and finite");
        }
        if !(self.gamma_ext.is_finite() && self.gamma_ext >= 0.0) {
            fail("gamma_ext", "must be non-negative and finite");
        }
        let g = self.grid;
        if g.count == 0 || !(g.min.is_finite() && g.max.is_finite()) || (g.count > 1 && g.min >= g.max) {
            fail("grid", "needs finite min < max and count >= 1");
        }
        if self.phase_model.validate().is_err() {
            fail("phase_model", "dispersive ratio must be positive and finite");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            fail("threshold", "must lie strictly between 0 and 1");
        }
        if let Some((lo, hi)) = self.search_range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                fail("search_range", "must be a finite interval with min < max");
            }
        }
        let a = &self.analysis;
        if !(a.step.is_finite() && a.step > 0.0) {
            fail("analysis.step", "must be positive and finite");
        }
        if let Some(opt) = &a.optimize {
            if opt.n_list.is_empty() || opt.n_list.iter().any(|&n| n < 2) {
                fail("analysis.optimize.n_list", "needs at least one chain length, each >= 2");
            }
            let (lo, hi) = opt.d_range;
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                fail("analysis.optimize.d_range", "must satisfy 0 < min < max");
            }
            if opt.scan_points < 3 {
                fail("analysis.optimize.scan_points", "must be at least 3");
            }
        }
        if let Some(gammas) = &a.dissipation {
            if gammas.is_empty() || gammas.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
                fail("analysis.dissipation", "needs non-negative finite loss rates");
            }
        }

        if errors.is_empty() {
            // the builders have the final say on chain geometry
            if let Err(CoreError::InvalidParameter { name, reason }) = self.chain() {
                errors.push(FieldError { field: name, reason });
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    pub fn chain_spec(&self) -> ChainSpec {
        if let Some(positions) = &self.positions {
            let detunings = self.detunings.clone().unwrap_or_else(|| vec![0.0; positions.len()]);
            return ChainSpec::Explicit { positions: positions.clone(), detunings, gamma1d: self.gamma1d };
        }
        let (n, d) = (self.n.unwrap_or(0), self.d.unwrap_or(0.0));
        match self.delta_step {
            Some(delta_step) => ChainSpec::Modulated { n, d, delta_step, gamma1d: self.gamma1d },
            None => ChainSpec::Uniform { n, d, gamma1d: self.gamma1d },
        }
    }

    pub fn chain(&self) -> atomirror::Result<EmitterChain> {
        self.chain_spec().build(self.gamma_ext)
    }

    pub fn frequency_grid(&self) -> atomirror::Result<FrequencyGrid> {
        FrequencyGrid::linspace(self.grid.min, self.grid.max, self.grid.count)
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or("scenario")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_serialises_as_triple() {
        let json = serde_json::to_string(&GridSpec::default()).unwrap();
        assert_eq!(json, "[-3.0,3.0,601]");
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let err = parse_config(r#"{"n": 5, "d": 0.25, "spacing": 1}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn every_violation_is_reported() {
        let err = parse_config(r#"{"n": 0, "d": -1, "threshold": 1.5, "grid": [1, -1, 5]}"#).unwrap_err();
        let fields = err.fields();
        for f in ["n", "d", "threshold", "grid"] {
            assert!(fields.contains(&f), "{fields:?}");
        }
    }

    #[test]
    fn explicit_positions_must_increase() {
        let err = parse_config(r#"{"positions": [0.0, 0.5, 0.2]}"#).unwrap_err();
        assert_eq!(err.fields(), vec!["positions"], "{err}");
    }

    #[test]
    fn explicit_chain_defaults_detunings_to_zero() {
        let c = parse_config(r#"{"positions": [0.0, 0.3]}"#).unwrap();
        let chain = c.chain().unwrap();
        assert!(chain.atoms().iter().all(|a| a.detuning == 0.0));
    }

    #[test]
    fn dispersive_phase_model_parses() {
        let c = parse_config(r#"{"n": 2, "d": 0.25, "phase_model": {"dispersive": 1e6}}"#).unwrap();
        assert_eq!(c.phase_model, PhaseModel::Dispersive(1e6));
        let err = parse_config(r#"{"n": 2, "d": 0.25, "phase_model": {"dispersive": -1}}"#).unwrap_err();
        assert_eq!(err.fields(), vec!["phase_model"]);
    }
}
