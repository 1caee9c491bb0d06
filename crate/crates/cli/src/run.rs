//! Scenario execution and the result envelope.

use atomirror::analysis::{
    default_search_range, dissipation_study, extract_window_with, find_zeros_with, optimize_separation, DissipationRow,
    OptimizationResult, WindowReport, ZeroCrossing,
};
use atomirror::eigen::{bandgap_for_spacing, build_heff, eigenmodes, incident_vector, EigenmodeSet, GapReport};
use atomirror::{EmitterChain, Engine, Error as CoreError, PhaseModel, ScatterPoint};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::output::{Cell, Table};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub config_hash: String,
}

impl Provenance {
    pub fn for_config(config: &ScenarioConfig) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config_hash: config.hash(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeFailure {
    pub delta_omega: f64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EngineSpectrum {
    pub engine: Engine,
    pub points: Vec<ScatterPoint>,
    /// Grid points the engine could not evaluate; they are absent from `points`.
    pub failures: Vec<ProbeFailure>,
    /// Grid points the modal engine handed to the exact solver.
    pub exact_fallbacks: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EngineDeviation {
    pub engine: Engine,
    pub max_abs_dr: f64,
    pub max_abs_dt: f64,
    pub compared: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSummary {
    pub modes: EigenmodeSet,
    pub trace: num_complex::Complex64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandgap: Option<GapReport>,
}

/// Headline number compared against an expectation in `reproduce --check`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: String,
    pub pass: bool,
}

impl Check {
    pub fn near(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self { name: name.into(), value, expected: format!("{target} ± {tol:e}"), pass: (value - target).abs() <= tol }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, expected: format!("[{lo}, {hi}]"), pass: (lo..=hi).contains(&value) }
    }

    pub fn holds(name: &str, value: f64, expected: &str, pass: bool) -> Self {
        Self { name: name.into(), value, expected: expected.into(), pass }
    }
}

/// Figure panel an envelope was produced for.
#[derive(Debug, Clone, Serialize)]
pub struct FigureInfo {
    pub id: String,
    pub title: String,
    pub parameters: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultEnvelope {
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<FigureInfo>,
    pub config: ScenarioConfig,
    pub spectra: Vec<EngineSpectrum>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cross_engine: Vec<EngineDeviation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeros: Option<Vec<ZeroCrossing>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimize: Option<Vec<OptimizationResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dissipation: Option<Vec<DissipationRow>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Data files written next to the envelope.
    pub files: Vec<String>,
}

impl ResultEnvelope {
    pub fn new(config: ScenarioConfig) -> Self {
        Self {
            provenance: Provenance::for_config(&config),
            figure: None,
            config,
            spectra: Vec::new(),
            cross_engine: Vec::new(),
            window: None,
            zeros: None,
            eigen: None,
            optimize: None,
            dissipation: None,
            checks: Vec::new(),
            notes: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serialises")
    }
}

/// Envelope plus the CSV tables that accompany it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub envelope: ResultEnvelope,
    pub tables: Vec<Table>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration rejected: {0}")]
    Config(CoreError),
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } => RunError::Config(e),
            _ => RunError::Numerical(e),
        }
    }
}

/// Which parts of a scenario to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plan {
    pub spectra: bool,
    pub window: bool,
    pub zeros: bool,
    pub eigen: bool,
    pub optimize: bool,
    pub dissipation: bool,
}

impl Plan {
    pub const NOTHING: Plan =
        Plan { spectra: false, window: false, zeros: false, eigen: false, optimize: false, dissipation: false };

    pub fn from_config(config: &ScenarioConfig) -> Self {
        let a = &config.analysis;
        Plan {
            spectra: true,
            window: a.window,
            zeros: a.zeros,
            eigen: a.eigen,
            optimize: a.optimize.is_some(),
            dissipation: a.dissipation.is_some(),
        }
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    run_plan(config, Plan::from_config(config))
}

pub fn run_plan(config: &ScenarioConfig, plan: Plan) -> Result<RunOutput, RunError> {
    let chain = config.chain()?;
    let model = config.phase_model;
    let opts = config.analysis.options();
    let range = config.search_range.unwrap_or_else(|| default_search_range(&chain));
    let stem = config.stem();
    let mut env = ResultEnvelope::new(config.clone());
    let mut tables = Vec::new();

    if plan.spectra {
        let grid = config.frequency_grid()?;
        for engine in config.engine.engines() {
            let spectrum = engine_spectrum(engine, &chain, grid.values(), model);
            tables.push(Table::spectrum(format!("{stem}_{}", engine.name()), &spectrum.points));
            env.spectra.push(spectrum);
        }
        if env.spectra.len() > 1 {
            env.cross_engine = cross_engine(&env.spectra);
        }
    }

    if plan.window {
        match extract_window_with(&chain, config.threshold, range, model, &opts) {
            Ok(w) => env.window = Some(w),
            Err(e @ CoreError::NoWindow { .. }) => env.notes.push(e.to_string()),
            Err(e) => return Err(e.into()),
        }
    }

    if plan.zeros {
        let zeros = find_zeros_with(&chain, range, model, &opts)?;
        let mut table = Table::new(format!("{stem}_zeros"), &["delta_omega", "residual_r", "phase_jump"]);
        for z in &zeros {
            table.push(vec![z.delta_omega.into(), z.residual_r.into(), z.phase_jump.into()]);
        }
        tables.push(table);
        env.zeros = Some(zeros);
    }

    if plan.eigen {
        let summary = eigen_summary(&chain, model)?;
        tables.push(eigen_table(format!("{stem}_eigen"), &summary.modes));
        env.eigen = Some(summary);
    }

    if plan.optimize {
        let request = config.analysis.optimize.clone().unwrap_or_default();
        let search = request.options();
        let rows = request
            .n_list
            .par_iter()
            .map(|&n| optimize_separation(n, config.threshold, model, &opts, &search))
            .collect::<Result<Vec<_>, _>>()?;
        let mut table = Table::new(format!("{stem}_optimize"), &["n", "d_star", "width_star", "evaluations"]);
        for r in &rows {
            table.push(vec![r.n.into(), r.d_star.into(), r.width_star.into(), r.evaluations.into()]);
        }
        tables.push(table);
        env.optimize = Some(rows);
    }

    if plan.dissipation {
        let gammas = config.analysis.dissipation.clone().unwrap_or_else(|| vec![0.0, 0.01, 0.1]);
        let rows = dissipation_study(&[config.chain_spec()], &gammas, config.threshold, model, &opts)?;
        tables.push(dissipation_table(format!("{stem}_dissipation"), &rows));
        env.dissipation = Some(rows);
    }

    env.files = tables.iter().map(Table::file_name).collect();
    Ok(RunOutput { envelope: env, tables })
}

/// Evaluates every grid point independently; failures are recorded, not raised.
pub fn engine_spectrum(engine: Engine, chain: &EmitterChain, grid: &[f64], model: PhaseModel) -> EngineSpectrum {
    let prepared = engine.prepare(chain, model);
    let exact = Engine::Exact.prepare(chain, model).expect("exact engine needs no preparation");
    let results: Vec<(f64, Result<_, CoreError>, bool)> = grid
        .par_iter()
        .map(|&w| {
            let first = match &prepared {
                Ok(p) => p.scatter_nudged(w),
                Err(e) => Err(e.clone()),
            };
            match first {
                Err(CoreError::ModalUnavailable) => (w, exact.scatter_nudged(w), true),
                other => (w, other, false),
            }
        })
        .collect();
    let mut spectrum = EngineSpectrum { engine, points: Vec::new(), failures: Vec::new(), exact_fallbacks: 0 };
    for (w, result, fell_back) in results {
        spectrum.exact_fallbacks += fell_back as usize;
        match result {
            Ok(c) => spectrum.points.push(ScatterPoint::new(w, c)),
            Err(e) => spectrum.failures.push(ProbeFailure { delta_omega: w, error: e.to_string() }),
        }
    }
    spectrum
}

/// Largest amplitude differences of each engine from the exact one, over
/// the grid points both evaluated.
pub fn cross_engine(spectra: &[EngineSpectrum]) -> Vec<EngineDeviation> {
    let Some(reference) = spectra.iter().find(|s| s.engine == Engine::Exact) else {
        return Vec::new();
    };
    spectra
        .iter()
        .filter(|s| s.engine != Engine::Exact)
        .map(|s| {
            let mut dev = EngineDeviation { engine: s.engine, max_abs_dr: 0.0, max_abs_dt: 0.0, compared: 0 };
            let mut j = 0;
            for p in &s.points {
                while j < reference.points.len() && reference.points[j].delta_omega < p.delta_omega {
                    j += 1;
                }
                if let Some(q) = reference.points.get(j).filter(|q| q.delta_omega == p.delta_omega) {
                    dev.max_abs_dr = dev.max_abs_dr.max((p.r - q.r).norm());
                    dev.max_abs_dt = dev.max_abs_dt.max((p.t - q.t).norm());
                    dev.compared += 1;
                }
            }
            dev
        })
        .collect()
}

pub fn eigen_summary(chain: &EmitterChain, model: PhaseModel) -> Result<EigenSummary, RunError> {
    let h = build_heff(chain, model, true);
    let modes = eigenmodes(&h, &incident_vector(chain, model.wavevector(0.0)))?;
    let bandgap = chain.uniform_spacing().and_then(|d| bandgap_for_spacing(d).ok());
    Ok(EigenSummary { modes, trace: h.trace(), bandgap })
}

pub fn eigen_table(name: String, modes: &EigenmodeSet) -> Table {
    let mut table = Table::new(name, &["index", "re_lambda", "im_lambda", "radiance", "re_overlap", "im_overlap"]);
    for (i, m) in modes.modes.iter().enumerate() {
        let radiance = serde_json::to_value(m.radiance).ok().and_then(|v| v.as_str().map(str::to_owned));
        table.push(vec![
            i.into(),
            m.lambda.re.into(),
            m.lambda.im.into(),
            Cell::Text(radiance.unwrap_or_default()),
            m.overlap.re.into(),
            m.overlap.im.into(),
        ]);
    }
    table
}

pub fn dissipation_table(name: String, rows: &[DissipationRow]) -> Table {
    let mut table = Table::new(name, &["scenario", "gamma_ext", "window_lo", "window_hi", "min_r"]);
    for r in rows {
        table.push(vec![r.scenario.into(), r.gamma_ext.into(), r.lo.into(), r.hi.into(), r.min_r.into()]);
    }
    table
}
