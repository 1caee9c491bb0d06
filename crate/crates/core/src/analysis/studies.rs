use rayon::prelude::*;
use serde::Serialize;

use super::window::{default_search_range, extract_window_with, WindowReport};
use super::{AnalysisOptions, Probe};
use crate::error::{Error, Result};
use crate::model::{ChainSpec, EmitterChain, PhaseModel, K0};

/// Spacing interval searched by [`optimize_separation`], in wavelengths.
pub const DEFAULT_D_RANGE: (f64, f64) = (0.001, 0.5);

/// Spacings with `|sin(k₀d)|` below this are Bragg points and never probed.
const BRAGG_GUARD: f64 = 1e-6;

/// Widths closer than this are treated as equal when picking the optimum.
const TIE_TOL: f64 = 1e-6;

fn window_of(chain: &EmitterChain, threshold: f64, model: PhaseModel, opts: &AnalysisOptions) -> Result<WindowReport> {
    extract_window_with(chain, threshold, default_search_range(chain), model, opts)
}

/// Window width of uniform chains of each length in `n_list` at spacing `d`.
pub fn bandwidth_vs_n(
    d: f64,
    n_list: &[usize],
    threshold: f64,
    model: PhaseModel,
    opts: &AnalysisOptions,
) -> Result<Vec<(usize, f64)>> {
    n_list
        .par_iter()
        .map(|&n| {
            let chain = EmitterChain::uniform(n, d, 1.0, 0.0)?;
            Ok((n, window_of(&chain, threshold, model, opts)?.width))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub d_range: (f64, f64),
    /// Number of spacings in the coarse scan.
    pub scan_points: usize,
    /// Final bracket size of the golden-section refinement.
    pub d_tol: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { d_range: DEFAULT_D_RANGE, scan_points: 400, d_tol: 1e-5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub n: usize,
    pub d_star: f64,
    pub width_star: f64,
    pub evaluations: usize,
}

/// Spacing that maximises the window width of an `n`-atom uniform chain.
/// Spacings without any window score zero. Under the rigid phase model the
/// smaller of two mirror-equivalent spacings is reported.
pub fn optimize_separation(
    n: usize,
    threshold: f64,
    model: PhaseModel,
    opts: &AnalysisOptions,
    search: &OptimizerOptions,
) -> Result<OptimizationResult> {
    if n < 2 {
        return Err(Error::invalid("n", "spacing optimisation needs at least 2 atoms"));
    }
    let (a, b) = search.d_range;
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::invalid("d_range", "must satisfy 0 < min < max"));
    }
    if search.scan_points < 3 {
        return Err(Error::invalid("scan_points", "at least 3 spacings are needed"));
    }
    let width = |d: f64| -> Result<f64> {
        if (K0 * d).sin().abs() < BRAGG_GUARD {
            return Ok(0.0);
        }
        let chain = EmitterChain::uniform(n, d, 1.0, 0.0)?;
        match window_of(&chain, threshold, model, opts) {
            Ok(w) => Ok(w.width),
            Err(Error::NoWindow { .. }) => Ok(0.0),
            Err(e) => Err(e),
        }
    };

    let m = search.scan_points;
    let h = (b - a) / m as f64;
    let ds: Vec<f64> = (0..m).map(|i| a + (i as f64 + 0.5) * h).collect();
    let widths = ds.par_iter().map(|&d| width(d)).collect::<Result<Vec<_>>>()?;
    let top = widths.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return Err(Error::NoWindow { threshold, lo: a, hi: b });
    }
    let best = (0..m).find(|&i| widths[i] >= top - TIE_TOL).unwrap_or(0);
    if widths[best] <= 0.0 {
        return Err(Error::NoWindow { threshold, lo: a, hi: b });
    }

    let mut evaluations = m;
    let (mut lo, mut hi) = ((ds[best] - h).max(a), (ds[best] + h).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut e = lo + g * (hi - lo);
    let (mut wc, mut we) = (width(c)?, width(e)?);
    evaluations += 2;
    while hi - lo > search.d_tol {
        if wc > we {
            hi = e;
            e = c;
            we = wc;
            c = hi - g * (hi - lo);
            wc = width(c)?;
        } else {
            lo = c;
            c = e;
            wc = we;
            e = lo + g * (hi - lo);
            we = width(e)?;
        }
        evaluations += 1;
    }
    let (d_star, width_star) = [(ds[best], widths[best]), (c, wc), (e, we)]
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 + TIE_TOL { x } else { acc });
    // with rigid phases d and λ₀/2 - d give mirror-image spectra of equal width
    let mirror = 0.5 - d_star;
    let d_star = if model.is_rigid() && mirror < d_star && mirror >= a { mirror } else { d_star };
    Ok(OptimizationResult { n, d_star, width_star, evaluations })
}

/// Windows of frequency-modulated chains for each step in `delta_list`.
pub fn modulation_study(
    n: usize,
    d: f64,
    delta_list: &[f64],
    threshold: f64,
    model: PhaseModel,
    opts: &AnalysisOptions,
) -> Result<Vec<(f64, WindowReport)>> {
    delta_list
        .par_iter()
        .map(|&delta| {
            let chain = EmitterChain::modulated(n, d, delta, 1.0, 0.0)?;
            Ok((delta, window_of(&chain, threshold, model, opts)?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipationRow {
    /// Index into the scenario list.
    pub scenario: usize,
    pub gamma_ext: f64,
    /// Lossless window the minimum is taken over.
    pub lo: f64,
    pub hi: f64,
    pub min_r: f64,
}

/// Minimum reflectivity over each scenario's lossless window once external
/// loss is switched on.
pub fn dissipation_study(
    scenarios: &[ChainSpec],
    gamma_list: &[f64],
    threshold: f64,
    model: PhaseModel,
    opts: &AnalysisOptions,
) -> Result<Vec<DissipationRow>> {
    let references = scenarios
        .par_iter()
        .map(|spec| window_of(&spec.build(0.0)?, threshold, model, opts))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, f64)> = (0..scenarios.len()).flat_map(|s| gamma_list.iter().map(move |&g| (s, g))).collect();
    cells
        .par_iter()
        .map(|&(s, gamma_ext)| {
            let reference = &references[s];
            let chain = scenarios[s].build(gamma_ext)?;
            let probe = Probe::new(&chain, model, opts.engine)?;
            let steps = ((reference.hi - reference.lo) / opts.step).ceil() as usize;
            let mut min_r = f64::INFINITY;
            for i in 0..=steps {
                let x = (reference.lo + i as f64 * opts.step).min(reference.hi);
                min_r = min_r.min(probe.reflectivity(x)?);
            }
            Ok(DissipationRow { scenario: s, gamma_ext, lo: reference.lo, hi: reference.hi, min_r })
        })
        .collect()
}
