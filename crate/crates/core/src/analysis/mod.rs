//! Spectrum-level analysis: high-reflectivity windows, reflection zeros,
//! bandwidth sweeps, spacing and modulation studies, dissipation.

mod studies;
mod window;
mod zeros;

pub use studies::{
    bandwidth_vs_n, dissipation_study, modulation_study, optimize_separation, DissipationRow, OptimizationResult,
    OptimizerOptions, DEFAULT_D_RANGE,
};
pub use window::{band_center, default_search_range, extract_window, extract_window_with, WindowReport};
pub use zeros::{find_zeros, find_zeros_with, ZeroCrossing};

use num_complex::Complex64;

use crate::error::Result;
use crate::model::{EmitterChain, PhaseModel};
use crate::scatter::{Engine, Prepared, Spectrum};

/// Default reflectivity threshold of a high-reflection window.
pub const DEFAULT_THRESHOLD: f64 = 0.99;

/// Tuning shared by the analysis routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Engine used for every reflectivity probe.
    pub engine: Engine,
    /// Scan resolution in units of Γ₀.
    pub step: f64,
    /// A sub-threshold excursion that stays above this floor and recovers
    /// counts as an interior dip rather than a window edge.
    pub dip_floor: f64,
    /// Bisection tolerance for window edges.
    pub edge_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { engine: Engine::Recurrence, step: 1e-3, dip_floor: 0.5, edge_tol: 1e-7 }
    }
}

/// Reflection probe bound to one chain; singular probes are nudged.
pub(crate) struct Probe<'a> {
    prepared: Prepared<'a>,
}

impl<'a> Probe<'a> {
    pub(crate) fn new(chain: &'a EmitterChain, model: PhaseModel, engine: Engine) -> Result<Self> {
        model.validate()?;
        Ok(Self { prepared: engine.prepare(chain, model)? })
    }

    pub(crate) fn r(&self, x: f64) -> Result<Complex64> {
        self.prepared.reflection_nudged(x)
    }

    pub(crate) fn reflectivity(&self, x: f64) -> Result<f64> {
        self.r(x).map(|r| r.norm_sqr())
    }
}

/// Full width at half maximum of the dominant reflectivity peak of a
/// spectrum, with linear interpolation between grid points. `None` when the
/// peak is not bracketed by half-maximum crossings on both sides.
pub fn fwhm(spectrum: &Spectrum) -> Option<f64> {
    let pts = spectrum.points();
    let (peak, top) = pts.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, p)| {
        if p.reflectivity > acc.1 {
            (i, p.reflectivity)
        } else {
            acc
        }
    });
    let half = 0.5 * top;
    let cross = |a: usize, b: usize| {
        let (pa, pb) = (&pts[a], &pts[b]);
        pa.delta_omega
            + (half - pa.reflectivity) * (pb.delta_omega - pa.delta_omega) / (pb.reflectivity - pa.reflectivity)
    };
    let right = (peak + 1..pts.len()).find(|&i| pts[i].reflectivity < half).map(|i| cross(i - 1, i))?;
    let left = (0..peak).rev().find(|&i| pts[i].reflectivity < half).map(|i| cross(i + 1, i))?;
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FrequencyGrid;
    use crate::scatter::{sweep_with, SingularPolicy};

    #[test]
    fn single_atom_fwhm_is_decay_rate() {
        let chain = EmitterChain::uniform(1, 0.5, 1.0, 0.0).unwrap();
        let grid = FrequencyGrid::linspace(-5.0, 5.0, 10001).unwrap();
        let s = sweep_with(Engine::Exact, &chain, &grid, PhaseModel::Rigid, SingularPolicy::Fail).unwrap();
        assert!((fwhm(&s).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn unbracketed_peak_has_no_width() {
        let chain = EmitterChain::uniform(1, 0.5, 1.0, 0.0).unwrap();
        let grid = FrequencyGrid::linspace(-0.2, 0.2, 11).unwrap();
        let s = sweep_with(Engine::Exact, &chain, &grid, PhaseModel::Rigid, SingularPolicy::Fail).unwrap();
        assert_eq!(fwhm(&s), None);
    }
}
