//! Scattering amplitudes, spectra and engine dispatch.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::classical;
use crate::eigen::ModalExpansion;
use crate::error::{Error, Result};
use crate::exact;
use crate::model::{EmitterChain, FrequencyGrid, PhaseModel};

/// Frequency offset applied to probes that land exactly on a lossless pole.
pub const POLE_NUDGE: f64 = 1e-9;

/// Complex reflection and transmission amplitudes.
///
/// Unless stated otherwise, amplitudes use the global convention: the
/// incident wave is `exp(ikz)` with unit amplitude at `z = 0`, `r` is the
/// coefficient of `exp(-ikz)` left of the chain and `t` that of `exp(ikz)`
/// right of it, so an empty waveguide gives `r = 0, t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorCoefficients {
    pub r: Complex64,
    pub t: Complex64,
}

impl MirrorCoefficients {
    pub fn reflectivity(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn transmittivity(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn loss(&self) -> f64 {
        1.0 - self.reflectivity() - self.transmittivity()
    }
}

/// Principal value of the argument, mapped into `(-π, π]`.
pub fn principal_phase(z: Complex64) -> f64 {
    let phase = z.arg();
    if phase <= -PI {
        phase + 2.0 * PI
    } else {
        phase
    }
}

/// Scattering result at one probe frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub delta_omega: f64,
    pub r: Complex64,
    pub t: Complex64,
    #[serde(rename = "R")]
    pub reflectivity: f64,
    #[serde(rename = "T")]
    pub transmittivity: f64,
    pub phase: f64,
    pub loss: f64,
}

impl ScatterPoint {
    pub fn new(delta_omega: f64, coeffs: MirrorCoefficients) -> Self {
        let reflectivity = coeffs.reflectivity();
        let transmittivity = coeffs.transmittivity();
        Self {
            delta_omega,
            r: coeffs.r,
            t: coeffs.t,
            reflectivity,
            transmittivity,
            phase: principal_phase(coeffs.r),
            loss: 1.0 - reflectivity - transmittivity,
        }
    }
}

/// Scatter points aligned one-to-one with a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    grid: FrequencyGrid,
    points: Vec<ScatterPoint>,
}

impl Spectrum {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn points(&self) -> &[ScatterPoint] {
        &self.points
    }

    pub fn reflectivities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.reflectivity).collect()
    }
}

/// The four independent routes to the scattering amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Linear solve of the coupled-dipole system.
    Exact,
    /// Eigenchannel expansion of the effective Hamiltonian.
    Modal,
    /// Fabry–Pérot recurrence over single-atom mirrors.
    Recurrence,
    /// Product of matching and propagation two-port matrices.
    TransferMatrix,
}

impl Engine {
    pub const ALL: [Engine; 4] = [Engine::Exact, Engine::Modal, Engine::Recurrence, Engine::TransferMatrix];

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Modal => "modal",
            Engine::Recurrence => "recurrence",
            Engine::TransferMatrix => "transfer-matrix",
        }
    }

    /// Amplitudes at a single probe frequency.
    pub fn scatter(&self, chain: &EmitterChain, delta_omega: f64, model: PhaseModel) -> Result<MirrorCoefficients> {
        match self {
            Engine::Exact => exact::exact_rt(chain, delta_omega, model),
            Engine::Modal => ModalExpansion::new(chain, model, delta_omega)?.amplitudes(delta_omega),
            Engine::Recurrence => classical::recurrence_rt(chain, delta_omega, model),
            Engine::TransferMatrix => classical::transfer_matrix_rt(chain, delta_omega, model),
        }
    }

    /// Prepares the engine for repeated evaluation on one chain. The modal
    /// engine diagonalises once when the phase model is rigid.
    pub fn prepare<'a>(&self, chain: &'a EmitterChain, model: PhaseModel) -> Result<Prepared<'a>> {
        let modal = match (self, model) {
            (Engine::Modal, PhaseModel::Rigid) => Some(ModalExpansion::new(chain, model, 0.0)?),
            _ => None,
        };
        Ok(Prepared { engine: *self, chain, model, modal })
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::invalid("engine", format!("unknown engine `{s}`")))
    }
}

/// An engine bound to a chain, ready for frequency sweeps.
pub struct Prepared<'a> {
    engine: Engine,
    chain: &'a EmitterChain,
    model: PhaseModel,
    modal: Option<ModalExpansion>,
}

impl Prepared<'_> {
    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn scatter(&self, delta_omega: f64) -> Result<MirrorCoefficients> {
        match &self.modal {
            Some(expansion) => expansion.amplitudes(delta_omega),
            None => self.engine.scatter(self.chain, delta_omega, self.model),
        }
    }

    pub fn reflection(&self, delta_omega: f64) -> Result<Complex64> {
        match self.engine {
            Engine::Recurrence => classical::recurrence_reflection(self.chain, delta_omega, self.model),
            _ => self.scatter(delta_omega).map(|c| c.r),
        }
    }

    /// Like [`Prepared::reflection`], retrying once at `delta_omega + POLE_NUDGE`
    /// when the probe sits on a pole.
    pub fn reflection_nudged(&self, delta_omega: f64) -> Result<Complex64> {
        match self.reflection(delta_omega) {
            Err(e) if e.is_singular_probe() => self.reflection(delta_omega + POLE_NUDGE),
            other => other,
        }
    }

    /// Like [`Prepared::scatter`], retrying once at `delta_omega + POLE_NUDGE`
    /// when the probe sits on a pole.
    pub fn scatter_nudged(&self, delta_omega: f64) -> Result<MirrorCoefficients> {
        match self.scatter(delta_omega) {
            Err(e) if e.is_singular_probe() => self.scatter(delta_omega + POLE_NUDGE),
            other => other,
        }
    }
}

/// What to do when a grid point lands on a lossless pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SingularPolicy {
    #[default]
    Fail,
    /// Evaluate at `δω + POLE_NUDGE` instead; the point keeps its grid label.
    Nudge,
}

/// Exact-engine spectrum over a grid, failing on the first singular probe.
pub fn sweep_spectrum(chain: &EmitterChain, grid: &FrequencyGrid, model: PhaseModel) -> Result<Spectrum> {
    sweep_with(Engine::Exact, chain, grid, model, SingularPolicy::Fail)
}

/// Spectrum from any engine. Grid points are evaluated in parallel; the
/// result is ordered by grid index and independent of scheduling.
pub fn sweep_with(
    engine: Engine,
    chain: &EmitterChain,
    grid: &FrequencyGrid,
    model: PhaseModel,
    policy: SingularPolicy,
) -> Result<Spectrum> {
    model.validate()?;
    let prepared = engine.prepare(chain, model)?;
    let points = grid
        .values()
        .par_iter()
        .map(|&w| {
            let coeffs = match policy {
                SingularPolicy::Fail => prepared.scatter(w),
                SingularPolicy::Nudge => prepared.scatter_nudged(w),
            }?;
            Ok(ScatterPoint::new(w, coeffs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum { grid: grid.clone(), points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_is_half_open() {
        assert_eq!(principal_phase(Complex64::new(-1.0, -0.0)), PI);
        assert_eq!(principal_phase(Complex64::new(-1.0, 0.0)), PI);
        assert!(principal_phase(Complex64::new(-1.0, -1e-9)) < 0.0);
    }

    #[test]
    fn single_point_sweep() {
        let chain = EmitterChain::uniform(1, 0.5, 1.0, 0.0).unwrap();
        let grid = FrequencyGrid::new(vec![0.0]).unwrap();
        let spectrum = sweep_spectrum(&chain, &grid, PhaseModel::Rigid).unwrap();
        assert_eq!(spectrum.points().len(), 1);
        let p = spectrum.points()[0];
        assert!((p.r + 1.0).norm() < 1e-14);
        assert!((p.phase - PI).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_ordered_and_deterministic() {
        let chain = EmitterChain::uniform(7, 0.13, 1.0, 0.02).unwrap();
        let grid = FrequencyGrid::linspace(-4.0, 4.0, 257).unwrap();
        for engine in Engine::ALL {
            let a = sweep_with(engine, &chain, &grid, PhaseModel::Rigid, SingularPolicy::Fail).unwrap();
            let b = sweep_with(engine, &chain, &grid, PhaseModel::Rigid, SingularPolicy::Fail).unwrap();
            assert_eq!(a, b);
            for (p, &w) in a.points().iter().zip(grid.values()) {
                assert_eq!(p.delta_omega, w);
            }
        }
    }

    #[test]
    fn nudge_clears_bragg_dark_pole() {
        let chain = EmitterChain::uniform(5, 0.5, 1.0, 0.0).unwrap();
        let grid = FrequencyGrid::new(vec![-1.0, 0.0, 1.0]).unwrap();
        let strict = sweep_spectrum(&chain, &grid, PhaseModel::Rigid);
        assert!(matches!(strict, Err(Error::SingularMatrix { delta_omega, .. }) if delta_omega == 0.0));
        let nudged = sweep_with(Engine::Exact, &chain, &grid, PhaseModel::Rigid, SingularPolicy::Nudge).unwrap();
        assert!((nudged.points()[1].reflectivity - 1.0).abs() < 1e-6);
    }

    #[test]
    fn engine_names_round_trip() {
        for engine in Engine::ALL {
            assert_eq!(engine.name().parse::<Engine>().unwrap(), engine);
        }
        assert!("fdtd".parse::<Engine>().is_err());
    }
}
