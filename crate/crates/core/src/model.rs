//! Chain data model and phase conventions.
//!
//! Frequencies and detunings are measured in units of the reference
//! waveguide decay rate Γ₀, positions in units of the resonant wavelength λ₀.
//! The resonant wavevector is therefore `k₀ = 2π`, and `k₀·d` is a plain phase.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resonant wavevector in units of 1/λ₀.
pub const K0: f64 = TAU;

/// Relative tolerance used when deciding whether a chain is evenly spaced.
const SPACING_RTOL: f64 = 1e-12;

/// How the propagation wavevector depends on the probe detuning.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseModel {
    /// `k = k₀` at every probe frequency (Markov approximation).
    #[default]
    Rigid,
    /// `k = k₀ (1 + δω/ρ)` where `ρ = ω₀/Γ₀`.
    Dispersive(f64),
}

impl PhaseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseModel::Rigid => Ok(()),
            PhaseModel::Dispersive(ratio) if ratio.is_finite() && ratio > 0.0 => Ok(()),
            PhaseModel::Dispersive(ratio) => {
                Err(Error::invalid("phase_model", format!("dispersive ratio must be positive and finite, got {ratio}")))
            }
        }
    }

    /// Wavevector (in 1/λ₀) of a photon detuned by `delta_omega` from the reference.
    #[inline]
    pub fn wavevector(&self, delta_omega: f64) -> f64 {
        match *self {
            PhaseModel::Rigid => K0,
            PhaseModel::Dispersive(ratio) => K0 * (1.0 + delta_omega / ratio),
        }
    }

    /// True when the wavevector does not depend on the probe frequency.
    pub fn is_rigid(&self) -> bool {
        matches!(self, PhaseModel::Rigid)
    }
}

/// Unit-modulus propagation factor `exp(i k(δω) · distance)`.
#[inline]
pub fn spatial_phase(model: PhaseModel, delta_omega: f64, distance: f64) -> Complex64 {
    Complex64::from_polar(1.0, model.wavevector(delta_omega) * distance)
}

/// A single two-level emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Emitter {
    /// Position along the waveguide (λ₀).
    pub z: f64,
    /// Transition frequency relative to the chain reference (Γ₀).
    pub detuning: f64,
    /// Decay rate into the guided mode (Γ₀).
    pub gamma1d: f64,
    /// Decay rate into non-guided modes (Γ₀).
    pub gamma_ext: f64,
}

/// Which frequency the detuning axis is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Common transition frequency ω₀ of an unmodulated chain.
    #[default]
    Resonance,
    /// Transition frequency ω_a of the central atom of a modulated chain.
    CentralAtom,
}

/// An ordered chain of emitters coupled to the waveguide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmitterChain {
    atoms: Vec<Emitter>,
    reference: Reference,
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {value}")))
    }
}

fn check_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be non-negative and finite, got {value}")))
    }
}

impl EmitterChain {
    pub fn new(atoms: Vec<Emitter>, reference: Reference) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("n", "chain needs at least one atom"));
        }
        for (j, atom) in atoms.iter().enumerate() {
            if !atom.z.is_finite() {
                return Err(Error::invalid("positions", format!("atom {j} has non-finite position")));
            }
            if !atom.detuning.is_finite() {
                return Err(Error::invalid("detunings", format!("atom {j} has non-finite detuning")));
            }
            check_positive("gamma1d", atom.gamma1d)?;
            check_non_negative("gamma_ext", atom.gamma_ext)?;
        }
        if let Some(j) = atoms.windows(2).position(|w| w[1].z <= w[0].z) {
            return Err(Error::invalid(
                "positions",
                format!("positions must be strictly increasing (atoms {j} and {})", j + 1),
            ));
        }
        Ok(Self { atoms, reference })
    }

    /// `n` identical resonant atoms at `z_j = (j-1)·d`.
    pub fn uniform(n: usize, d: f64, gamma1d: f64, gamma_ext: f64) -> Result<Self> {
        Self::modulated(n, d, 0.0, gamma1d, gamma_ext).map(|mut chain| {
            chain.reference = Reference::Resonance;
            chain
        })
    }

    /// Evenly spaced chain whose transition frequencies step down by
    /// `delta_step` from atom to atom, centred on the middle atom:
    /// `δ_j = ((n+1)/2 - j)·Δ` for `j = 1..n`.
    ///
    /// Even `n` is accepted; the detunings are then half-integer multiples of `Δ`.
    pub fn modulated(n: usize, d: f64, delta_step: f64, gamma1d: f64, gamma_ext: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        check_positive("d", d)?;
        check_positive("gamma1d", gamma1d)?;
        check_non_negative("gamma_ext", gamma_ext)?;
        if !delta_step.is_finite() {
            return Err(Error::invalid("delta_step", "must be finite"));
        }
        let centre = (n as f64 + 1.0) / 2.0;
        let atoms = (1..=n)
            .map(|j| Emitter { z: (j - 1) as f64 * d, detuning: (centre - j as f64) * delta_step, gamma1d, gamma_ext })
            .collect();
        Self::new(atoms, Reference::CentralAtom)
    }

    pub fn atoms(&self) -> &[Emitter] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn reference(&self) -> Reference {
        self.reference
    }

    pub fn is_lossless(&self) -> bool {
        self.atoms.iter().all(|a| a.gamma_ext == 0.0)
    }

    /// Distance from the first to the last atom.
    pub fn span(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].z - self.atoms[0].z
    }

    /// Common nearest-neighbour spacing, if the chain is evenly spaced.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.atoms.len() < 2 {
            return None;
        }
        let d = self.span() / (self.atoms.len() - 1) as f64;
        let even = self.atoms.windows(2).all(|w| ((w[1].z - w[0].z) - d).abs() <= SPACING_RTOL * d.abs().max(1.0));
        even.then_some(d)
    }

    pub fn mean_detuning(&self) -> f64 {
        self.atoms.iter().map(|a| a.detuning).sum::<f64>() / self.atoms.len() as f64
    }

    pub fn max_abs_detuning(&self) -> f64 {
        self.atoms.iter().fold(0.0, |m, a| m.max(a.detuning.abs()))
    }

    /// Copy of the chain with every atom's external loss set to `gamma_ext`.
    pub fn with_external_loss(&self, gamma_ext: f64) -> Result<Self> {
        check_non_negative("gamma_ext", gamma_ext)?;
        let atoms = self.atoms.iter().map(|a| Emitter { gamma_ext, ..*a }).collect();
        Ok(Self { atoms, reference: self.reference })
    }

    /// Mirror image `z_j -> z_N - z_j`, with the atom order reversed.
    pub fn reversed(&self) -> Self {
        let end = self.atoms[self.atoms.len() - 1].z;
        let atoms = self.atoms.iter().rev().map(|a| Emitter { z: end - a.z, ..*a }).collect();
        Self { atoms, reference: self.reference }
    }

    /// Copy with every waveguide decay rate multiplied by `factor` and every
    /// detuning multiplied likewise, i.e. the same chain in rescaled units.
    pub fn scaled_rates(&self, factor: f64) -> Result<Self> {
        check_positive("factor", factor)?;
        let atoms = self
            .atoms
            .iter()
            .map(|a| Emitter {
                detuning: a.detuning * factor,
                gamma1d: a.gamma1d * factor,
                gamma_ext: a.gamma_ext * factor,
                ..*a
            })
            .collect();
        Ok(Self { atoms, reference: self.reference })
    }
}

/// Parametric chain description, convertible to an [`EmitterChain`] at any loss rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainSpec {
    Uniform { n: usize, d: f64, gamma1d: f64 },
    Modulated { n: usize, d: f64, delta_step: f64, gamma1d: f64 },
    Explicit { positions: Vec<f64>, detunings: Vec<f64>, gamma1d: f64 },
}

impl ChainSpec {
    pub fn build(&self, gamma_ext: f64) -> Result<EmitterChain> {
        match self {
            ChainSpec::Uniform { n, d, gamma1d } => EmitterChain::uniform(*n, *d, *gamma1d, gamma_ext),
            ChainSpec::Modulated { n, d, delta_step, gamma1d } => {
                EmitterChain::modulated(*n, *d, *delta_step, *gamma1d, gamma_ext)
            }
            ChainSpec::Explicit { positions, detunings, gamma1d } => {
                if positions.len() != detunings.len() {
                    return Err(Error::invalid(
                        "detunings",
                        format!("{} detunings for {} positions", detunings.len(), positions.len()),
                    ));
                }
                let atoms = positions
                    .iter()
                    .zip(detunings)
                    .map(|(&z, &detuning)| Emitter { z, detuning, gamma1d: *gamma1d, gamma_ext })
                    .collect();
                EmitterChain::new(atoms, Reference::Resonance)
            }
        }
    }
}

/// Strictly increasing list of probe detunings (Γ₀).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyGrid(Vec<f64>);

impl FrequencyGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid", "values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid", "values must be strictly increasing"));
        }
        Ok(Self(values))
    }

    /// `count` evenly spaced points from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::invalid("grid", "count must be at least 1")),
            1 => Self::new(vec![min]),
            _ => {
                if !(max > min) {
                    return Err(Error::invalid("grid", format!("need max > min, got [{min}, {max}]")));
                }
                let step = (max - min) / (count - 1) as f64;
                let mut values: Vec<f64> = (0..count).map(|i| min + step * i as f64).collect();
                values[count - 1] = max;
                Self::new(values)
            }
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(grid: FrequencyGrid) -> Self {
        grid.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn single_atom_chain() {
        let chain = EmitterChain::uniform(1, 0.5, 1.0, 0.0).unwrap();
        assert_eq!(chain.len(), 1);
        assert_eq!(chain.atoms()[0].z, 0.0);
        assert_eq!(chain.atoms()[0].detuning, 0.0);
        assert_eq!(chain.reference(), Reference::Resonance);
    }

    #[test]
    fn anti_bragg_positions() {
        let chain = EmitterChain::uniform(5, 0.25, 1.0, 0.0).unwrap();
        let z: Vec<f64> = chain.atoms().iter().map(|a| a.z).collect();
        assert_eq!(z, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn near_bragg_span() {
        let chain = EmitterChain::uniform(50, 0.01, 1.0, 0.0).unwrap();
        assert_eq!(chain.len(), 50);
        assert!((chain.span() - 0.49).abs() < 1e-12);
        assert!((chain.uniform_spacing().unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn modulated_detunings() {
        let chain = EmitterChain::modulated(5, 0.25, 0.4, 1.0, 0.0).unwrap();
        let det: Vec<f64> = chain.atoms().iter().map(|a| a.detuning).collect();
        for (got, want) in det.iter().zip([0.8, 0.4, 0.0, -0.4, -0.8]) {
            assert!((got - want).abs() < 1e-15, "{det:?}");
        }
        assert_eq!(chain.reference(), Reference::CentralAtom);

        let chain = EmitterChain::modulated(3, 0.25, 1.0, 1.0, 0.0).unwrap();
        let det: Vec<f64> = chain.atoms().iter().map(|a| a.detuning).collect();
        assert_eq!(det, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn even_modulated_chain_uses_half_steps() {
        let chain = EmitterChain::modulated(4, 0.25, 1.0, 1.0, 0.0).unwrap();
        let det: Vec<f64> = chain.atoms().iter().map(|a| a.detuning).collect();
        assert_eq!(det, vec![1.5, 0.5, -0.5, -1.5]);
    }

    #[test]
    fn zero_step_modulation_is_uniform() {
        let uniform = EmitterChain::uniform(5, 0.25, 1.0, 0.0).unwrap();
        let flat = EmitterChain::modulated(5, 0.25, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(uniform.atoms(), flat.atoms());
    }

    #[test]
    fn builder_rejects_bad_parameters() {
        let field = |r: Result<EmitterChain>| match r {
            Err(Error::InvalidParameter { name, .. }) => name,
            other => panic!("expected invalid parameter, got {other:?}"),
        };
        assert_eq!(field(EmitterChain::uniform(0, 0.25, 1.0, 0.0)), "n");
        assert_eq!(field(EmitterChain::uniform(3, 0.0, 1.0, 0.0)), "d");
        assert_eq!(field(EmitterChain::uniform(3, -0.1, 1.0, 0.0)), "d");
        assert_eq!(field(EmitterChain::uniform(3, 0.25, 0.0, 0.0)), "gamma1d");
        assert_eq!(field(EmitterChain::uniform(3, 0.25, 1.0, -0.01)), "gamma_ext");
    }

    #[test]
    fn explicit_chain_must_increase() {
        let atom = |z| Emitter { z, detuning: 0.0, gamma1d: 1.0, gamma_ext: 0.0 };
        assert!(EmitterChain::new(vec![atom(0.0), atom(0.0)], Reference::Resonance).is_err());
        assert!(EmitterChain::new(vec![], Reference::Resonance).is_err());
        let chain = EmitterChain::new(vec![atom(0.0), atom(0.1), atom(0.35)], Reference::Resonance).unwrap();
        assert_eq!(chain.uniform_spacing(), None);
    }

    #[test]
    fn spatial_phase_examples() {
        let half = spatial_phase(PhaseModel::Rigid, 0.7, 0.5);
        assert!((half.arg().abs() - PI).abs() < 1e-12);
        let quarter = spatial_phase(PhaseModel::Rigid, 3.0, 0.25);
        assert!((quarter.arg() - FRAC_PI_2).abs() < 1e-14);
        let disp = spatial_phase(PhaseModel::Dispersive(1e6), 0.0, 0.25);
        assert!((disp.arg() - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(vec![0.0, 0.0]).is_err());
        assert!(FrequencyGrid::new(vec![0.0, f64::NAN]).is_err());
        let grid = FrequencyGrid::linspace(-3.0, 3.0, 601).unwrap();
        assert_eq!(grid.len(), 601);
        assert_eq!(grid.values()[600], 3.0);
        assert!(grid.values()[300].abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn builders_satisfy_invariants(
            n in 1usize..40,
            d in 1e-4f64..2.0,
            step in -2.0f64..2.0,
            g1 in 0.01f64..10.0,
            gx in 0.0f64..1.0,
        ) {
            for chain in [
                EmitterChain::uniform(n, d, g1, gx).unwrap(),
                EmitterChain::modulated(n, d, step, g1, gx).unwrap(),
            ] {
                prop_assert_eq!(chain.len(), n);
                prop_assert!(chain.atoms().windows(2).all(|w| w[1].z > w[0].z));
                prop_assert!(chain.atoms().iter().all(|a| a.gamma1d > 0.0 && a.gamma_ext >= 0.0));
                // rebuilding through the validating constructor must succeed
                prop_assert!(EmitterChain::new(chain.atoms().to_vec(), chain.reference()).is_ok());
            }
        }

        #[test]
        fn spatial_phase_is_unimodular(dw in -1e3f64..1e3, dist in -50.0f64..50.0, ratio in 1.0f64..1e9) {
            for model in [PhaseModel::Rigid, PhaseModel::Dispersive(ratio)] {
                prop_assert!((spatial_phase(model, dw, dist).norm() - 1.0).abs() < 1e-14);
            }
        }

        #[test]
        fn rigid_phase_ignores_detuning(dist in -5.0f64..5.0, dws in prop::collection::vec(-100.0f64..100.0, 100)) {
            let reference = spatial_phase(PhaseModel::Rigid, 0.0, dist);
            for dw in dws {
                prop_assert_eq!(spatial_phase(PhaseModel::Rigid, dw, dist), reference);
            }
        }
    }
}
