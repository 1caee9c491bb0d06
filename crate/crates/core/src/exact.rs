//! Exact single-photon amplitudes from the coupled-dipole linear system.
//!
//! With `b_l = √Γ_l · exp(ik z_l)` and the coupling matrix
//! `M_jl = (√(Γ_j Γ_l)/2) exp(ik|z_j - z_l|) + [γ_j/2 - i(ω - ω_j)] δ_jl`,
//! the atomic response is `x = M⁻¹ b` and
//!
//! ```text
//! r = -½ Σ_j b_j x_j
//! t = 1 - ½ Σ_j √Γ_j exp(-ik z_j) x_j
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{EmitterChain, PhaseModel};
use crate::scatter::MirrorCoefficients;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Above this 1-norm condition number the solve is treated as singular.
const MAX_CONDITION: f64 = 1.0 / f64::EPSILON;

pub fn build_m_matrix(chain: &EmitterChain, delta_omega: f64, model: PhaseModel) -> ComplexMatrix {
    let k = model.wavevector(delta_omega);
    let atoms = chain.atoms();
    DMatrix::from_fn(atoms.len(), atoms.len(), |j, l| {
        let (a, b) = (&atoms[j], &atoms[l]);
        let coupling = 0.5 * (a.gamma1d * b.gamma1d).sqrt() * Complex64::from_polar(1.0, k * (a.z - b.z).abs());
        if j == l {
            coupling + Complex64::new(0.5 * a.gamma_ext, -(delta_omega - a.detuning))
        } else {
            coupling
        }
    })
}

fn one_norm(m: &ComplexMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Reflection and transmission amplitudes from one LU solve.
pub fn exact_rt(chain: &EmitterChain, delta_omega: f64, model: PhaseModel) -> Result<MirrorCoefficients> {
    let k = model.wavevector(delta_omega);
    let m = build_m_matrix(chain, delta_omega, model);
    let norm = one_norm(&m);
    let lu = m.lu();
    let singular = |condition| Error::SingularMatrix { delta_omega, condition };
    let inverse = lu.try_inverse().ok_or_else(|| singular(f64::INFINITY))?;
    let condition = norm * one_norm(&inverse);
    if !(condition < MAX_CONDITION) {
        return Err(singular(condition));
    }

    let atoms = chain.atoms();
    let drive = DVector::from_iterator(
        atoms.len(),
        atoms.iter().map(|a| a.gamma1d.sqrt() * Complex64::from_polar(1.0, k * a.z)),
    );
    let response = lu.solve(&drive).ok_or_else(|| singular(condition))?;

    let mut r = Complex64::new(0.0, 0.0);
    let mut forward = Complex64::new(0.0, 0.0);
    for ((a, b), x) in atoms.iter().zip(drive.iter()).zip(response.iter()) {
        r += b * x;
        forward += a.gamma1d.sqrt() * Complex64::from_polar(1.0, -k * a.z) * x;
    }
    Ok(MirrorCoefficients { r: -0.5 * r, t: Complex64::new(1.0, 0.0) - 0.5 * forward })
}

pub fn reflection_exact(chain: &EmitterChain, delta_omega: f64, model: PhaseModel) -> Result<Complex64> {
    exact_rt(chain, delta_omega, model).map(|c| c.r)
}

pub fn transmission_exact(chain: &EmitterChain, delta_omega: f64, model: PhaseModel) -> Result<Complex64> {
    exact_rt(chain, delta_omega, model).map(|c| c.t)
}
