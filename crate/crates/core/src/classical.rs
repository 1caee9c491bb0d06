//! Classical multiple-scattering engines built from single-atom mirrors.
//!
//! A single atom at detuning `δ` from its own transition acts as a
//! point mirror with
//!
//! ```text
//! r = -Γ / (Γ + γ - 2iδ)
//! t = -(γ - 2iδ) / (Γ + γ - 2iδ)
//! ```
//!
//! This `t` differs in sign from the field transmission `1 + r`; the chain
//! engines account for that when converting to global amplitudes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{EmitterChain, PhaseModel};
use crate::scatter::MirrorCoefficients;

/// Geometric denominators below this magnitude are treated as divergent.
const MIN_DENOMINATOR: f64 = 1e-14;

/// Local mirror amplitudes of one atom. `delta` is the probe detuning from
/// this atom's own transition.
pub fn single_atom_rt(delta: f64, gamma1d: f64, gamma_ext: f64) -> MirrorCoefficients {
    let open = Complex64::new(gamma_ext, -2.0 * delta);
    let denom = gamma1d + open;
    MirrorCoefficients { r: -gamma1d / denom, t: -open / denom }
}

fn local_mirrors(chain: &EmitterChain, delta_omega: f64) -> Vec<MirrorCoefficients> {
    chain.atoms().iter().map(|a| single_atom_rt(delta_omega - a.detuning, a.gamma1d, a.gamma_ext)).collect()
}

/// Converts chain-local amplitudes (referenced to the first and last atom) to
/// the global convention used by the exact engine.
fn to_global(chain: &EmitterChain, k: f64, r_local: Complex64, t_local: Complex64) -> MirrorCoefficients {
    let atoms = chain.atoms();
    let sign = if atoms.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    MirrorCoefficients {
        r: r_local * Complex64::from_polar(1.0, 2.0 * k * atoms[0].z),
        t: sign * t_local * Complex64::from_polar(1.0, -k * chain.span()),
    }
}

/// 2×2 two-port matrix acting on (forward, backward) amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TwoPortMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self { m11: one, m12: zero, m21: zero, m22: one }
    }

    /// Matching matrix of a symmetric point scatterer. Requires `t != 0`.
    pub fn matching(c: &MirrorCoefficients) -> Self {
        let inv = 1.0 / c.t;
        Self::scaled_matching(c).scale(inv)
    }

    /// `t` times the matching matrix; finite even for an opaque scatterer.
    pub fn scaled_matching(c: &MirrorCoefficients) -> Self {
        Self { m11: c.t * c.t - c.r * c.r, m12: c.r, m21: -c.r, m22: Complex64::new(1.0, 0.0) }
    }

    /// Free propagation over a phase `k·d`.
    pub fn propagation(phase: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self { m11: Complex64::from_polar(1.0, phase), m12: zero, m21: zero, m22: Complex64::from_polar(1.0, -phase) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            m11: self.m11 * o.m11 + self.m12 * o.m21,
            m12: self.m11 * o.m12 + self.m12 * o.m22,
            m21: self.m21 * o.m11 + self.m22 * o.m21,
            m22: self.m21 * o.m12 + self.m22 * o.m22,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { m11: self.m11 * s, m12: self.m12 * s, m21: self.m21 * s, m22: self.m22 * s }
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    fn max_norm(&self) -> f64 {
        [self.m11, self.m12, self.m21, self.m22].iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn reflection(&self) -> Complex64 {
        self.m12 / self.m22
    }

    pub fn transmission(&self) -> Complex64 {
        1.0 / self.m22
    }
}

/// Chain reflection from the backward Fabry–Pérot recurrence.
pub fn recurrence_reflection(chain: &EmitterChain, delta_omega: f64, model: PhaseModel) -> Result<Complex64> {
    recurrence_rt(chain, delta_omega, model).map(|c| c.r)
}

/// Reflection and transmission from the recurrence
/// `R_j = r_j + t_j² R_{j+1} e^{2ikd_j} / (1 - r_j R_{j+1} e^{2ikd_j})`.
pub fn recurrence_rt(chain: &EmitterChain, delta_omega: f64, model: PhaseModel) -> Result<MirrorCoefficients> {
    let k = model.wavevector(delta_omega);
    let atoms = chain.atoms();
    let mirrors = local_mirrors(chain, delta_omega);
    let last = mirrors[mirrors.len() - 1];
    let (mut big_r, mut big_t) = (last.r, last.t);
    for j in (0..atoms.len() - 1).rev() {
        let m = mirrors[j];
        if m.t == Complex64::new(0.0, 0.0) {
            big_r = m.r;
            big_t = m.t;
            continue;
        }
        let hop = Complex64::from_polar(1.0, k * (atoms[j + 1].z - atoms[j].z));
        let round = big_r * hop * hop;
        let den = 1.0 - m.r * round;
        if den.norm() < MIN_DENOMINATOR {
            return Err(Error::ResonantDivergence { delta_omega });
        }
        big_t = m.t * big_t * hop / den;
        big_r = m.r + m.t * m.t * round / den;
    }
    Ok(to_global(chain, k, big_r, big_t))
}

/// Reflection and transmission from a normalised transfer-matrix product.
pub fn transfer_matrix_rt(chain: &EmitterChain, delta_omega: f64, model: PhaseModel) -> Result<MirrorCoefficients> {
    let k = model.wavevector(delta_omega);
    let atoms = chain.atoms();
    let mirrors = local_mirrors(chain, delta_omega);

    // Π t_j and the running normalisation kept in log form.
    let mut log_t = Complex64::new(0.0, 0.0);
    let mut log_scale = 0.0;
    let mut opaque = false;
    let mut p = TwoPortMatrix::identity();
    for (j, m) in mirrors.iter().enumerate() {
        p = p.mul(&TwoPortMatrix::scaled_matching(m));
        if m.t == Complex64::new(0.0, 0.0) {
            opaque = true;
            break;
        }
        log_t += m.t.ln();
        if j + 1 < atoms.len() {
            p = p.mul(&TwoPortMatrix::propagation(k * (atoms[j + 1].z - atoms[j].z)));
        }
        let s = p.max_norm();
        if s > 0.0 {
            p = p.scale(Complex64::new(1.0 / s, 0.0));
            log_scale += s.ln();
        }
    }

    if !(p.m22.norm() > 1e-300) {
        return Err(Error::ResonantDivergence { delta_omega });
    }
    let r_local = p.reflection();
    let t_local = if opaque { Complex64::new(0.0, 0.0) } else { (log_t - log_scale - p.m22.ln()).exp() };
    Ok(to_global(chain, k, r_local, t_local))
}
