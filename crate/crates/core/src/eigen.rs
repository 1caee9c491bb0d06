//! Effective Hamiltonian, collective eigenmodes and infinite-chain bands.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::exact::ComplexMatrix;
use crate::model::{EmitterChain, PhaseModel};
use crate::scatter::MirrorCoefficients;

/// Decay-rate tolerance used when classifying radiance.
pub const RADIANCE_TOL: f64 = 1e-9;
/// Bilinear norms below this flag an eigenbasis as near-defective.
pub const DEFECT_TOL: f64 = 1e-8;

const SCHUR_MAX_ITER: usize = 100_000;

/// Non-Hermitian, complex-symmetric collective Hamiltonian (detuning units).
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    matrix: ComplexMatrix,
}

impl EffectiveHamiltonian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// Hamiltonian at resonance; for a dispersive phase model see [`build_heff_at`].
pub fn build_heff(chain: &EmitterChain, model: PhaseModel, include_loss: bool) -> EffectiveHamiltonian {
    build_heff_at(chain, model, 0.0, include_loss)
}

/// Hamiltonian with propagation phases evaluated at probe `delta_omega`.
pub fn build_heff_at(
    chain: &EmitterChain,
    model: PhaseModel,
    delta_omega: f64,
    include_loss: bool,
) -> EffectiveHamiltonian {
    let k = model.wavevector(delta_omega);
    let atoms = chain.atoms();
    let matrix = DMatrix::from_fn(atoms.len(), atoms.len(), |j, l| {
        let (a, b) = (&atoms[j], &atoms[l]);
        let hop = Complex64::from_polar(1.0, k * (a.z - b.z).abs());
        let mut h = Complex64::new(0.0, -0.5 * (a.gamma1d * b.gamma1d).sqrt()) * hop;
        if j == l {
            h += a.detuning;
            if include_loss {
                h -= Complex64::new(0.0, 0.5 * a.gamma_ext);
            }
        }
        h
    });
    EffectiveHamiltonian { matrix }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Radiance {
    Superradiant,
    Subradiant,
    Boundary,
}

impl Radiance {
    /// Classifies a collective decay rate `-Im λ` against the single-atom rate `Γ₀/2`.
    pub fn classify(decay: f64) -> Self {
        if decay > 0.5 + RADIANCE_TOL {
            Radiance::Superradiant
        } else if decay < 0.5 - RADIANCE_TOL {
            Radiance::Subradiant
        } else {
            Radiance::Boundary
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenmode {
    pub lambda: Complex64,
    #[serde(serialize_with = "serialize_vector")]
    pub v: DVector<Complex64>,
    pub radiance: Radiance,
    /// `(ψ_inᵀ v)²`
    pub overlap: Complex64,
}

fn serialize_vector<S: serde::Serializer>(v: &DVector<Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenmodeSet {
    pub modes: Vec<Eigenmode>,
    /// Set when some eigenvector has a vanishing bilinear norm; the modal
    /// expansion is then unusable.
    pub near_defective: bool,
}

impl EigenmodeSet {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn count(&self, radiance: Radiance) -> usize {
        self.modes.iter().filter(|m| m.radiance == radiance).count()
    }
}

fn bilinear(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Eigenvectors of an upper-triangular matrix by back substitution.
fn triangular_eigenvectors(t: &ComplexMatrix) -> Vec<DVector<Complex64>> {
    let n = t.nrows();
    let noise = 64.0 * f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut y = DVector::<Complex64>::zeros(n);
            y[k] = Complex64::new(1.0, 0.0);
            let mut y_max = 1.0f64;
            for i in (0..k).rev() {
                let rhs: Complex64 = -(i + 1..=k).map(|j| t[(i, j)] * y[j]).sum::<Complex64>();
                let den = t[(i, i)] - lambda;
                y[i] = if den.norm() >= noise {
                    rhs / den
                } else if rhs.norm() <= noise * y_max {
                    // degenerate pair with no coupling above rounding level
                    Complex64::new(0.0, 0.0)
                } else {
                    rhs / noise
                };
                y_max = y_max.max(y[i].norm());
            }
            y
        })
        .collect()
}

/// Groups indices whose eigenvalues coincide to within `tol`.
fn clusters(lambdas: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, l) in lambdas.iter().enumerate() {
        match groups.iter_mut().find(|g| g.iter().any(|&j| (lambdas[j] - l).norm() < tol)) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Bilinear Gram–Schmidt with pivoting inside one degenerate eigenspace.
/// Returns `false` if the space contains no usable bilinear basis.
fn bilinear_orthonormalize(vs: &mut [DVector<Complex64>]) -> bool {
    let mut ok = true;
    let mut pool: Vec<usize> = (0..vs.len()).collect();
    let mut done: Vec<usize> = Vec::new();
    while !pool.is_empty() {
        for &p in &pool {
            for &b in &done {
                let proj = bilinear(&vs[b], &vs[p]);
                let basis = vs[b].clone();
                vs[p] -= basis * proj;
            }
            let norm = vs[p].norm();
            if norm > 0.0 {
                vs[p] /= Complex64::new(norm, 0.0);
            }
        }
        let (pos, best) = pool
            .iter()
            .enumerate()
            .map(|(pos, &p)| (pos, bilinear(&vs[p], &vs[p]).norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best < DEFECT_TOL && pool.len() > 1 {
            let mut pair = (0, 1, 0.0);
            for a in 0..pool.len() {
                for b in a + 1..pool.len() {
                    let g = bilinear(&vs[pool[a]], &vs[pool[b]]).norm();
                    if g > pair.2 {
                        pair = (a, b, g);
                    }
                }
            }
            if pair.2 >= DEFECT_TOL {
                let other = vs[pool[pair.1]].clone();
                vs[pool[pair.0]] += other;
                continue;
            }
        }
        let p = pool.remove(pos);
        let q = bilinear(&vs[p], &vs[p]);
        if q.norm() < DEFECT_TOL {
            ok = false;
        } else {
            vs[p] /= q.sqrt();
        }
        done.push(p);
    }
    ok
}

/// Eigenpairs normalised so that `vᵀv = 1`, with overlaps against `psi_in`.
pub fn eigenmodes(h: &EffectiveHamiltonian, psi_in: &DVector<Complex64>) -> Result<EigenmodeSet> {
    let n = h.dim();
    if psi_in.len() != n {
        return Err(Error::invalid("psi_in", format!("length {} does not match dimension {n}", psi_in.len())));
    }
    if h.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("h", "non-finite entry"));
    }
    let (q, t) =
        Schur::try_new(h.matrix.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::EigenFailure { dim: n })?.unpack();
    let lambdas: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut vectors: Vec<DVector<Complex64>> = triangular_eigenvectors(&t)
        .into_iter()
        .map(|y| {
            let v = &q * y;
            let norm = v.norm();
            v / Complex64::new(norm, 0.0)
        })
        .collect();

    let mut near_defective = false;
    let scale = h.matrix.norm().max(1.0);
    for group in clusters(&lambdas, 1e-10 * scale) {
        if group.len() == 1 {
            let v = &mut vectors[group[0]];
            let q = bilinear(v, v);
            if q.norm() < DEFECT_TOL {
                near_defective = true;
            } else {
                *v /= q.sqrt();
            }
        } else {
            let mut sub: Vec<_> = group.iter().map(|&i| vectors[i].clone()).collect();
            near_defective |= !bilinear_orthonormalize(&mut sub);
            for (&i, v) in group.iter().zip(sub) {
                vectors[i] = v;
            }
        }
    }

    let modes = lambdas
        .into_iter()
        .zip(vectors)
        .map(|(lambda, v)| {
            let o = bilinear(psi_in, &v);
            Eigenmode { lambda, radiance: Radiance::classify(-lambda.im), overlap: o * o, v }
        })
        .collect();
    Ok(EigenmodeSet { modes, near_defective })
}

/// Eigenchannel expansion of the scattering amplitudes for one chain.
#[derive(Debug, Clone)]
pub struct ModalExpansion {
    set: EigenmodeSet,
    /// `(ψ̄_inᵀ v)(vᵀ ψ_in)` per mode
    forward: Vec<Complex64>,
}

impl ModalExpansion {
    /// Diagonalises the lossy Hamiltonian with phases evaluated at `delta_omega`.
    pub fn new(chain: &EmitterChain, model: PhaseModel, delta_omega: f64) -> Result<Self> {
        model.validate()?;
        let k = model.wavevector(delta_omega);
        let h = build_heff_at(chain, model, delta_omega, true);
        let psi = incident_vector(chain, k);
        let set = eigenmodes(&h, &psi)?;
        if set.near_defective {
            return Err(Error::ModalUnavailable);
        }
        let psi_bar = psi.map(|z| z.conj());
        let forward = set.modes.iter().map(|m| bilinear(&psi_bar, &m.v) * bilinear(&m.v, &psi)).collect();
        Ok(Self { set, forward })
    }

    pub fn modes(&self) -> &EigenmodeSet {
        &self.set
    }

    pub fn amplitudes(&self, delta_omega: f64) -> Result<MirrorCoefficients> {
        let half_i = Complex64::new(0.0, 0.5);
        let mut r = Complex64::new(0.0, 0.0);
        let mut fwd = Complex64::new(0.0, 0.0);
        for (m, f) in self.set.modes.iter().zip(&self.forward) {
            let den = delta_omega - m.lambda;
            if den.norm() < 1e-12 {
                return Err(Error::ModalUnavailable);
            }
            r += m.overlap / den;
            fwd += f / den;
        }
        Ok(MirrorCoefficients { r: -half_i * r, t: Complex64::new(1.0, 0.0) - half_i * fwd })
    }
}

/// `ψ_j = √Γ_j exp(ik z_j)`
pub fn incident_vector(chain: &EmitterChain, k: f64) -> DVector<Complex64> {
    let atoms = chain.atoms();
    DVector::from_iterator(atoms.len(), atoms.iter().map(|a| a.gamma1d.sqrt() * Complex64::from_polar(1.0, k * a.z)))
}

pub fn reflection_modal(chain: &EmitterChain, delta_omega: f64, model: PhaseModel) -> Result<Complex64> {
    ModalExpansion::new(chain, model, delta_omega)?.amplitudes(delta_omega).map(|c| c.r)
}

/// Infinite-chain dispersion `ω(K) = ½ sin(kd) / (cos Kd − cos kd)` in units of Γ₀.
pub fn dispersion(kd: f64, bloch_kd: f64) -> Result<f64> {
    let den = bloch_kd.cos() - kd.cos();
    if den.abs() < 1e-14 {
        return Err(Error::DispersionPole { kd, bloch: bloch_kd });
    }
    Ok(0.5 * kd.sin() / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    pub kd: f64,
    pub edge_upper: f64,
    pub edge_lower: f64,
    pub width: f64,
}

/// Band edges of the infinite chain, at Bloch phases 0 and π.
pub fn bandgap(kd: f64) -> Result<GapReport> {
    if !kd.is_finite() {
        return Err(Error::invalid("kd", "must be finite"));
    }
    let reduced = kd.rem_euclid(TAU);
    let s = reduced.sin();
    if s.abs() < 1e-12 || (reduced - PI).abs() < 1e-12 || (TAU - reduced) < 1e-12 {
        return Err(Error::BraggDivergence { kd });
    }
    let half = 0.5 * reduced;
    let a = 0.5 / half.tan();
    let b = -0.5 * half.tan();
    Ok(GapReport { kd, edge_upper: a.max(b), edge_lower: a.min(b), width: 1.0 / s.abs() })
}

/// Gap for a uniform spacing `d` (wavelength units) at resonance.
pub fn bandgap_for_spacing(d: f64) -> Result<GapReport> {
    bandgap(crate::model::K0 * d)
}
