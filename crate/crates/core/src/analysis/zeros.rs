use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use super::{AnalysisOptions, Probe};
use crate::error::{Error, Result};
use crate::model::{EmitterChain, PhaseModel};

/// Scan minima of |r| below this are refined.
const CANDIDATE_LEVEL: f64 = 0.05;
/// Refined minima below this count as zeros.
pub const ZERO_LEVEL: f64 = 1e-6;
/// Half-width of the stencil used to measure the phase jump.
const PHASE_STENCIL: f64 = 1e-5;

/// A point of vanishing reflection and the phase jump across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCrossing {
    pub delta_omega: f64,
    pub residual_r: f64,
    pub phase_jump: f64,
}

pub fn find_zeros(chain: &EmitterChain, search_range: (f64, f64), model: PhaseModel) -> Result<Vec<ZeroCrossing>> {
    find_zeros_with(chain, search_range, model, &AnalysisOptions::default())
}

pub fn find_zeros_with(
    chain: &EmitterChain,
    search_range: (f64, f64),
    model: PhaseModel,
    opts: &AnalysisOptions,
) -> Result<Vec<ZeroCrossing>> {
    let (lo, hi) = search_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid("search_range", "must be a finite interval with min < max"));
    }
    let probe = Probe::new(chain, model, opts.engine)?;
    let h = opts.step;
    let count = ((hi - lo) / h).ceil() as usize + 1;
    let xs: Vec<f64> = (0..count).map(|i| (lo + i as f64 * h).min(hi)).collect();
    let mags = xs.par_iter().map(|&x| probe.r(x).map(|r| r.norm())).collect::<Result<Vec<_>>>()?;

    let mut zeros: Vec<ZeroCrossing> = Vec::new();
    for i in 1..count.saturating_sub(1) {
        if !(mags[i] <= mags[i - 1] && mags[i] < mags[i + 1] && mags[i] < CANDIDATE_LEVEL) {
            continue;
        }
        let (x0, residual) = golden_min(|x| probe.r(x).map(|r| r.norm()), xs[i - 1], xs[i + 1])?;
        if residual >= ZERO_LEVEL || zeros.last().is_some_and(|z| (z.delta_omega - x0).abs() < 10.0 * PHASE_STENCIL) {
            continue;
        }
        let jump = wrap(probe.r(x0 + PHASE_STENCIL)?.arg() - probe.r(x0 - PHASE_STENCIL)?.arg()).abs();
        zeros.push(ZeroCrossing { delta_omega: x0, residual_r: residual, phase_jump: jump });
    }
    Ok(zeros)
}

fn wrap(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p > PI {
        p - TAU
    } else {
        p
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > 1e-13 * (1.0 + a.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}
