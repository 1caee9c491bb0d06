use rayon::prelude::*;
use serde::Serialize;

use super::{AnalysisOptions, Probe};
use crate::eigen::bandgap;
use crate::error::{Error, Result};
use crate::model::{EmitterChain, PhaseModel, K0};

const ANCHOR_STEP: f64 = 1e-2;

/// Contiguous high-reflectivity interval around the band centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowReport {
    pub threshold: f64,
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    pub min_r_inside: f64,
    pub dip_count: usize,
}

/// Centre of the infinite-chain band gap shifted by the mean detuning, for
/// evenly spaced chains; the single atom's own resonance for `N = 1`.
pub fn band_center(chain: &EmitterChain) -> Option<f64> {
    if chain.len() == 1 {
        return Some(chain.atoms()[0].detuning);
    }
    let d = chain.uniform_spacing()?;
    let gap = bandgap(K0 * d).ok()?;
    let rate = chain.atoms().iter().map(|a| a.gamma1d).sum::<f64>() / chain.len() as f64;
    Some(0.5 * (gap.edge_upper + gap.edge_lower) * rate + chain.mean_detuning())
}

/// Search interval wide enough to contain every reflection feature of the chain.
pub fn default_search_range(chain: &EmitterChain) -> (f64, f64) {
    let center = band_center(chain).unwrap_or_else(|| chain.mean_detuning());
    let rate = chain.atoms().iter().fold(0.0f64, |m, a| m.max(a.gamma1d));
    let half = (chain.len() as f64 + 5.0) * rate + chain.max_abs_detuning();
    (center - half, center + half)
}

pub fn extract_window(
    chain: &EmitterChain,
    threshold: f64,
    search_range: (f64, f64),
    model: PhaseModel,
) -> Result<WindowReport> {
    extract_window_with(chain, threshold, search_range, model, &AnalysisOptions::default())
}

pub fn extract_window_with(
    chain: &EmitterChain,
    threshold: f64,
    search_range: (f64, f64),
    model: PhaseModel,
    opts: &AnalysisOptions,
) -> Result<WindowReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid("threshold", "must lie strictly between 0 and 1"));
    }
    let (lo, hi) = search_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid("search_range", "must be a finite interval with min < max"));
    }
    if !(opts.step > 0.0 && opts.edge_tol > 0.0) {
        return Err(Error::invalid("step", "scan step and edge tolerance must be positive"));
    }
    let probe = Probe::new(chain, model, opts.engine)?;
    let center = band_center(chain).unwrap_or(0.5 * (lo + hi)).clamp(lo, hi);
    let anchor = if probe.reflectivity(center)? >= threshold {
        center
    } else {
        find_anchor(&probe, center, threshold, lo, hi, ANCHOR_STEP)?
            .or(find_anchor(&probe, center, threshold, lo, hi, opts.step)?)
            .ok_or(Error::NoWindow { threshold, lo, hi })?
    };

    let march = Marcher { probe: &probe, threshold, opts };
    let up = march.run(anchor, hi)?;
    let down = march.run(anchor, lo)?;
    Ok(WindowReport {
        threshold,
        lo: down.edge,
        hi: up.edge,
        width: up.edge - down.edge,
        min_r_inside: up.min_r.min(down.min_r),
        dip_count: up.dips + down.dips,
    })
}

/// Above-threshold scan sample nearest to `center`.
fn find_anchor(probe: &Probe, center: f64, threshold: f64, lo: f64, hi: f64, step: f64) -> Result<Option<f64>> {
    let count = ((hi - lo) / step).ceil() as usize + 1;
    let hits = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = (lo + i as f64 * step).min(hi);
            Ok((x, probe.reflectivity(x)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(hits
        .into_iter()
        .filter(|&(_, r)| r >= threshold)
        .map(|(x, _)| x)
        .min_by(|a, b| (a - center).abs().total_cmp(&(b - center).abs())))
}

struct Marcher<'a> {
    probe: &'a Probe<'a>,
    threshold: f64,
    opts: &'a AnalysisOptions,
}

struct Side {
    edge: f64,
    min_r: f64,
    dips: usize,
}

impl Marcher<'_> {
    /// Walks from `anchor` towards `limit`, absorbing shallow dips, and
    /// returns the refined edge of the window on that side.
    fn run(&self, anchor: f64, limit: f64) -> Result<Side> {
        let dir = if limit >= anchor { 1.0 } else { -1.0 };
        let at = |i: usize| {
            let x = anchor + dir * i as f64 * self.opts.step;
            if dir * (x - limit) >= 0.0 {
                (limit, true)
            } else {
                (x, false)
            }
        };
        let mut side = Side { edge: anchor, min_r: self.probe.reflectivity(anchor)?, dips: 0 };
        let mut last_above = anchor;
        let mut i = 1;
        loop {
            let (x, end) = at(i);
            let r = self.probe.reflectivity(x)?;
            if r >= self.threshold {
                side.min_r = side.min_r.min(r);
                last_above = x;
                if end {
                    side.edge = x;
                    return Ok(side);
                }
                i += 1;
                continue;
            }
            let first_below = x;
            let mut dip_min = r;
            let mut j = i;
            let recovered = loop {
                if dip_min < self.opts.dip_floor || at(j).1 {
                    break false;
                }
                j += 1;
                let ry = self.probe.reflectivity(at(j).0)?;
                if ry >= self.threshold {
                    break true;
                }
                dip_min = dip_min.min(ry);
            };
            if recovered {
                side.dips += 1;
                side.min_r = side.min_r.min(dip_min);
                i = j;
                continue;
            }
            side.edge = self.bisect(last_above, first_below)?;
            return Ok(side);
        }
    }

    fn bisect(&self, mut above: f64, mut below: f64) -> Result<f64> {
        while (below - above).abs() > self.opts.edge_tol {
            let mid = 0.5 * (above + below);
            if self.probe.reflectivity(mid)? >= self.threshold {
                above = mid;
            } else {
                below = mid;
            }
        }
        Ok(above)
    }
}
