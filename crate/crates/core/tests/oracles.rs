//! Derived reference values checked against independent closed forms and
//! brute-force scans.

use std::f64::consts::{PI, TAU};

use atomirror::analysis::{
    bandwidth_vs_n, default_search_range, extract_window, find_zeros, optimize_separation, AnalysisOptions,
    OptimizerOptions,
};
use atomirror::classical::single_atom_rt;
use atomirror::eigen::{bandgap, build_heff, dispersion, eigenmodes, incident_vector};
use atomirror::model::K0;
use atomirror::{EmitterChain, Engine, PhaseModel};
use num_complex::Complex64;

const RIGID: PhaseModel = PhaseModel::Rigid;

fn uniform(n: usize, d: f64, gamma_ext: f64) -> EmitterChain {
    EmitterChain::uniform(n, d, 1.0, gamma_ext).unwrap()
}

fn reflection(chain: &EmitterChain, w: f64) -> Complex64 {
    Engine::Exact.scatter(chain, w, RIGID).unwrap().r
}

#[test]
fn single_atom_window_inverts_lorentzian() {
    // 1/(1 + 4δ²) = 0.99 at δ = ±½√(1/0.99 − 1)
    let want = (1.0f64 / 0.99 - 1.0).sqrt();
    let chain = uniform(1, 0.25, 0.0);
    let w = extract_window(&chain, 0.99, (-3.0, 3.0), RIGID).unwrap();
    assert!((w.width - want).abs() < 1e-6);
    assert!((want - 0.1005).abs() < 1e-4);
    let table = bandwidth_vs_n(0.25, &[1], 0.99, RIGID, &AnalysisOptions::default()).unwrap();
    assert!((table[0].1 - want).abs() < 1e-6);
}

#[test]
fn lossy_single_atom_on_resonance() {
    let r = reflection(&uniform(1, 0.25, 0.01), 0.0);
    assert!((r.norm_sqr() - (1.0f64 / 1.01).powi(2)).abs() < 1e-14);
    assert!((r.norm_sqr() - 0.9803).abs() < 1e-4);
}

#[test]
fn single_atom_closed_forms() {
    for (delta, g) in [(0.0, 0.0), (0.5, 0.0), (-1.3, 0.2), (2.0, 0.05)] {
        let c = single_atom_rt(delta, 1.0, g);
        let den = Complex64::new(1.0 + g, -2.0 * delta);
        assert!((c.r + 1.0 / den).norm() < 1e-15);
        assert!((c.t + Complex64::new(g, -2.0 * delta) / den).norm() < 1e-15);
        let exact = Engine::Exact.scatter(&uniform(1, 0.25, g), delta, RIGID).unwrap();
        assert!((exact.r - c.r).norm() < 1e-14);
    }
}

#[test]
fn two_atom_fabry_perot_sum() {
    // r = r₁ + t₁² r₂ e^{2ikd} Σ (r₁ r₂ e^{2ikd})ⁿ, summed term by term
    for (d, w, g) in [(0.1, 0.3, 0.0), (0.25, -0.7, 0.02), (0.37, 1.1, 0.0)] {
        let m = single_atom_rt(w, 1.0, g);
        let e2 = Complex64::from_polar(1.0, 2.0 * TAU * d);
        let ratio = m.r * m.r * e2;
        let mut term = m.t * m.t * m.r * e2;
        let mut r = m.r;
        for _ in 0..4000 {
            r += term;
            term *= ratio;
        }
        let exact = reflection(&uniform(2, d, g), w);
        assert!((exact - r).norm() < 1e-10, "d={d} w={w}: {exact} vs {r}");
    }
}

#[test]
fn quarter_wave_pair_eigenpairs() {
    let chain = uniform(2, 0.25, 0.0);
    let set = eigenmodes(&build_heff(&chain, RIGID, true), &incident_vector(&chain, K0)).unwrap();
    let mut got = set.eigenvalues();
    got.sort_by(|a, b| a.re.total_cmp(&b.re));
    // [[−i/2, 1/2], [1/2, −i/2]] has eigenvalues ±1/2 − i/2
    assert!((got[0] - Complex64::new(-0.5, -0.5)).norm() < 1e-12);
    assert!((got[1] - Complex64::new(0.5, -0.5)).norm() < 1e-12);
}

#[test]
fn dispersion_direct_evaluation() {
    let q = PI / 2.0;
    assert!((dispersion(q, 0.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((dispersion(q, PI).unwrap() + 0.5).abs() < 1e-15);
    assert!((dispersion(q, 2.0 * PI / 3.0).unwrap() + 1.0).abs() < 1e-14);
    let g = bandgap(q).unwrap();
    assert!((g.edge_lower + 0.5).abs() < 1e-15 && (g.edge_upper - 0.5).abs() < 1e-15);
}

/// Local minima of |r| on a fine grid, refined only by the grid itself.
fn brute_force_zero_count(chain: &EmitterChain, lo: f64, hi: f64, step: f64) -> usize {
    let count = ((hi - lo) / step) as usize;
    let mags: Vec<f64> = (0..=count).map(|i| reflection(chain, lo + i as f64 * step).norm()).collect();
    (1..count).filter(|&i| mags[i] < mags[i - 1] && mags[i] < mags[i + 1] && mags[i] < 1e-3).count()
}

#[test]
fn zero_counts_match_fine_grid() {
    for n in [1, 2, 3, 4, 5, 8] {
        let chain = uniform(n, 0.25, 0.0);
        let found = find_zeros(&chain, (-6.0, 6.0), RIGID).unwrap();
        let brute = brute_force_zero_count(&chain, -6.0, 6.0, 1e-4);
        assert_eq!(found.len(), brute, "n={n}");
        let expected = if n % 2 == 1 { n - 1 } else { n - 2 };
        assert_eq!(found.len(), expected, "n={n}: {found:?}");
    }
}

#[test]
fn quarter_wave_pair_has_no_exact_zero() {
    // 1 + r₁² − t₁² = 2/(1 − 2iδ) never vanishes, so |r| stays finite
    let chain = uniform(2, 0.25, 0.0);
    let floor = (-6000..=6000).map(|i| reflection(&chain, i as f64 * 1e-3).norm()).fold(f64::INFINITY, f64::min);
    assert!(floor > 1e-3, "{floor}");
    assert!(find_zeros(&chain, default_search_range(&chain), RIGID).unwrap().is_empty());
}

#[test]
fn optimizer_dominates_dense_grid() {
    let opts = AnalysisOptions::default();
    let n = 10;
    let best = optimize_separation(n, 0.99, RIGID, &opts, &OptimizerOptions::default()).unwrap();
    let (a, b) = (0.001, 0.5);
    let grid_max = (0..2000)
        .map(|i| a + (i as f64 + 0.5) * (b - a) / 2000.0)
        .filter(|d| (K0 * d).sin().abs() >= 1e-6)
        .map(|d| {
            let chain = uniform(n, d, 0.0);
            extract_window(&chain, 0.99, default_search_range(&chain), RIGID).map_or(0.0, |w| w.width)
        })
        .fold(0.0, f64::max);
    assert!(best.width_star >= grid_max - 1e-3, "{best:?} vs grid {grid_max}");
}

#[test]
fn mirrored_spacing_gives_same_window() {
    for d in [0.01, 0.08, 0.2] {
        let a = extract_window(&uniform(12, d, 0.0), 0.99, (-20.0, 20.0), RIGID).unwrap();
        let b = extract_window(&uniform(12, 0.5 - d, 0.0), 0.99, (-20.0, 20.0), RIGID).unwrap();
        assert!((a.width - b.width).abs() < 1e-6, "d={d}");
        assert!((a.lo + b.hi).abs() < 1e-6 && (a.hi + b.lo).abs() < 1e-6);
    }
}
