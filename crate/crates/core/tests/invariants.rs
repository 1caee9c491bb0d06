use atomirror::analysis::{bandwidth_vs_n, default_search_range, extract_window, AnalysisOptions};
use atomirror::eigen::{build_heff, eigenmodes, incident_vector, Radiance};
use atomirror::model::K0;
use atomirror::scatter::sweep_with;
use atomirror::{ChainSpec, EmitterChain, Engine, FrequencyGrid, PhaseModel, SingularPolicy};
use proptest::prelude::*;

const RIGID: PhaseModel = PhaseModel::Rigid;

fn fig5_scenarios() -> [ChainSpec; 3] {
    [
        ChainSpec::Uniform { n: 5, d: 0.25, gamma1d: 1.0 },
        ChainSpec::Uniform { n: 5, d: 0.1, gamma1d: 1.0 },
        ChainSpec::Modulated { n: 5, d: 0.25, delta_step: 0.4, gamma1d: 1.0 },
    ]
}

#[test]
fn loss_lowers_reflectivity_inside_lossless_window() {
    for spec in fig5_scenarios() {
        let chain = spec.build(0.0).unwrap();
        let w = extract_window(&chain, 0.99, default_search_range(&chain), RIGID).unwrap();
        let grid = FrequencyGrid::linspace(w.lo, w.hi, 801).unwrap();
        let base = sweep_with(Engine::Exact, &chain, &grid, RIGID, SingularPolicy::Fail).unwrap();
        for gamma in [0.01, 0.1] {
            let lossy =
                sweep_with(Engine::Exact, &spec.build(gamma).unwrap(), &grid, RIGID, SingularPolicy::Fail).unwrap();
            for (p, q) in base.points().iter().zip(lossy.points()) {
                assert!(q.reflectivity <= p.reflectivity + 1e-10, "{spec:?} gamma={gamma} at {}", p.delta_omega);
            }
        }
    }
}

#[test]
fn loss_lifts_reflection_zeros() {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let spec = ChainSpec::Uniform { n: 5, d: 0.25, gamma1d: 1.0 };
    let lossless = Engine::Exact.scatter(&spec.build(0.0).unwrap(), phi, RIGID).unwrap();
    let lossy = Engine::Exact.scatter(&spec.build(0.01).unwrap(), phi, RIGID).unwrap();
    assert!(lossless.reflectivity() < 1e-20);
    assert!(lossy.reflectivity() > 1e-8);
}

#[test]
fn quarter_wave_bandwidth_grows_with_n_for_short_chains() {
    let ns: Vec<usize> = (1..=9).collect();
    let table = bandwidth_vs_n(0.25, &ns, 0.99, RIGID, &AnalysisOptions::default()).unwrap();
    for w in table.windows(2) {
        assert!(w[1].1 >= w[0].1, "{table:?}");
    }
    assert!(table.iter().all(|&(_, w)| w <= 1.0), "{table:?}");
}

#[test]
fn quarter_wave_window_sits_in_band_gap() {
    let chain = EmitterChain::uniform(50, 0.25, 1.0, 0.0).unwrap();
    let w = extract_window(&chain, 0.99, default_search_range(&chain), RIGID).unwrap();
    assert!(w.lo >= -0.6 && w.hi <= 0.6, "{w:?}");
    assert!((w.lo + w.hi).abs() < 1e-6);
}

#[test]
fn window_report_consistency() {
    for delta in [0.0, 0.3, 1.0] {
        let chain = EmitterChain::modulated(5, 0.25, delta, 1.0, 0.0).unwrap();
        let w = extract_window(&chain, 0.99, default_search_range(&chain), RIGID).unwrap();
        assert!(w.lo <= w.hi);
        assert!((w.width - (w.hi - w.lo)).abs() < 1e-15);
        if w.dip_count == 0 {
            assert!(w.min_r_inside >= w.threshold);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bragg_chains_have_one_bright_mode(n in 2usize..40, m in 1usize..4) {
        let chain = EmitterChain::uniform(n, 0.5 * m as f64, 1.0, 0.0).unwrap();
        let set = eigenmodes(&build_heff(&chain, RIGID, true), &incident_vector(&chain, K0)).unwrap();
        let mut decay: Vec<f64> = set.modes.iter().map(|x| -x.lambda.im).collect();
        decay.sort_by(|a, b| b.total_cmp(a));
        prop_assert!((decay[0] - 0.5 * n as f64).abs() < 1e-8);
        prop_assert!(decay[1..].iter().all(|d| d.abs() < 1e-8));
        prop_assert_eq!(set.count(Radiance::Superradiant), 1);
    }

    #[test]
    fn engines_agree_on_modulated_chains(n in 1usize..25, d in 0.02f64..0.48, delta in -0.5f64..0.5, g in 0.0f64..0.05, w in -6.0f64..6.0) {
        let chain = EmitterChain::modulated(n, d, delta, 1.0, g).unwrap();
        let exact = Engine::Exact.scatter(&chain, w, RIGID).unwrap();
        for engine in [Engine::Recurrence, Engine::TransferMatrix] {
            let c = engine.scatter(&chain, w, RIGID).unwrap();
            prop_assert!((c.r - exact.r).norm() < 1e-9 && (c.t - exact.t).norm() < 1e-9);
        }
        if let Ok(c) = Engine::Modal.scatter(&chain, w, RIGID) {
            prop_assert!((c.r - exact.r).norm() < 1e-8);
        }
    }

    #[test]
    fn dispersive_model_approaches_rigid(n in 1usize..10, d in 0.05f64..0.45, w in -3.0f64..3.0) {
        let chain = EmitterChain::uniform(n, d, 1.0, 0.0).unwrap();
        let rigid = Engine::Exact.scatter(&chain, w, RIGID).unwrap();
        let slow = Engine::Exact.scatter(&chain, w, PhaseModel::Dispersive(1e9)).unwrap();
        prop_assert!((rigid.r - slow.r).norm() < 1e-6);
    }
}
