use atomirror::Engine;
use atomirror_cli::config::EngineChoice;
use atomirror_cli::output::read_spectrum_csv;
use atomirror_cli::{parse_config, reproduce, run_plan, run_scenario, ConfigError, Plan, ScenarioConfig};

#[test]
fn minimal_config_takes_defaults() {
    let c = parse_config(r#"{"n": 5, "d": 0.25, "grid": [-3, 3, 601]}"#).unwrap();
    assert_eq!(c.threshold, 0.99);
    assert_eq!(c.phase_model, atomirror::PhaseModel::Rigid);
    assert_eq!(c.engine, EngineChoice::All);
    assert_eq!(c.frequency_grid().unwrap().len(), 601);
    assert_eq!(c.chain().unwrap().len(), 5);
}

#[test]
fn non_positive_spacing_names_d() {
    for d in ["0", "-0.1"] {
        let err = parse_config(&format!(r#"{{"n": 5, "d": {d}}}"#)).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
        assert_eq!(err.fields(), vec!["d"]);
        assert!(err.to_string().contains("d:"));
    }
}

#[test]
fn malformed_document_reports_position() {
    let err = parse_config("{\n  \"n\": 5,\n  \"d\": \n}").unwrap_err();
    assert!(matches!(err, ConfigError::Parse { line: 4, .. }), "{err:?}");
}

#[test]
fn modulated_config_steps_detunings() {
    let c = parse_config(r#"{"n": 5, "d": 0.25, "delta_step": 0.4}"#).unwrap();
    let det: Vec<f64> = c.chain().unwrap().atoms().iter().map(|a| a.detuning).collect();
    for (got, want) in det.iter().zip([0.8, 0.4, 0.0, -0.4, -0.8]) {
        assert!((got - want).abs() < 1e-15, "{det:?}");
    }
}

#[test]
fn config_round_trips_through_json() {
    let docs = [
        r#"{"n": 5, "d": 0.25}"#,
        r#"{"positions": [0, 0.2, 0.45], "detunings": [0.1, 0, -0.1], "gamma_ext": 0.01, "engine": "modal"}"#,
        r#"{"n": 3, "d": 0.1, "delta_step": 0.2, "phase_model": {"dispersive": 1e5}, "search_range": [-4, 4],
            "analysis": {"zeros": true, "optimize": {"n_list": [4]}, "dissipation": [0, 0.1]},
            "output": {"dir": "out", "stem": "x"}}"#,
    ];
    for doc in docs {
        let c = parse_config(doc).unwrap();
        assert_eq!(parse_config(&c.to_json()).unwrap(), c);
    }
}

#[test]
fn hash_ignores_spelling_of_defaults() {
    let terse = parse_config(r#"{"d": 0.25, "n": 5}"#).unwrap();
    let explicit = parse_config(
        r#"{"n": 5, "d": 0.25, "threshold": 0.99, "engine": "all", "phase_model": "rigid", "grid": [-3.0, 3.0, 601]}"#,
    )
    .unwrap();
    assert_eq!(terse.hash(), explicit.hash());
    let other = parse_config(r#"{"n": 5, "d": 0.26}"#).unwrap();
    assert_ne!(terse.hash(), other.hash());
}

#[test]
fn all_engines_agree_on_quarter_wave_chain() {
    let c = parse_config(r#"{"n": 5, "d": 0.25, "grid": [-10, 10, 601]}"#).unwrap();
    let out = run_scenario(&c).unwrap();
    assert_eq!(out.envelope.spectra.len(), 4);
    assert_eq!(out.envelope.cross_engine.len(), 3);
    for dev in &out.envelope.cross_engine {
        let tol = if dev.engine == Engine::Modal { 1e-8 } else { 1e-9 };
        assert!(dev.max_abs_dr < tol, "{dev:?}");
        assert_eq!(dev.compared, 601);
    }
}

/// Half-maximum crossings of the largest peak by linear interpolation.
fn half_width(points: &[(f64, f64)]) -> f64 {
    let (peak, top) = points.iter().enumerate().fold((0, 0.0), |b, (i, p)| if p.1 > b.1 { (i, p.1) } else { b });
    let half = 0.5 * top;
    let cross = |i: usize, j: usize| {
        let (a, b) = (points[i], points[j]);
        a.0 + (half - a.1) * (b.0 - a.0) / (b.1 - a.1)
    };
    let hi = (peak..points.len() - 1).find(|&i| points[i + 1].1 < half).map(|i| cross(i, i + 1)).unwrap();
    let lo = (1..=peak).rev().find(|&i| points[i - 1].1 < half).map(|i| cross(i - 1, i)).unwrap();
    hi - lo
}

#[test]
fn bragg_chain_spectrum_has_superradiant_width() {
    let c = parse_config(r#"{"n": 5, "d": 0.5, "grid": [-15, 15, 6001], "engine": "exact"}"#).unwrap();
    let out = run_scenario(&c).unwrap();
    let pts: Vec<(f64, f64)> = out.envelope.spectra[0].points.iter().map(|p| (p.delta_omega, p.reflectivity)).collect();
    let width = half_width(&pts);
    assert!((width - 5.0).abs() < 0.05, "{width}");
}

#[test]
fn lossy_scenarios_keep_reflectivity_floor() {
    let mut rows = Vec::new();
    for doc in [
        r#"{"n": 5, "d": 0.25, "analysis": {"window": false, "dissipation": [0.01]}}"#,
        r#"{"n": 5, "d": 0.1, "analysis": {"window": false, "dissipation": [0.01]}}"#,
        r#"{"n": 5, "d": 0.25, "delta_step": 0.4, "analysis": {"window": false, "dissipation": [0.01]}}"#,
    ] {
        let c = parse_config(doc).unwrap();
        let out = run_plan(&c, Plan { dissipation: true, ..Plan::NOTHING }).unwrap();
        rows.push(out.envelope.dissipation.unwrap()[0].min_r);
    }
    assert!(rows.iter().all(|&r| r >= 0.915), "{rows:?}");
}

#[test]
fn runs_are_byte_identical() {
    let c =
        parse_config(r#"{"n": 7, "d": 0.13, "gamma_ext": 0.02, "grid": [-6, 6, 1201], "analysis": {"zeros": true}}"#)
            .unwrap();
    let a = run_scenario(&c).unwrap();
    let b = run_scenario(&c).unwrap();
    assert_eq!(a.tables.len(), b.tables.len());
    for (x, y) in a.tables.iter().zip(&b.tables) {
        assert_eq!(x.to_csv(), y.to_csv(), "{}", x.name);
    }
}

#[test]
fn emitted_spectra_pass_row_validation() {
    let c = parse_config(r#"{"n": 4, "d": 0.3, "gamma_ext": 0.05, "grid": [-5, 5, 501]}"#).unwrap();
    let out = run_scenario(&c).unwrap();
    for table in out.tables.iter().filter(|t| t.header.last().map(String::as_str) == Some("loss")) {
        let rows = read_spectrum_csv(&table.to_csv()).unwrap();
        assert_eq!(rows.len(), 501);
    }
}

#[test]
fn unknown_figure_lists_ids() {
    let msg = reproduce("fig6a").unwrap_err().to_string();
    for id in atomirror_cli::FIGURES {
        assert!(msg.contains(id), "{msg}");
    }
}

#[test]
fn single_atom_figure() {
    let out = reproduce("fig2a").unwrap();
    assert!(out.envelope.checks_pass(), "{:?}", out.envelope.checks);
    let exact = out.tables.iter().find(|t| t.name == "fig2a_exact").unwrap();
    let rows = read_spectrum_csv(&exact.to_csv()).unwrap();
    let centre = rows.iter().min_by(|a, b| a.delta_omega.abs().total_cmp(&b.delta_omega.abs())).unwrap();
    assert!((centre.reflectivity - 1.0).abs() < 1e-10);
    assert!((centre.phase - std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn band_gap_figure_contains_near_bragg_point() {
    let out = reproduce("fig3f").unwrap();
    assert!(out.envelope.checks_pass(), "{:?}", out.envelope.checks);
    let text = out.tables[0].to_csv();
    let line = text.lines().find(|l| l.split(',').nth(1) == Some("2.40000000000e-2")).unwrap();
    let width: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
    assert!((width - 6.66).abs() < 0.01, "{line}");
}

#[test]
fn optimum_width_grows_nearly_linearly() {
    let out = reproduce("fig4d").unwrap();
    let rows = out.envelope.optimize.as_ref().unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [10, 20, 30, 40, 50, 60]);
    assert!(rows.windows(2).all(|w| w[1].width_star > w[0].width_star));
    assert!(out.envelope.checks_pass(), "{:?}", out.envelope.checks);
}

#[test]
fn uniform_helper_matches_parsed_config() {
    assert_eq!(ScenarioConfig::uniform(5, 0.25), parse_config(r#"{"n": 5, "d": 0.25}"#).unwrap());
}
