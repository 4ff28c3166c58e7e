use std::fs;
use std::time::Instant;

use proptest::prelude::*;
use squidchain::bath::{CouplingMode, CouplingRegime};
use squidchain::dynamics::TimeGrid;
use squidchain::par::Execution;
use squidchain::scenario::*;
use squidchain::spin_chain::Basis;
use squidchain::units::ghz_to_rad_per_ns;
use squidchain::{Complex64, Error};
use tempfile::tempdir;

const FIG1_WITH_UNITS: &str = r#"
[chain]
n_sites = 2
heisenberg_GHz = "1 GHz"
splitting_GHz = "1500 MHz"

[bath]
temperature_GHz = "300 MHz"
radius_m = "10 um"
current_A = "3 uA"
density_kg_m3 = "5 g/cm3"
speed_m_s = "5 km/s"

[run]
initial_state = [0, 0, 0, 1]
"#;

fn fast(mut c: ScenarioConfig) -> ScenarioConfig {
    c.run.samples = Some(200);
    c
}

fn read_csv(path: &std::path::Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i]).collect()
}

#[test]
fn preset_parameters_with_units() {
    let cfg = parse_config(FIG1_WITH_UNITS).unwrap();
    let chain = cfg.chain_spec().unwrap();
    assert_eq!(chain.n_sites, 2);
    assert!((chain.heisenberg_j - ghz_to_rad_per_ns(1.0) / 8.0).abs() < 1e-14);
    assert!((chain.splitting_b - ghz_to_rad_per_ns(1.5) / 2.0).abs() < 1e-14);
    let bath = cfg.bath_spec().unwrap();
    assert!((bath.temperature_ghz - 0.3).abs() < 1e-15);
    assert!((bath.ring_radius - 10e-6).abs() < 1e-20);
    assert!((bath.current - 3e-6).abs() < 1e-20);
    assert!((bath.mass_density - 5000.0).abs() < 1e-9);
    assert!((bath.sound_speed - 5000.0).abs() < 1e-9);
    assert!((bath.spacing - 40e-6).abs() < 1e-18);
    assert_eq!(cfg.run.coupling_mode, CouplingMode::Auto);
    assert_eq!(cfg.run.initial_basis, Basis::Computational);

    let preset1 = preset("fig1").unwrap();
    assert_eq!(cfg.chain, preset1.chain);
    assert_eq!(cfg.run.initial_state, preset1.run.initial_state);
    assert_eq!(parse_config(&preset_text("fig1").unwrap()).unwrap(), preset1);
}

fn replace(text: &str, from: &str, to: &str) -> String {
    assert!(text.contains(from), "{from}");
    text.replacen(from, to, 1)
}

fn config_error_key(text: &str) -> String {
    match parse_config(text) {
        Err(Error::Config { key, .. }) => key,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn errors_name_the_offending_key() {
    let base = preset_text("fig1").unwrap();
    assert_eq!(config_error_key(&replace(&base, "current_A = 3e-6", "current_A = -1")), "bath.current_A");
    assert_eq!(config_error_key(&replace(&base, "radius_m = 1e-5", "radius_m = 0.0")), "bath.radius_m");
    assert_eq!(config_error_key(&replace(&base, "n_sites = 2", "n_sites = 2\nfoo = 1")), "chain.foo");
    assert_eq!(config_error_key(&replace(&base, "temperature_GHz = 0.3\n", "")), "bath.temperature_GHz");
    assert_eq!(config_error_key(&format!("{base}\n[extra]\nx = 1\n")), "extra");
    assert_eq!(
        config_error_key(&replace(&base, "coupling_mode = \"auto\"", "coupling_mode = \"sometimes\"")),
        "run.coupling_mode"
    );
    assert_eq!(config_error_key(&replace(&base, "radius_m = 1e-5", "radius_m = \"10 uA\"")), "bath.radius_m");
    assert_eq!(config_error_key(&replace(&base, "n_sites = 2", "n_sites = 5")), "chain.n_sites");
    assert_eq!(config_error_key("not toml ["), "<file>");
    // B ≥ 0 admits the boundary
    let zero = parse_config(&replace(&base, "splitting_GHz = 1.5", "splitting_GHz = 0.0")).unwrap();
    assert_eq!(zero.chain.splitting_ghz, 0.0);
}

#[test]
fn near_normalized_state_is_renormalized_with_warning() {
    let base = preset_text("fig1").unwrap();
    let text = replace(&base, "initial_state = [0.0, 0.0, 0.0, 1.0]", "initial_state = [0.0, 0.0, 0.0, 1.0000001]");
    let (cfg, warnings) = parse_config_verbose(&text).unwrap();
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].contains("run.initial_state"));
    assert_eq!(cfg.run.initial_state[3], Complex64::new(1.0, 0.0));
    let far = replace(&base, "initial_state = [0.0, 0.0, 0.0, 1.0]", "initial_state = [0.0, 0.0, 0.0, 1.01]");
    assert_eq!(config_error_key(&far), "run.initial_state");
    let complex = replace(&base, "initial_state = [0.0, 0.0, 0.0, 1.0]", "initial_state = [0, [0.6, 0.0], 0, [0.0, -0.8]]");
    let cfg = parse_config(&complex).unwrap();
    assert_eq!(cfg.run.initial_state[3], Complex64::new(0.0, -0.8));
}

fn arb_config() -> impl Strategy<Value = ScenarioConfig> {
    let pos = || 1e-9f64..1e4;
    (
        2usize..=4,
        (pos(), 0.0f64..10.0, pos(), pos(), pos(), pos(), pos(), pos()),
        (
            prop::option::of(pos()),
            prop::option::of(pos()),
            prop::option::of(1usize..1000),
            prop::option::of(1usize..5000),
            any::<bool>(),
            0usize..3,
            any::<bool>(),
            pos(),
        ),
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        any::<bool>(),
        prop::option::of("[a-z0-9_ \"]{0,12}"),
    )
        .prop_map(|(n, b, r, amps, real, label)| {
            let dim = 1 << n;
            let mut state: Vec<Complex64> = amps[..dim]
                .iter()
                .map(|&(re, im)| Complex64::new(re, if real { 0.0 } else { im }))
                .collect();
            state[0] += Complex64::new(1.5, 0.0);
            let norm = state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            state.iter_mut().for_each(|a| *a /= norm);
            let mut cfg = preset(if n == 2 { "fig1" } else { "fig2" }).unwrap();
            cfg.chain.n_sites = n;
            cfg.chain.heisenberg_ghz = b.0;
            cfg.chain.splitting_ghz = b.1;
            cfg.bath.temperature_ghz = b.2;
            cfg.bath.radius_m = b.3;
            cfg.bath.current_a = b.4;
            cfg.bath.density_kg_m3 = b.5;
            cfg.bath.speed_m_s = b.6;
            cfg.bath.spacing_over_r = b.7;
            cfg.run.t_max_ns = r.0;
            cfg.run.dt_ns = r.1;
            cfg.run.output_stride = r.2;
            cfg.run.samples = r.3;
            cfg.run.time_grid = if r.4 { TimeGrid::Log } else { TimeGrid::Linear };
            cfg.run.coupling_mode = [CouplingMode::Auto, CouplingMode::Independent, CouplingMode::Collective][r.5];
            cfg.run.initial_basis = if r.6 { Basis::Eigen } else { Basis::Computational };
            cfg.run.resonance_tol = r.7;
            cfg.run.initial_state = state;
            cfg.run.label = label;
            cfg.run.track = if r.6 { Some(vec![(1, dim), (2, 1)]) } else { None };
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn emit_then_parse_round_trips(cfg in arb_config()) {
        let text = emit(&cfg);
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn presets_round_trip_and_match_parameters() {
    for name in PRESETS {
        let cfg = preset(name).unwrap();
        assert_eq!(parse_config(&preset_text(name).unwrap()).unwrap(), cfg);
        assert_eq!(cfg.label(), name);
    }
    assert!(matches!(preset("fig9"), Err(Error::UnknownPreset(_))));

    // fig6 sits on the level crossing ω_12 = 0
    let a = analyze(&preset("fig6").unwrap()).unwrap();
    assert_eq!(a.config.chain.splitting_ghz, a.config.chain.heisenberg_ghz);
    assert!(a.es.omega(0, 1).abs() < 1e-12);

    // fig8 starts in |↑↑↓⟩ with |↑⟩, |↓⟩ = (|0⟩ ± |1⟩)/√2 and site 1 first
    let s = 0.5f64.sqrt();
    let up = [s, s];
    let down = [s, -s];
    let fig8 = preset("fig8").unwrap();
    assert_eq!(fig8.run.initial_basis, Basis::Computational);
    for bits in 0..8 {
        let want = up[(bits >> 2) & 1] * up[(bits >> 1) & 1] * down[bits & 1];
        assert!((fig8.run.initial_state[bits].re - want).abs() < 1e-15);
    }

    // fig5 resolves every cross pair to collective coupling
    let a = analyze(&preset("fig5").unwrap()).unwrap();
    let cross: Vec<_> = a.rates.regimes.iter().filter(|t| t.j != t.k).collect();
    assert!(!cross.is_empty());
    assert!(cross.iter().all(|t| t.regime == CouplingRegime::Collective));
}

#[test]
fn every_preset_runs_quickly_and_cleanly() {
    let dir = tempdir().unwrap();
    for name in PRESETS {
        let start = Instant::now();
        let report = run_scenario(&preset(name).unwrap(), &dir.path().join(name)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 10.0, "{name} took {secs} s");
        assert!(!report.diagnostics.flagged(), "{name}: {:?}", report.diagnostics.flags);
        let (header, rows) = read_csv(&report.csv_path);
        assert_eq!(header[0], "time_ns");
        assert_eq!(rows.len(), report.samples);
        let d = 1usize << report.n_sites;
        assert_eq!(header[d], format!("pop_{d}"));
        assert_eq!(header.iter().any(|h| h == "eof"), report.n_sites == 2);
        let text = fs::read_to_string(&report.report_path).unwrap();
        assert!(text.contains("[summary]"));
        assert!(text.contains(&format!("label = {name}")));
    }
}

#[test]
fn csv_values_carry_seventeen_digits() {
    let dir = tempdir().unwrap();
    let report = run_scenario(&fast(preset("fig3").unwrap()), dir.path()).unwrap();
    let text = fs::read_to_string(&report.csv_path).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "time_ns,pop_1,pop_2,pop_3,pop_4,re_c_1_4,im_c_1_4,eof,eof_upper,eof_lower,eof_avg"
    );
    let field = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{field}");
}

#[test]
fn runs_are_byte_identical() {
    let cfg = fast(preset("fig2").unwrap());
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    let ra = run_scenario(&cfg, a.path()).unwrap();
    let rb = run_scenario(&cfg, b.path()).unwrap();
    assert_eq!(fs::read(&ra.csv_path).unwrap(), fs::read(&rb.csv_path).unwrap());
    assert_eq!(fs::read(&ra.report_path).unwrap(), fs::read(&rb.report_path).unwrap());
}

#[test]
fn preset_behaviour_in_the_csv() {
    let dir = tempdir().unwrap();
    // fig5: ψ2 cannot relax
    let r = run_scenario(&preset("fig5").unwrap(), &dir.path().join("fig5")).unwrap();
    let (h, rows) = read_csv(&r.csv_path);
    let p2 = column(&h, &rows, "pop_2");
    assert!(p2.iter().all(|p| (p - 0.25).abs() < 1e-10));
    assert_eq!(r.network.describe(), "{1,3,4} {2}");

    // fig7: ρ̃_23 settles to a nonzero constant
    let r = run_scenario(&preset("fig7").unwrap(), &dir.path().join("fig7")).unwrap();
    let (h, rows) = read_csv(&r.csv_path);
    let (re, im) = (column(&h, &rows, "re_c_2_3"), column(&h, &rows, "im_c_2_3"));
    let mag: Vec<f64> = re.iter().zip(&im).map(|(x, y)| x.hypot(*y)).collect();
    let last = *mag.last().unwrap();
    let quarter = &mag[mag.len() * 3 / 4..];
    let drift = quarter.iter().map(|m| (m - last).abs()).fold(0.0, f64::max) / last;
    assert!(last > 0.1 && drift < 1e-6, "{last} {drift}");

    // fig1: entanglement surges in the middle of the run
    let r = run_scenario(&preset("fig1").unwrap(), &dir.path().join("fig1")).unwrap();
    let (h, rows) = read_csv(&r.csv_path);
    let eof = column(&h, &rows, "eof");
    assert!(eof[0] < 1e-12);
    assert!(r.max_eof.unwrap() > 0.05);
    let peak = eof.iter().cloned().fold(0.0, f64::max);
    assert!(*eof.last().unwrap() < 0.5 * peak);
}

#[test]
fn intermediate_regime_aborts_the_run() {
    let mut cfg = preset("fig1").unwrap();
    cfg.bath.radius_m = 1e-6;
    let dir = tempdir().unwrap();
    let err = run_scenario(&cfg, dir.path()).unwrap_err();
    assert!(err.is_physics_validity(), "{err}");
    assert!(err.to_string().contains("retune"));
}

#[test]
fn sweep_axis_must_be_sweepable() {
    let dir = tempdir().unwrap();
    let cfg = preset("fig1").unwrap();
    assert!(matches!(sweep(&cfg, "n_sites", &[2.0], dir.path()), Err(Error::NotSweepable(_))));
    assert!(matches!(sweep(&cfg, "run.label", &[1.0], dir.path()), Err(Error::NotSweepable(_))));
    assert!(with_axis(&cfg, "bath.temperature_GHz", 0.5).is_ok());
    assert!(matches!(
        with_axis(&cfg, "temperature_GHz", -1.0),
        Err(Error::Config { ref key, .. }) if key == "bath.temperature_GHz"
    ));
}

#[test]
fn single_value_sweep_equals_run() {
    let cfg = fast(preset("fig3").unwrap());
    let dir = tempdir().unwrap();
    let points = sweep(&cfg, "splitting_GHz", &[1.5], &dir.path().join("sweep")).unwrap();
    assert_eq!(points.len(), 1);
    let swept = points.into_iter().next().unwrap().outcome.unwrap();
    let run = run_scenario(&cfg, &dir.path().join("run")).unwrap();
    assert_eq!(fs::read(swept.csv_path).unwrap(), fs::read(run.csv_path).unwrap());
}

#[test]
fn splitting_sweep_through_the_crossing_changes_the_network() {
    let cfg = fast(preset("fig6").unwrap());
    let dir = tempdir().unwrap();
    // ±0.25 GHz keeps ω_12 τ_jk above the independent cut
    let values = [0.75, 1.0, 1.25, 0.9];
    let points = sweep(&cfg, "chain.splitting_GHz", &values, dir.path()).unwrap();
    let nets: Vec<_> = points[..3]
        .iter()
        .map(|p| p.outcome.as_ref().unwrap().network.clone())
        .collect();
    assert_eq!(nets[0].edges, nets[2].edges);
    assert!(nets[0].has_edge(0, 1));
    // at the crossing ψ1 and ψ2 are degenerate and their link vanishes
    assert!(!nets[1].has_edge(0, 1), "{:?}", nets[1].edges);
    for (i, p) in points.iter().enumerate() {
        assert!(p.dir.ends_with(format!("splitting_GHz_{i:03}")));
        assert_eq!(p.value, values[i]);
    }
    // closer to the crossing the pair coupling is intermediate and that point aborts
    assert!(points[3].outcome.as_ref().unwrap_err().is_physics_validity());
}

#[test]
fn ground_population_falls_with_temperature() {
    let cfg = fast(preset("fig1").unwrap());
    let dir = tempdir().unwrap();
    let temps = [0.1, 0.2, 0.3, 0.5, 1.0];
    let points = sweep(&cfg, "temperature_GHz", &temps, dir.path()).unwrap();
    let ground: Vec<f64> = points
        .iter()
        .map(|p| p.outcome.as_ref().unwrap().stationary_populations.as_ref().unwrap()[0])
        .collect();
    assert!(ground.windows(2).all(|w| w[1] < w[0]), "{ground:?}");
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    let cfg = fast(preset("fig3").unwrap());
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    let values = [0.2, 0.3];
    let seq = sweep_with(&cfg, "temperature_GHz", &values, a.path(), Execution::Sequential).unwrap();
    let par = sweep_with(&cfg, "temperature_GHz", &values, b.path(), Execution::Parallel).unwrap();
    for (s, p) in seq.iter().zip(&par) {
        let (s, p) = (s.outcome.as_ref().unwrap(), p.outcome.as_ref().unwrap());
        assert_eq!(fs::read(&s.csv_path).unwrap(), fs::read(&p.csv_path).unwrap());
    }
}
