mod support;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use squidchain::dynamics::*;
use squidchain::linalg::{self, c, CMatrix};
use squidchain::redfield::{build_generator, secular_filter, stationary_state, Generator, RateTable, DEFAULT_RESONANCE_TOL};
use squidchain::scenario::{self, Analysis, PRESETS};
use squidchain::spin_chain::{eigensystem, Basis, ChainSpec};
use squidchain::units::ghz_to_rad_per_ns;
use squidchain::{Complex64, Error};

fn analysis(name: &str) -> Analysis {
    scenario::analyze(&scenario::preset(name).unwrap()).unwrap()
}

fn options(a: &Analysis) -> EvolveOptions {
    let r = &a.config.run;
    EvolveOptions {
        dt: r.dt_ns,
        stride: r.output_stride,
        samples: r.samples.unwrap_or(DEFAULT_SAMPLES),
        grid: r.time_grid,
    }
}

/// `exp(L t) vec(ρ0)` with the real generator acting on both parts.
fn oracle(gen: &Generator, rho0: &DensityMatrix, t: f64) -> Vec<Complex64> {
    let inc = support::expm_minus_identity(&(&gen.matrix * t));
    let (re, im) = support::split(&linalg::vectorize(&rho0.matrix));
    let (re, im) = (&re + &inc * &re, &im + &inc * &im);
    re.iter().zip(im.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect()
}

#[test]
fn exponential_oracles_agree() {
    for name in ["fig1", "fig2", "fig5"] {
        let a = analysis(name);
        let lt = &a.generator.matrix * (5.0 / a.generator.norm());
        let n = lt.nrows();
        let pade = support::expm(&lt);
        let inc = support::expm_minus_identity(&lt) + DMatrix::<f64>::identity(n, n);
        assert!(support::max_abs_diff(&pade, &inc) < 1e-12, "{name}");
    }
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn preset_endpoints_match_matrix_exponential() {
    for name in PRESETS {
        let a = analysis(name);
        let rho0 = a.initial_state().unwrap();
        let t = a.t_max();
        let traj = evolve_with(&a.generator, &rho0, t, options(&a)).unwrap();
        assert_eq!(*traj.times.last().unwrap(), t);
        let want = oracle(&a.generator, &rho0, t);
        let err = max_diff(traj.states.last().unwrap(), &want);
        assert!(err < 1e-8, "{name}: endpoint error {err}");
        assert!(traj.diagnostics.max_trace_drift < 1e-9, "{name}");
        assert!(traj.diagnostics.max_hermiticity_drift < 1e-11, "{name}");
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]), "{name}");
    }
}

fn endpoint_error(gen: &Generator, rho0: &DensityMatrix, h: f64, steps: usize) -> f64 {
    let t = h * steps as f64;
    let opts = EvolveOptions {
        dt: Some(h),
        samples: 1,
        ..EvolveOptions::default()
    };
    let traj = evolve_with(gen, rho0, t, opts).unwrap();
    assert_eq!(traj.steps, steps);
    max_diff(traj.states.last().unwrap(), &oracle(gen, rho0, t))
}

#[test]
fn fourth_order_convergence() {
    for name in ["fig1", "fig2", "fig7"] {
        let a = analysis(name);
        let rho0 = a.initial_state().unwrap();
        let h = 0.05 / a.generator.norm();
        let coarse = endpoint_error(&a.generator, &rho0, h, 400);
        let fine = endpoint_error(&a.generator, &rho0, h / 2.0, 800);
        let factor = coarse / fine;
        assert!((12.0..=20.0).contains(&factor), "{name}: {coarse:e}/{fine:e} = {factor}");
    }
}

#[test]
fn zero_generator_keeps_the_state() {
    let es = eigensystem(&ChainSpec::from_ghz(2, 1.0, 1.5).unwrap()).unwrap();
    let classes = secular_filter(&es, DEFAULT_RESONANCE_TOL).unwrap();
    let gen = build_generator(&es, &RateTable::zeros(2, 4), &classes, &es.interaction_operators().unwrap()).unwrap();
    let s = 0.5f64.sqrt();
    let rho0 = DensityMatrix::pure(&[c(s), c(0.0), c(0.0), c(s)], Basis::Eigen).unwrap();
    let traj = evolve(&gen, &rho0, 10.0, 0.5).unwrap();
    assert!(traj.len() > 1);
    for s in &traj.states {
        assert_eq!(s, &traj.states[0]);
    }
}

#[test]
fn stability_guard() {
    let a = analysis("fig1");
    let rho0 = a.initial_state().unwrap();
    let dt = 0.2 / a.generator.norm();
    match evolve(&a.generator, &rho0, 100.0 * dt, dt) {
        Err(Error::Stability { ratio, suggested }) => {
            assert!((ratio - 0.2).abs() < 1e-12);
            assert!(suggested * a.generator.norm() < STABILITY_LIMIT);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(evolve(&a.generator, &rho0, -1.0, dt / 10.0).is_err());
    let wrong = DensityMatrix::new(CMatrix::identity(4, 4) * c(0.25), Basis::Computational).unwrap();
    assert!(matches!(evolve(&a.generator, &wrong, 1.0, 1e-3), Err(Error::BasisMismatch { .. })));
}

#[test]
fn fig1_relaxes_through_the_middle_states() {
    let a = analysis("fig1");
    let rho0 = a.initial_state().unwrap();
    assert!((populations(&rho0).unwrap()[3] - 1.0).abs() < 1e-12);
    let traj = evolve_with(&a.generator, &rho0, a.t_max(), options(&a)).unwrap();
    let gibbs = gibbs_state(&a.es, a.bath.temperature_ghz).unwrap();
    let dist = linalg::trace_distance(&traj.final_state().matrix, &gibbs.matrix);
    assert!(dist < 1e-6, "{dist}");
    let gp = populations(&gibbs).unwrap();
    for s in [1, 2] {
        let peak = traj.population_series(s).into_iter().fold(0.0, f64::max);
        assert!(peak > 0.05 && peak > 2.0 * gp[s], "ψ{}: peak {peak}, final {}", s + 1, gp[s]);
    }
}

#[test]
fn population_block_approaches_stationary_monotonically() {
    for name in ["fig1", "fig3", "fig2"] {
        let a = analysis(name);
        let rho0 = a.initial_state().unwrap();
        let traj = evolve_with(&a.generator, &rho0, a.t_max(), options(&a)).unwrap();
        let st = populations(&stationary_state(&a.generator, None).unwrap()).unwrap();
        let dist: Vec<f64> = (0..traj.len())
            .map(|i| {
                (0..a.es.dim())
                    .map(|s| (traj.element(i, s, s).re - st[s]).abs())
                    .sum::<f64>()
                    * 0.5
            })
            .collect();
        let start = dist.len() / 10;
        for w in dist[start..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{name}");
        }
    }
}

#[test]
fn log_and_linear_grids_agree() {
    let a = analysis("fig1");
    let rho0 = a.initial_state().unwrap();
    let t = a.t_max();
    let lin = evolve_with(&a.generator, &rho0, t, EvolveOptions::default()).unwrap();
    let log = evolve_with(
        &a.generator,
        &rho0,
        t,
        EvolveOptions {
            grid: TimeGrid::Log,
            ..EvolveOptions::default()
        },
    )
    .unwrap();
    assert_eq!(log.stride, 0);
    assert!(log.times[1] <= 2.0 * log.dt);
    let err = max_diff(lin.states.last().unwrap(), log.states.last().unwrap());
    assert!(err < 1e-10, "{err}");
    let want = oracle(&a.generator, &rho0, log.times[log.len() / 2]);
    assert!(max_diff(&log.states[log.len() / 2], &want) < 1e-8);
}

#[test]
fn gibbs_state_properties() {
    let es = eigensystem(&ChainSpec::from_ghz(2, 1.0, 1.5).unwrap()).unwrap();
    let hot = populations(&gibbs_state(&es, 1e9).unwrap()).unwrap();
    assert!(hot.iter().all(|p| (p - 0.25).abs() < 1e-8));

    let t = 0.3;
    let g = gibbs_state(&es, t).unwrap();
    assert!((g.trace() - c(1.0)).norm() < 1e-14);
    assert_eq!(g.basis, Basis::Eigen);
    let p = populations(&g).unwrap();
    let kt = ghz_to_rad_per_ns(t);
    for a in 0..3 {
        let want = (-(es.energies[a + 1] - es.energies[a]) / kt).exp();
        assert!((p[a + 1] / p[a] / want - 1.0).abs() < 1e-12);
    }
    // partition sum over the energies lJ − mB
    let (j, b) = (ghz_to_rad_per_ns(1.0) / 8.0, ghz_to_rad_per_ns(1.5) / 2.0);
    let e = [2.0 * j - 2.0 * b, -6.0 * j, 2.0 * j, 2.0 * j + 2.0 * b];
    let z: f64 = e.iter().map(|x| (-x / kt).exp()).sum();
    assert!((p[0] - (-e[0] / kt).exp() / z).abs() < 1e-12);
    assert!(gibbs_state(&es, 0.0).is_err());
}

#[test]
fn populations_and_coherences_of_simple_states() {
    let pure = DensityMatrix::pure(&[c(0.0), c(1.0), c(0.0), c(0.0)], Basis::Eigen).unwrap();
    assert_eq!(populations(&pure).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    assert!(coherences(&pure).unwrap().iter().all(|x| x.value.norm() == 0.0));

    let s = 0.5f64.sqrt();
    let sup = DensityMatrix::pure(&[c(s), c(0.0), c(0.0), c(s)], Basis::Eigen).unwrap();
    let cs = coherences(&sup).unwrap();
    assert_eq!(cs.len(), 6);
    let c14 = cs.iter().find(|x| (x.alpha, x.delta) == (0, 3)).unwrap();
    assert!((c14.value - c(0.5)).norm() < 1e-15);

    let comp = DensityMatrix::pure(&[c(1.0), c(0.0), c(0.0), c(0.0)], Basis::Computational).unwrap();
    assert!(matches!(populations(&comp), Err(Error::BasisMismatch { .. })));
}

proptest! {
    #[test]
    fn coherences_obey_cauchy_schwarz(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::new(support::random_density(&mut rng, n), Basis::Eigen).unwrap();
        let p = populations(&rho).unwrap();
        for x in coherences(&rho).unwrap() {
            prop_assert!(x.value.norm_sqr() <= p[x.alpha] * p[x.delta] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn increment_power_composes(k in 1usize..300) {
        let a = analysis_fig3();
        let e = rk4_increment(&a.generator, 0.01 / a.generator.norm());
        let n = e.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        let mut direct = id.clone();
        for _ in 0..k {
            direct = &direct * (&id + &e);
        }
        let fast = increment_power(&e, k) + &id;
        prop_assert!(support::max_abs_diff(&direct, &fast) < 1e-12);
    }
}

fn analysis_fig3() -> &'static Analysis {
    static A: std::sync::OnceLock<Analysis> = std::sync::OnceLock::new();
    A.get_or_init(|| analysis("fig3"))
}

#[test]
fn trajectory_accessors() {
    let a = analysis_fig3();
    let rho0 = a.initial_state().unwrap();
    let traj = evolve(&a.generator, &rho0, 1000.0, 1.0).unwrap();
    assert_eq!(traj.times[0], 0.0);
    assert_eq!(traj.state(0), rho0);
    assert_eq!(traj.coherence_series(0, 3)[0], rho0.matrix[(0, 3)]);
    let schr = traj.final_state().to_schrodinger(&a.es.energies, 1000.0).unwrap();
    // populations are picture independent
    for s in 0..4 {
        assert!((schr.matrix[(s, s)] - traj.final_state().matrix[(s, s)]).norm() < 1e-15);
    }
    let back = schr.to_computational(&a.es).unwrap().to_eigen(&a.es).unwrap();
    assert!(linalg::max_abs(&(back.matrix - &schr.matrix)) < 1e-14);
}
