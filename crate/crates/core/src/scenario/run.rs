//! Scenario execution: pipeline, CSV trajectory, run report, sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::config::ScenarioConfig;
use crate::bath::{markov_diagnostics, BathSpec, MarkovDiagnostics};
use crate::dynamics::{self, DensityMatrix, Diagnostics, EvolveOptions, Trajectory};
use crate::entanglement::{self, EofSample};
use crate::par::{self, Execution};
use crate::redfield::{self, Generator, RateTable, RegimeTag};
use crate::spin_chain::{eigensystem, EigenSystem, Network};
use crate::units::rad_per_ns_to_ghz;
use crate::{Error, Result};

/// Relative threshold for drawing a population-network edge.
pub const NETWORK_THRESHOLD: f64 = 1e-9;
/// `t_max` used when the generator is identically zero (ns).
pub const FALLBACK_T_MAX: f64 = 1000.0;

pub const CSV_NAME: &str = "trajectory.csv";
pub const REPORT_NAME: &str = "report.txt";

/// Everything that can be derived without integrating in time.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: ScenarioConfig,
    pub es: EigenSystem,
    pub bath: BathSpec,
    pub rates: RateTable,
    pub generator: Generator,
    pub network: Network,
    pub markov: MarkovDiagnostics,
}

/// Build eigensystem, rates and generator for a scenario.
pub fn analyze(config: &ScenarioConfig) -> Result<Analysis> {
    config.validate()?;
    let spec = config.chain_spec()?;
    let es = eigensystem(&spec)?;
    let bath = config.bath_spec()?;
    let rates = redfield::transition_rates(&es, &bath, config.run.coupling_mode)?;
    let classes = redfield::secular_filter(&es, config.run.resonance_tol)?;
    let ops = es.interaction_operators()?;
    let generator = redfield::build_generator(&es, &rates, &classes, &ops)?;
    let network = redfield::rate_network(&generator, NETWORK_THRESHOLD);
    let markov = markov_diagnostics(&bath, spec.n_sites, generator.norm());
    Ok(Analysis {
        config: config.clone(),
        es,
        bath,
        rates,
        generator,
        network,
        markov,
    })
}

impl Analysis {
    /// Initial state in the eigenbasis.
    pub fn initial_state(&self) -> Result<DensityMatrix> {
        let r = &self.config.run;
        DensityMatrix::pure(&r.initial_state, r.initial_basis)?.to_eigen(&self.es)
    }

    /// `t_max` from the config or from the slowest generator mode.
    pub fn t_max(&self) -> f64 {
        self.config.run.t_max_ns.unwrap_or_else(|| {
            dynamics::auto_t_max(&self.generator, self.config.run.n_efold, FALLBACK_T_MAX)
        })
    }

    /// Tracked coherences as 0-based `(α, δ)` with `α < δ`.
    pub fn tracked_pairs(&self, rho0: &DensityMatrix) -> Vec<(usize, usize)> {
        if let Some(t) = &self.config.run.track {
            return t
                .iter()
                .map(|&(a, d)| (a.min(d) - 1, a.max(d) - 1))
                .collect();
        }
        let dim = self.es.dim();
        let classes = &self.generator.classes;
        let mut live = vec![false; classes.len()];
        for a in 0..dim {
            for d in 0..dim {
                if a != d && rho0.matrix[(a, d)].norm() > 1e-14 {
                    live[classes.class(a, d)] = true;
                }
            }
        }
        let mut out = Vec::new();
        for a in 0..dim {
            for d in a + 1..dim {
                if live[classes.class(a, d)] {
                    out.push((a, d));
                }
            }
        }
        out
    }

    /// Coherence whose phase is scanned for the entanglement bounds: the
    /// largest initial coherence, or `(ψ_2, ψ_3)` when there is none.
    pub fn eof_pair(&self, rho0: &DensityMatrix) -> (usize, usize) {
        let dim = self.es.dim();
        let mut best = (1, 2);
        let mut best_mag = 1e-14;
        for a in 0..dim {
            for d in a + 1..dim {
                let m = rho0.matrix[(a, d)].norm();
                if m > best_mag {
                    best = (a, d);
                    best_mag = m;
                }
            }
        }
        best
    }

    /// Human-readable rate tables and network.
    pub fn rates_text(&self) -> String {
        let mut s = String::new();
        let es = &self.es;
        let dim = es.dim();
        let _ = writeln!(s, "energies (GHz):");
        for (a, e) in es.energies.iter().enumerate() {
            let _ = writeln!(
                s,
                "  psi_{:<2} E/h = {:>12.6}  m = {:>2}  l = {:>8.4}",
                a + 1,
                rad_per_ns_to_ghz(*e),
                es.m_numbers[a],
                es.l_numbers[a]
            );
        }
        let _ = writeln!(s, "coupling regimes (mode {}):", self.config.run.coupling_mode.name());
        for t in &self.rates.regimes {
            if t.j < t.k {
                let _ = writeln!(
                    s,
                    "  sites ({}, {}) at {:.6} GHz: {:?}",
                    t.j,
                    t.k,
                    rad_per_ns_to_ghz(t.omega),
                    t.regime
                );
            }
        }
        let w = redfield::relaxation_rates(&self.generator);
        let _ = writeln!(s, "population rates W[to][from] (1/ns):");
        for a in 0..dim {
            let row: Vec<String> = (0..dim).map(|b| format!("{:>12.4e}", w[(a, b)])).collect();
            let _ = writeln!(s, "  {}", row.join(" "));
        }
        let _ = writeln!(s, "network components: {}", self.network.describe());
        let edges: Vec<String> = self
            .network
            .edges
            .iter()
            .map(|(a, b)| format!("{}-{}", a + 1, b + 1))
            .collect();
        let _ = writeln!(s, "network edges: {}", edges.join(" "));
        s
    }
}

/// Outcome of one scenario run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub label: String,
    pub n_sites: usize,
    pub energies_ghz: Vec<f64>,
    pub regimes: Vec<RegimeTag>,
    pub markov: MarkovDiagnostics,
    pub network: Network,
    pub relaxation: DMatrix<f64>,
    /// `(α, δ, Γ̄_{αδ})` for tracked pairs, 0-based.
    pub decoherence: Vec<(usize, usize, f64)>,
    pub t_max_ns: f64,
    pub dt_ns: f64,
    pub steps: usize,
    pub stride: usize,
    pub samples: usize,
    pub slowest_rate: Option<f64>,
    pub diagnostics: Diagnostics,
    pub final_populations: Vec<f64>,
    pub stationary_populations: Option<Vec<f64>>,
    pub eof_pair: Option<(usize, usize)>,
    pub max_eof: Option<f64>,
    pub csv_path: PathBuf,
    pub report_path: PathBuf,
}

/// Integrate a scenario and compute the entanglement samples (two sites
/// only) without writing anything.
pub fn simulate(analysis: &Analysis) -> Result<(Trajectory, Option<Vec<EofSample>>)> {
    let rho0 = analysis.initial_state()?;
    let r = &analysis.config.run;
    let opts = EvolveOptions {
        dt: r.dt_ns,
        stride: r.output_stride,
        samples: r.samples.unwrap_or(dynamics::DEFAULT_SAMPLES),
        grid: r.time_grid,
    };
    let traj = dynamics::evolve_with(&analysis.generator, &rho0, analysis.t_max(), opts)?;
    let eof = if analysis.es.dim() == 4 {
        let pair = analysis.eof_pair(&rho0);
        Some(eof_series(analysis, &traj, pair)?)
    } else {
        None
    };
    Ok((traj, eof))
}

fn eof_series(analysis: &Analysis, traj: &Trajectory, pair: (usize, usize)) -> Result<Vec<EofSample>> {
    (0..traj.len())
        .map(|i| {
            let t = traj.times[i];
            let rho = traj.state(i).to_schrodinger(&analysis.es.energies, t)?;
            entanglement::eof_bounds(&rho, &analysis.es, pair, t)
        })
        .collect()
}

fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(
    path: &Path,
    traj: &Trajectory,
    pairs: &[(usize, usize)],
    eof: Option<&[EofSample]>,
) -> Result<()> {
    let d = traj.dim;
    let mut out = String::with_capacity(traj.len() * (d + 2 * pairs.len() + 5) * 25);
    out.push_str("time_ns");
    for a in 0..d {
        let _ = write!(out, ",pop_{}", a + 1);
    }
    for (a, b) in pairs {
        let _ = write!(out, ",re_c_{}_{},im_c_{}_{}", a + 1, b + 1, a + 1, b + 1);
    }
    if eof.is_some() {
        out.push_str(",eof,eof_upper,eof_lower,eof_avg");
    }
    out.push('\n');
    for i in 0..traj.len() {
        out.push_str(&g17(traj.times[i]));
        for a in 0..d {
            out.push(',');
            out.push_str(&g17(traj.element(i, a, a).re));
        }
        for &(a, b) in pairs {
            let z = traj.element(i, a, b);
            out.push(',');
            out.push_str(&g17(z.re));
            out.push(',');
            out.push_str(&g17(z.im));
        }
        if let Some(e) = eof {
            let s = &e[i];
            for v in [s.eof, s.upper, s.lower, s.phase_avg] {
                out.push(',');
                out.push_str(&g17(v));
            }
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Run the full pipeline and write `trajectory.csv` and `report.txt` into
/// `out_dir`. Identical inputs give byte-identical files.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunReport> {
    let analysis = analyze(config)?;
    fs::create_dir_all(out_dir)?;
    let rho0 = analysis.initial_state()?;
    let (traj, eof) = simulate(&analysis)?;
    let pairs = analysis.tracked_pairs(&rho0);
    let csv_path = out_dir.join(CSV_NAME);
    write_csv(&csv_path, &traj, &pairs, eof.as_deref())?;

    let gen = &analysis.generator;
    let decoherence = pairs
        .iter()
        .map(|&(a, d)| redfield::decoherence_rate(gen, a, d).map(|r| (a, d, r)))
        .collect::<Result<Vec<_>>>()?;
    let stationary_populations = redfield::stationary_state(gen, Some(&rho0))
        .ok()
        .and_then(|s| dynamics::populations(&s).ok());
    let final_populations = dynamics::populations(&traj.final_state())?;
    let report = RunReport {
        label: config.label().to_owned(),
        n_sites: config.chain.n_sites,
        energies_ghz: analysis.es.energies.iter().map(|&e| rad_per_ns_to_ghz(e)).collect(),
        regimes: analysis.rates.regimes.clone(),
        markov: analysis.markov,
        network: analysis.network.clone(),
        relaxation: redfield::relaxation_rates(gen),
        decoherence,
        t_max_ns: *traj.times.last().expect("nonempty"),
        dt_ns: traj.dt,
        steps: traj.steps,
        stride: traj.stride,
        samples: traj.len(),
        slowest_rate: gen.slowest_rate(),
        diagnostics: traj.diagnostics.clone(),
        final_populations,
        stationary_populations,
        eof_pair: eof.as_ref().map(|_| analysis.eof_pair(&rho0)),
        max_eof: eof
            .as_ref()
            .map(|e| e.iter().map(|s| s.eof).fold(0.0, f64::max)),
        csv_path,
        report_path: out_dir.join(REPORT_NAME),
    };
    fs::write(&report.report_path, render_report(&analysis, &report))?;
    Ok(report)
}

fn render_report(analysis: &Analysis, r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario {}", r.label);
    let _ = writeln!(s);
    s.push_str(&analysis.rates_text());
    let m = &r.markov;
    let _ = writeln!(s, "markov time scales (ns):");
    let _ = writeln!(s, "  tau_R = {:.4e}, max tau_jk = {:.4e}, hbar/kT = {:.4e}", m.tau_r_ns, m.max_tau_jk_ns, m.thermal_time_ns);
    let _ = writeln!(
        s,
        "  fastest system time = {:.4e}, separation = {:.3e} ({})",
        m.dynamics_time_ns,
        m.separation,
        if m.is_valid() { "ok" } else { "marginal" }
    );
    if !r.decoherence.is_empty() {
        let _ = writeln!(s, "decoherence rates (1/ns):");
        for (a, d, g) in &r.decoherence {
            let _ = writeln!(s, "  Gamma_bar[{},{}] = {:.6e}", a + 1, d + 1, g);
        }
    }
    let _ = writeln!(
        s,
        "integration: t_max = {:.6e} ns, dt = {:.6e} ns, {} steps, {} grid, {} samples",
        r.t_max_ns,
        r.dt_ns,
        r.steps,
        if r.stride == 0 { "log".to_owned() } else { format!("stride {}", r.stride) },
        r.samples
    );
    let d = &r.diagnostics;
    let _ = writeln!(
        s,
        "diagnostics: trace drift {:.3e}, Hermiticity drift {:.3e}, min eigenvalue {:.3e}",
        d.max_trace_drift,
        d.max_hermiticity_drift,
        d.min_eigenvalue()
    );
    for f in &d.flags {
        let _ = writeln!(s, "  FLAG: {f}");
    }

    let _ = writeln!(s);
    let _ = writeln!(s, "[summary]");
    let kv = |s: &mut String, k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv(&mut s, "label", r.label.clone());
    kv(&mut s, "n_sites", r.n_sites.to_string());
    kv(&mut s, "coupling_mode", analysis.config.run.coupling_mode.name().to_owned());
    kv(&mut s, "energies_GHz", join(&r.energies_ghz));
    kv(&mut s, "network_components", r.network.describe());
    kv(&mut s, "t_max_ns", g17(r.t_max_ns));
    kv(&mut s, "dt_ns", g17(r.dt_ns));
    kv(&mut s, "steps", r.steps.to_string());
    kv(&mut s, "samples", r.samples.to_string());
    kv(&mut s, "slowest_rate_per_ns", r.slowest_rate.map_or("none".into(), g17));
    kv(&mut s, "final_populations", join(&r.final_populations));
    if let Some(p) = &r.stationary_populations {
        kv(&mut s, "stationary_populations", join(p));
    }
    if let Some(e) = r.max_eof {
        kv(&mut s, "max_eof", g17(e));
    }
    kv(&mut s, "trace_drift", g17(d.max_trace_drift));
    kv(&mut s, "hermiticity_drift", g17(d.max_hermiticity_drift));
    kv(&mut s, "min_eigenvalue", g17(d.min_eigenvalue()));
    kv(&mut s, "flagged", d.flagged().to_string());
    kv(&mut s, "markov_separation", g17(m.separation));
    kv(&mut s, "trajectory", CSV_NAME.to_owned());
    s
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| g17(x)).collect::<Vec<_>>().join(" ")
}

/// Config keys that a sweep may vary.
pub const SWEEPABLE: [&str; 8] = [
    "heisenberg_GHz",
    "splitting_GHz",
    "temperature_GHz",
    "radius_m",
    "current_A",
    "density_kg_m3",
    "speed_m_s",
    "spacing_over_R",
];

/// Copy of `config` with one scalar key replaced.
pub fn with_axis(config: &ScenarioConfig, axis: &str, value: f64) -> Result<ScenarioConfig> {
    let mut c = config.clone();
    let key = axis.rsplit('.').next().unwrap_or(axis);
    match key {
        "heisenberg_GHz" => c.chain.heisenberg_ghz = value,
        "splitting_GHz" => c.chain.splitting_ghz = value,
        "temperature_GHz" => c.bath.temperature_ghz = value,
        "radius_m" => c.bath.radius_m = value,
        "current_A" => c.bath.current_a = value,
        "density_kg_m3" => c.bath.density_kg_m3 = value,
        "speed_m_s" => c.bath.speed_m_s = value,
        "spacing_over_R" => c.bath.spacing_over_r = value,
        _ => return Err(Error::NotSweepable(axis.to_owned())),
    }
    c.validate()?;
    Ok(c)
}

/// One point of a sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub dir: PathBuf,
    pub outcome: Result<RunReport>,
}

/// Run `config` once per value of `axis`, each into its own subdirectory.
pub fn sweep(config: &ScenarioConfig, axis: &str, values: &[f64], out_dir: &Path) -> Result<Vec<SweepPoint>> {
    sweep_with(config, axis, values, out_dir, Execution::default())
}

pub fn sweep_with(
    config: &ScenarioConfig,
    axis: &str,
    values: &[f64],
    out_dir: &Path,
    exec: Execution,
) -> Result<Vec<SweepPoint>> {
    let key = axis.rsplit('.').next().unwrap_or(axis);
    if !SWEEPABLE.contains(&key) {
        return Err(Error::NotSweepable(axis.to_owned()));
    }
    let jobs: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
    Ok(par::map(exec, &jobs, |&(i, v)| {
        let dir = out_dir.join(format!("{key}_{i:03}"));
        let outcome = with_axis(config, axis, v).and_then(|c| run_scenario(&c, &dir));
        SweepPoint {
            value: v,
            dir,
            outcome,
        }
    }))
}
