//! Time evolution of `ρ̃` under a fixed generator, Gibbs states and state
//! bookkeeping.
//!
//! The generator is constant, so a classical RK4 step is the fixed linear map
//! `M = I + E` with `E = hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24`. Steps between
//! stored samples are combined by repeated squaring in the `I + E` form, which
//! keeps the small increments from being absorbed into the identity.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{self, c, CMatrix, ZERO};
use crate::redfield::Generator;
use crate::spin_chain::{Basis, EigenSystem};
use crate::units::ghz_to_rad_per_ns;
use crate::{Error, Result};

/// Largest admissible `dt·‖L‖`.
pub const STABILITY_LIMIT: f64 = 0.1;
/// Default `dt·‖L‖`.
pub const DEFAULT_STEP_RATIO: f64 = 1e-3;
/// Eigenvalues below `−POSITIVITY_TOL` flag a trajectory.
pub const POSITIVITY_TOL: f64 = 1e-7;
pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-11;
/// Default number of stored intervals.
pub const DEFAULT_SAMPLES: usize = 2000;

const STATE_TOL: f64 = 1e-10;

/// Hermitian, unit-trace density matrix with a basis tag.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: CMatrix,
    pub basis: Basis,
}

impl DensityMatrix {
    /// Validate Hermiticity and unit trace (to 1e-10).
    pub fn new(matrix: CMatrix, basis: Basis) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and nonempty, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = linalg::hermiticity_error(&matrix);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:.3e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr - c(1.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        Ok(DensityMatrix { matrix, basis })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64], basis: Basis) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state norm² is {norm}, expected 1")));
        }
        let n = amplitudes.len();
        let m = CMatrix::from_fn(n, n, |a, b| amplitudes[a] * amplitudes[b].conj());
        DensityMatrix::new(m, basis)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    pub fn to_eigen(&self, es: &EigenSystem) -> Result<Self> {
        self.check_dim(es.dim())?;
        Ok(match self.basis {
            Basis::Eigen => self.clone(),
            Basis::Computational => DensityMatrix {
                matrix: es.basis.adjoint() * &self.matrix * &es.basis,
                basis: Basis::Eigen,
            },
        })
    }

    pub fn to_computational(&self, es: &EigenSystem) -> Result<Self> {
        self.check_dim(es.dim())?;
        Ok(match self.basis {
            Basis::Computational => self.clone(),
            Basis::Eigen => DensityMatrix {
                matrix: &es.basis * &self.matrix * es.basis.adjoint(),
                basis: Basis::Computational,
            },
        })
    }

    /// Schrödinger-picture state at time `t` from an interaction-picture
    /// eigenbasis state: `ρ_{αδ} = e^{−i(E_α−E_δ)t} ρ̃_{αδ}`.
    pub fn to_schrodinger(&self, energies: &[f64], t: f64) -> Result<Self> {
        if self.basis != Basis::Eigen {
            return Err(Error::BasisMismatch { expected: "eigen" });
        }
        self.check_dim(energies.len())?;
        let n = self.dim();
        let m = CMatrix::from_fn(n, n, |a, d| {
            let phase = -(energies[a] - energies[d]) * t;
            self.matrix[(a, d)] * Complex64::from_polar(1.0, phase)
        });
        Ok(DensityMatrix { matrix: m, basis: Basis::Eigen })
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: dim,
                found: self.dim(),
            })
        }
    }
}

/// Gibbs state `e^{−H/k_BT}/Z`, diagonal in the eigenbasis.
pub fn gibbs_state(es: &EigenSystem, temperature_ghz: f64) -> Result<DensityMatrix> {
    if !(temperature_ghz > 0.0) {
        return Err(Error::InvalidBath(format!(
            "temperature must be > 0, got {temperature_ghz}"
        )));
    }
    let kt = ghz_to_rad_per_ns(temperature_ghz);
    let e0 = es.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = es.energies.iter().map(|e| (-(e - e0) / kt).exp()).collect();
    let z: f64 = w.iter().sum();
    let n = es.dim();
    let m = CMatrix::from_fn(n, n, |a, b| if a == b { c(w[a] / z) } else { ZERO });
    DensityMatrix::new(m, Basis::Eigen)
}

/// Diagonal of an eigenbasis state.
pub fn populations(rho: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.basis != Basis::Eigen {
        return Err(Error::BasisMismatch { expected: "eigen" });
    }
    Ok((0..rho.dim()).map(|a| rho.matrix[(a, a)].re).collect())
}

/// Off-diagonal element `ρ̃_{αδ}` with `α < δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    pub alpha: usize,
    pub delta: usize,
    pub value: Complex64,
}

/// Strict upper triangle of an eigenbasis state. Fails if any element breaks
/// `|ρ_{αδ}|² ≤ ρ_{αα} ρ_{δδ}` by more than 1e-12.
pub fn coherences(rho: &DensityMatrix) -> Result<Vec<Coherence>> {
    let pops = populations(rho)?;
    let n = rho.dim();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for d in a + 1..n {
            let v = rho.matrix[(a, d)];
            if v.norm_sqr() > pops[a] * pops[d] + 1e-12 {
                return Err(Error::InvalidState(format!(
                    "|ρ_{a}{d}|² = {:.3e} exceeds ρ_{a}{a}·ρ_{d}{d} = {:.3e}",
                    v.norm_sqr(),
                    pops[a] * pops[d]
                )));
            }
            out.push(Coherence {
                alpha: a,
                delta: d,
                value: v,
            });
        }
    }
    Ok(out)
}

/// Invariant monitors collected along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub max_trace_drift: f64,
    pub max_hermiticity_drift: f64,
    /// Minimum eigenvalue at every stored sample.
    pub min_eigenvalues: Vec<f64>,
    pub positivity_violations: usize,
    pub flags: Vec<String>,
}

impl Diagnostics {
    pub fn flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Stored samples of `vec(ρ̃)` (eigenbasis, interaction picture).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub dt: f64,
    pub steps: usize,
    /// Steps between samples; 0 on a log grid.
    pub stride: usize,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> DensityMatrix {
        DensityMatrix {
            matrix: linalg::unvectorize(&self.states[i], self.dim),
            basis: Basis::Eigen,
        }
    }

    pub fn final_state(&self) -> DensityMatrix {
        self.state(self.len() - 1)
    }

    pub fn element(&self, i: usize, alpha: usize, delta: usize) -> Complex64 {
        self.states[i][alpha * self.dim + delta]
    }

    pub fn population_series(&self, alpha: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[alpha * self.dim + alpha].re).collect()
    }

    pub fn coherence_series(&self, alpha: usize, delta: usize) -> Vec<Complex64> {
        self.states.iter().map(|s| s[alpha * self.dim + delta]).collect()
    }
}

/// Integration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Step size (ns); `None` uses `DEFAULT_STEP_RATIO/‖L‖`.
    pub dt: Option<f64>,
    /// Steps between stored samples; `None` picks one from `samples`.
    pub stride: Option<usize>,
    /// Target number of stored intervals when `stride` is `None`.
    pub samples: usize,
    pub grid: TimeGrid,
}

/// Spacing of stored samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeGrid {
    #[default]
    Linear,
    /// Geometric in the step index from one step up to `t_max`, for
    /// generators whose rates span many decades. `stride` is ignored.
    Log,
}

impl TimeGrid {
    pub fn name(self) -> &'static str {
        match self {
            TimeGrid::Linear => "linear",
            TimeGrid::Log => "log",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(TimeGrid::Linear),
            "log" => Some(TimeGrid::Log),
            _ => None,
        }
    }
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            dt: None,
            stride: None,
            samples: DEFAULT_SAMPLES,
            grid: TimeGrid::Linear,
        }
    }
}

/// `DEFAULT_STEP_RATIO/‖L‖`, or `t_max` for a zero generator.
pub fn default_dt(gen: &Generator, t_max: f64) -> f64 {
    let norm = gen.norm();
    if norm == 0.0 {
        t_max
    } else {
        DEFAULT_STEP_RATIO / norm
    }
}

/// Time for the slowest nonzero mode of the generator to decay by
/// `n_efold` e-foldings. Falls back to `fallback` for a zero generator.
pub fn auto_t_max(gen: &Generator, n_efold: f64, fallback: f64) -> f64 {
    match gen.slowest_rate() {
        Some(r) => n_efold / r,
        None => fallback,
    }
}

/// The increment `E` of one RK4 step, `M = I + E`.
pub fn rk4_increment(gen: &Generator, dt: f64) -> DMatrix<f64> {
    let hl = &gen.matrix * dt;
    let hl2 = &hl * &hl;
    let hl3 = &hl2 * &hl;
    let hl4 = &hl3 * &hl;
    hl + hl2 * 0.5 + hl3 * (1.0 / 6.0) + hl4 * (1.0 / 24.0)
}

/// `E_n` with `(I + E)^n = I + E_n`.
pub fn increment_power(e: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let dim = e.nrows();
    // (I + a)(I + b) = I + a + b + ab
    let compose = |a: &DMatrix<f64>, b: &DMatrix<f64>| a + b + a * b;
    let mut result = DMatrix::<f64>::zeros(dim, dim);
    let mut base = e.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = compose(&result, &base);
        }
        k >>= 1;
        if k > 0 {
            base = compose(&base, &base);
        }
    }
    result
}

fn apply_increment(e: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let mut out = v.to_vec();
    for r in 0..n {
        let mut re = 0.0;
        let mut im = 0.0;
        for s in 0..n {
            let x = e[(r, s)];
            if x != 0.0 {
                re += x * v[s].re;
                im += x * v[s].im;
            }
        }
        out[r] += Complex64::new(re, im);
    }
    out
}

/// Integrate with step `dt` up to `t_max`.
pub fn evolve(gen: &Generator, rho0: &DensityMatrix, t_max: f64, dt: f64) -> Result<Trajectory> {
    evolve_with(
        gen,
        rho0,
        t_max,
        EvolveOptions {
            dt: Some(dt),
            ..EvolveOptions::default()
        },
    )
}

/// Integrate up to `t_max` with explicit options.
///
/// The number of steps is rounded up to a multiple of the output stride and
/// `dt` is shrunk so that the last sample lands exactly on `t_max`.
pub fn evolve_with(
    gen: &Generator,
    rho0: &DensityMatrix,
    t_max: f64,
    opts: EvolveOptions,
) -> Result<Trajectory> {
    let d = gen.dim;
    if rho0.basis != Basis::Eigen {
        return Err(Error::BasisMismatch { expected: "eigen" });
    }
    if rho0.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            found: rho0.dim(),
        });
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidState(format!("t_max must be > 0, got {t_max}")));
    }
    let norm = gen.norm();
    let dt_req = opts.dt.unwrap_or_else(|| default_dt(gen, t_max));
    if !(dt_req > 0.0) {
        return Err(Error::InvalidState(format!("dt must be > 0, got {dt_req}")));
    }
    let ratio = dt_req * norm;
    if ratio >= STABILITY_LIMIT {
        return Err(Error::Stability {
            ratio,
            suggested: DEFAULT_STEP_RATIO / norm,
        });
    }
    let min_steps = (t_max / dt_req).ceil().max(1.0);
    let (times, states, steps, stride, dt) = match opts.grid {
        TimeGrid::Linear => {
            let stride = match opts.stride {
                Some(0) => return Err(Error::InvalidState("output stride must be ≥ 1".into())),
                Some(s) => s,
                None => (min_steps / opts.samples.max(1) as f64).ceil().max(1.0) as usize,
            };
            let n_samples = (min_steps / stride as f64).ceil() as usize;
            let steps = n_samples * stride;
            let dt = t_max / steps as f64;
            let e = rk4_increment(gen, dt);
            let e_stride = increment_power(&e, stride);
            let mut times = Vec::with_capacity(n_samples + 1);
            let mut states = Vec::with_capacity(n_samples + 1);
            let mut v = linalg::vectorize(&rho0.matrix);
            times.push(0.0);
            states.push(v.clone());
            for i in 1..=n_samples {
                v = apply_increment(&e_stride, &v);
                times.push(if i == n_samples {
                    t_max
                } else {
                    (i * stride) as f64 * dt
                });
                states.push(v.clone());
            }
            (times, states, steps, stride, dt)
        }
        TimeGrid::Log => {
            if min_steps >= 2f64.powi(62) {
                return Err(Error::InvalidState(format!(
                    "t_max/dt = {min_steps:.3e} steps is too many"
                )));
            }
            let steps = min_steps as u64;
            let dt = t_max / steps as f64;
            let marks = log_marks(steps, opts.samples.max(1));
            // (I + E)^(2^b) = I + powers[b]
            let mut powers = vec![rk4_increment(gen, dt)];
            while (1u64 << powers.len()) <= steps {
                let last = powers.last().expect("nonempty");
                powers.push(last + last + last * last);
            }
            let mut times = Vec::with_capacity(marks.len() + 1);
            let mut states = Vec::with_capacity(marks.len() + 1);
            let mut v = linalg::vectorize(&rho0.matrix);
            times.push(0.0);
            states.push(v.clone());
            let mut at = 0u64;
            for &k in &marks {
                let mut gap = k - at;
                let mut b = 0;
                while gap > 0 {
                    if gap & 1 == 1 {
                        v = apply_increment(&powers[b], &v);
                    }
                    gap >>= 1;
                    b += 1;
                }
                at = k;
                times.push(if k == steps { t_max } else { k as f64 * dt });
                states.push(v.clone());
            }
            (times, states, steps as usize, 0, dt)
        }
    };

    let diagnostics = diagnose(d, &states);
    Ok(Trajectory {
        dim: d,
        times,
        states,
        dt,
        steps,
        stride,
        diagnostics,
    })
}

/// Strictly increasing step indices, geometric from 1 to `steps`.
fn log_marks(steps: u64, samples: usize) -> Vec<u64> {
    let ln = (steps as f64).ln();
    let mut marks: Vec<u64> = (0..=samples)
        .map(|i| {
            let f = if samples == 0 { 1.0 } else { i as f64 / samples as f64 };
            ((f * ln).exp().round() as u64).clamp(1, steps)
        })
        .collect();
    marks.dedup();
    if marks.last() != Some(&steps) {
        marks.push(steps);
    }
    marks
}

fn diagnose(d: usize, states: &[Vec<Complex64>]) -> Diagnostics {
    let mut max_trace_drift: f64 = 0.0;
    let mut max_hermiticity_drift: f64 = 0.0;
    let mut min_eigenvalues = Vec::with_capacity(states.len());
    let mut positivity_violations = 0;
    for s in states {
        let m = linalg::unvectorize(s, d);
        max_trace_drift = max_trace_drift.max((linalg::trace(&m) - c(1.0)).norm());
        max_hermiticity_drift = max_hermiticity_drift.max(linalg::hermiticity_error(&m));
        let ev = linalg::min_eigenvalue(&m);
        if ev < -POSITIVITY_TOL {
            positivity_violations += 1;
        }
        min_eigenvalues.push(ev);
    }
    let mut flags = Vec::new();
    if max_trace_drift > TRACE_TOL {
        flags.push(format!("trace drift {max_trace_drift:.3e} exceeds {TRACE_TOL:e}"));
    }
    if max_hermiticity_drift > HERMITICITY_TOL {
        flags.push(format!(
            "Hermiticity drift {max_hermiticity_drift:.3e} exceeds {HERMITICITY_TOL:e}"
        ));
    }
    if positivity_violations > 0 {
        flags.push(format!(
            "{positivity_violations} samples with eigenvalue below -{POSITIVITY_TOL:e}"
        ));
    }
    Diagnostics {
        max_trace_drift,
        max_hermiticity_drift,
        min_eigenvalues,
        positivity_violations,
        flags,
    }
}
