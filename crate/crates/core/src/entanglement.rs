//! Two-qubit concurrence, entanglement of formation, and coherence decay fits.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::dynamics::{DensityMatrix, Trajectory};
use crate::linalg::{c, CMatrix};
use crate::spin_chain::{Basis, EigenSystem};
use crate::{Error, Result};

/// Number of phases in the bound scan.
pub const PHASE_GRID: usize = 256;
/// Default moving-average window (samples).
pub const MOVING_AVERAGE_WINDOW: usize = 64;

type M4 = Matrix4<Complex64>;

fn as_m4(rho: &DensityMatrix) -> Result<M4> {
    if rho.dim() != 4 {
        return Err(Error::Dimension {
            expected: 4,
            found: rho.dim(),
        });
    }
    if rho.basis != Basis::Computational {
        return Err(Error::BasisMismatch {
            expected: "computational",
        });
    }
    Ok(M4::from_fn(|a, b| rho.matrix[(a, b)]))
}

/// `σ^y ⊗ σ^y` in the site basis. The single-site `σ^y` is `[[0, i], [−i, 0]]`,
/// so the product is real: `+1` on the anti-diagonal corners and `−1` on the
/// inner anti-diagonal.
fn yy() -> M4 {
    let mut m = M4::zeros();
    m[(0, 3)] = c(-1.0);
    m[(3, 0)] = c(-1.0);
    m[(1, 2)] = c(1.0);
    m[(2, 1)] = c(1.0);
    m
}

/// Concurrence of a raw 4×4 matrix in the site basis.
///
/// With `ρ = Σ p_i |v_i⟩⟨v_i|` and `W = [√p_i v_i]`, the `λ_i` are the
/// singular values of `τ = Wᵀ (σ^y⊗σ^y) W`. Going through `W` instead of
/// the eigenvalues of `√ρ ρ̃ √ρ` keeps rank-deficient states accurate: noise
/// in a zero eigenvalue enters `τ` at second order instead of as a square
/// root.
pub fn concurrence_matrix(rho: &M4) -> f64 {
    let sym = (rho + rho.adjoint()) * c(0.5);
    let eig = sym.symmetric_eigen();
    let roots = Vector4::from_fn(|i, _| c(eig.eigenvalues[i].max(0.0).sqrt()));
    let w = eig.eigenvectors * M4::from_diagonal(&roots);
    let tau = w.transpose() * yy() * w;
    let mut lam: Vec<f64> = tau.svd(false, false).singular_values.iter().copied().collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    (lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0)
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, with `λ_i` the
/// descending square roots of the eigenvalues of `√ρ ρ̃ √ρ` and
/// `ρ̃ = (σ^y⊗σ^y) ρ* (σ^y⊗σ^y)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence_matrix(&as_m4(rho)?))
}

fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// `h((1 + √(1 − C²))/2)`.
pub fn eof_from_concurrence(conc: f64) -> f64 {
    let conc = conc.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - conc * conc).sqrt())).clamp(0.0, 1.0)
}

pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    concurrence(rho).map(eof_from_concurrence)
}

/// Entanglement of formation with its phase-scan envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EofSample {
    pub time: f64,
    pub eof: f64,
    pub upper: f64,
    pub lower: f64,
    /// Mean over the phase grid.
    pub phase_avg: f64,
}

/// Bounds from rotating the phase of `ρ_{αδ}` through `PHASE_GRID` values.
///
/// `rho` is an eigenbasis state (Schrödinger picture, so that the `θ = 0`
/// grid point is the actual state). `upper` is the grid maximum, `lower` the
/// entanglement of the state with `ρ_{αδ}` removed, `phase_avg` the grid
/// mean.
pub fn eof_bounds(
    rho: &DensityMatrix,
    es: &EigenSystem,
    pair: (usize, usize),
    time: f64,
) -> Result<EofSample> {
    if rho.basis != Basis::Eigen {
        return Err(Error::BasisMismatch { expected: "eigen" });
    }
    if rho.dim() != 4 || es.dim() != 4 {
        return Err(Error::Dimension {
            expected: 4,
            found: rho.dim(),
        });
    }
    let (a, d) = pair;
    if a == d || a >= 4 || d >= 4 {
        return Err(Error::InvalidState(format!("invalid coherence pair ({a}, {d})")));
    }
    let u = M4::from_fn(|r, col| es.basis[(r, col)]);
    let ud = u.adjoint();
    let base = M4::from_fn(|r, col| rho.matrix[(r, col)]);
    let coh = base[(a, d)];
    let to_site = |m: &M4| &u * m * &ud;

    let mut dephased = base;
    dephased[(a, d)] = c(0.0);
    dephased[(d, a)] = c(0.0);
    let lower = eof_from_concurrence(concurrence_matrix(&to_site(&dephased)));

    let mut upper: f64 = 0.0;
    let mut sum = 0.0;
    let mut eof = 0.0;
    for i in 0..PHASE_GRID {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / PHASE_GRID as f64;
        let mut m = dephased;
        let z = coh * Complex64::from_polar(1.0, theta);
        m[(a, d)] = z;
        m[(d, a)] = z.conj();
        let e = eof_from_concurrence(concurrence_matrix(&to_site(&m)));
        if i == 0 {
            eof = e;
        }
        upper = upper.max(e);
        sum += e;
    }
    Ok(EofSample {
        time,
        eof,
        upper,
        lower,
        phase_avg: sum / PHASE_GRID as f64,
    })
}

/// Centered moving average; the window shrinks at the ends.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let n = xs.len();
    if n == 0 || window <= 1 {
        return xs.to_vec();
    }
    let half = window / 2;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + xs[i];
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + window - half).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Part of a coherence series used by [`fit_decay`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitWindow {
    /// From the first sample until the magnitude has fallen by `e^{-3}`.
    Initial,
    /// After the magnitude peak, once it has fallen below `e^{-3}` of the
    /// peak.
    Late,
    /// Explicit time range (ns).
    Range(f64, f64),
}

/// Minimum usable samples for a fit.
pub const MIN_FIT_SAMPLES: usize = 10;
/// Magnitudes at or below this are not used.
pub const FIT_FLOOR: f64 = 1e-9;

/// Least-squares decay rate of `(t, |y|)` data: minus the slope of `ln|y|`.
pub fn fit_exponential(times: &[f64], magnitudes: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(magnitudes)
        .filter(|(_, &y)| y > FIT_FLOOR)
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: pts.len(),
            needed: MIN_FIT_SAMPLES,
        });
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientSamples {
            found: 1,
            needed: MIN_FIT_SAMPLES,
        });
    }
    Ok(-sxy / sxx)
}

/// Fitted decay rate (1/ns) of `|ρ̃_{αδ}(t)|` over a window.
pub fn fit_decay(traj: &Trajectory, pair: (usize, usize), window: FitWindow) -> Result<f64> {
    let (a, d) = pair;
    if a >= traj.dim || d >= traj.dim {
        return Err(Error::Dimension {
            expected: traj.dim,
            found: a.max(d) + 1,
        });
    }
    let mags: Vec<f64> = traj.coherence_series(a, d).iter().map(|z| z.norm()).collect();
    let (lo, hi) = match window {
        FitWindow::Range(t0, t1) => {
            let lo = traj.times.iter().position(|&t| t >= t0).unwrap_or(traj.len());
            let hi = traj.times.iter().rposition(|&t| t <= t1).map_or(0, |i| i + 1);
            (lo, hi.max(lo))
        }
        FitWindow::Initial => {
            let start = mags.iter().position(|&m| m > FIT_FLOOR).unwrap_or(mags.len());
            let stop_at = mags.get(start).copied().unwrap_or(0.0) * (-3.0f64).exp();
            let end = mags[start..]
                .iter()
                .position(|&m| m < stop_at)
                .map_or(mags.len(), |i| start + i + 1);
            (start, end)
        }
        FitWindow::Late => {
            let (peak_i, peak) = mags
                .iter()
                .copied()
                .enumerate()
                .fold((0, 0.0), |best, (i, m)| if m > best.1 { (i, m) } else { best });
            let start = mags[peak_i..]
                .iter()
                .position(|&m| m < peak * (-3.0f64).exp())
                .map_or(mags.len(), |i| peak_i + i);
            (start, mags.len())
        }
    };
    fit_exponential(&traj.times[lo..hi], &mags[lo..hi])
}

/// Concurrence of a computational-basis matrix without state validation.
pub fn concurrence_of(m: &CMatrix) -> Result<f64> {
    if m.nrows() != 4 || m.ncols() != 4 {
        return Err(Error::Dimension {
            expected: 4,
            found: m.nrows(),
        });
    }
    Ok(concurrence_matrix(&M4::from_fn(|a, b| m[(a, b)])))
}
