//! Transition rates, secular resonance classes and the interaction-picture
//! generator for the density-matrix elements `ρ̃_{αδ}`.
//!
//! Rates follow `Γ_jk^{αβ} = (π/2) g_jk(ω_{αβ}) (1 + coth(ħω_{αβ}/2k_BT))` with
//! `ω_{αβ} = E_β − E_α`, which is the rate of the `β → α` transition. For
//! `ω > 0` this is `π g(ω)(N_ω + 1)` and for `ω < 0` it is `π g(|ω|) N_{|ω|}`.

mod generator;

use crate::bath::{self, BathSpec, CouplingMode, CouplingRegime, RegimeCuts};
use crate::spin_chain::{default_freq_tol, EigenSystem};
use crate::{Error, Result};

pub use generator::{
    build_generator, decoherence_rate, dissipator, rate_network, relaxation_rates,
    stationary_state, Generator,
};

/// Default resonance tolerance of the secular filter (rad/ns).
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-6;

/// Matrix elements of `X_j` below this are treated as forbidden transitions.
const ELEMENT_TOL: f64 = 1e-12;

/// Coupling regime resolved for one site pair at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeTag {
    pub j: usize,
    pub k: usize,
    /// `|ω|` in rad/ns.
    pub omega: f64,
    pub regime: CouplingRegime,
}

/// `Γ_jk^{αβ}` for every site pair (1-based) and eigenstate pair (0-based).
#[derive(Debug, Clone)]
pub struct RateTable {
    pub n_sites: usize,
    pub dim: usize,
    pub mode: CouplingMode,
    pub temperature_ghz: f64,
    gamma: Vec<f64>,
    pub regimes: Vec<RegimeTag>,
}

impl RateTable {
    fn index(&self, j: usize, k: usize, alpha: usize, beta: usize) -> usize {
        (((j - 1) * self.n_sites + (k - 1)) * self.dim + alpha) * self.dim + beta
    }

    /// Rate of `β → α` weighted by sites `j`, `k`.
    pub fn get(&self, j: usize, k: usize, alpha: usize, beta: usize) -> f64 {
        self.gamma[self.index(j, k, alpha, beta)]
    }

    /// All-zero table, e.g. for a decoupled bath.
    pub fn zeros(n_sites: usize, dim: usize) -> Self {
        RateTable {
            n_sites,
            dim,
            mode: CouplingMode::Independent,
            temperature_ghz: f64::INFINITY,
            gamma: vec![0.0; n_sites * n_sites * dim * dim],
            regimes: Vec::new(),
        }
    }

    /// Largest rate in the table.
    pub fn max_rate(&self) -> f64 {
        self.gamma.iter().copied().fold(0.0, f64::max)
    }
}

/// Rates with the default regime cuts.
pub fn transition_rates(es: &EigenSystem, bath: &BathSpec, mode: CouplingMode) -> Result<RateTable> {
    transition_rates_with(es, bath, mode, RegimeCuts::default())
}

pub fn transition_rates_with(
    es: &EigenSystem,
    bath: &BathSpec,
    mode: CouplingMode,
    cuts: RegimeCuts,
) -> Result<RateTable> {
    bath.validate()?;
    let n = es.spec.n_sites;
    let dim = es.dim();
    let ops = es.interaction_operators()?;
    let zero_tol = default_freq_tol(es);

    let mut table = RateTable {
        n_sites: n,
        dim,
        mode,
        temperature_ghz: bath.temperature_ghz,
        gamma: vec![0.0; n * n * dim * dim],
        regimes: Vec::new(),
    };

    for a in 0..dim {
        for b in 0..dim {
            if a == b || ops.iter().all(|x| x.get(a, b).norm() <= ELEMENT_TOL) {
                continue;
            }
            let omega = es.omega(a, b);
            let w = if omega.abs() <= zero_tol { 0.0 } else { omega.abs() };
            let weight = if w == 0.0 {
                0.0
            } else {
                let g = bath::effective_spectral_density(bath, w)?.value;
                let occ = bath::thermal_occupation(bath.temperature_ghz, w)?.occupation;
                if omega > 0.0 {
                    std::f64::consts::PI * g * (occ + 1.0)
                } else {
                    std::f64::consts::PI * g * occ
                }
            };
            for j in 1..=n {
                for k in 1..=n {
                    let regime = bath::classify_regime(bath, w, j, k, mode, cuts)?;
                    record_regime(&mut table.regimes, j, k, w, regime);
                    let rate = match regime {
                        CouplingRegime::SelfTerm | CouplingRegime::Collective => weight,
                        CouplingRegime::Independent => 0.0,
                    };
                    let idx = table.index(j, k, a, b);
                    table.gamma[idx] = rate;
                }
            }
        }
    }
    table
        .regimes
        .sort_by(|x, y| (x.j, x.k).cmp(&(y.j, y.k)).then(x.omega.total_cmp(&y.omega)));
    Ok(table)
}

fn record_regime(tags: &mut Vec<RegimeTag>, j: usize, k: usize, omega: f64, regime: CouplingRegime) {
    let seen = tags
        .iter()
        .any(|t| t.j == j && t.k == k && (t.omega - omega).abs() <= 1e-9 * omega.max(1.0));
    if !seen {
        tags.push(RegimeTag { j, k, omega, regime });
    }
}

/// Ordered pairs `(α, δ)` grouped by the Bohr frequency `E_α − E_δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceClasses {
    pub freq_tol: f64,
    pub dim: usize,
    /// Representative frequency of each class (rad/ns), ascending.
    pub omegas: Vec<f64>,
    class_of: Vec<usize>,
}

impl ResonanceClasses {
    /// Class index of the ordered pair `(α, δ)`.
    pub fn class(&self, alpha: usize, delta: usize) -> usize {
        self.class_of[alpha * self.dim + delta]
    }

    /// Whether `ρ̃_{βγ}` may feed `ρ̃_{αδ}` under the secular approximation.
    pub fn resonant(&self, (alpha, delta): (usize, usize), (beta, gamma): (usize, usize)) -> bool {
        self.class(alpha, delta) == self.class(beta, gamma)
    }

    /// Class holding the populations.
    pub fn zero_class(&self) -> usize {
        self.class(0, 0)
    }

    pub fn members(&self, class: usize) -> Vec<(usize, usize)> {
        (0..self.dim * self.dim)
            .filter(|&i| self.class_of[i] == class)
            .map(|i| (i / self.dim, i % self.dim))
            .collect()
    }

    /// Vectorized indices `α·dim + δ` of a class.
    pub fn indices(&self, class: usize) -> Vec<usize> {
        (0..self.dim * self.dim)
            .filter(|&i| self.class_of[i] == class)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// Group every ordered pair by `E_α − E_δ`; pairs closer than `freq_tol`
/// share a class.
pub fn secular_filter(es: &EigenSystem, freq_tol: f64) -> Result<ResonanceClasses> {
    if !(freq_tol > 0.0) {
        return Err(Error::InvalidChain(format!(
            "resonance tolerance must be > 0, got {freq_tol}"
        )));
    }
    let dim = es.dim();
    let mut pairs: Vec<(f64, usize)> = (0..dim * dim)
        .map(|i| (es.energies[i / dim] - es.energies[i % dim], i))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut class_of = vec![0usize; dim * dim];
    let mut omegas: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (w, i) in pairs {
        if omegas.is_empty() || w - last >= freq_tol {
            omegas.push(w);
        }
        last = w;
        class_of[i] = omegas.len() - 1;
    }
    // Snap the class containing the populations to exactly zero.
    let zc = class_of[0];
    omegas[zc] = 0.0;
    Ok(ResonanceClasses {
        freq_tol,
        dim,
        omegas,
        class_of,
    })
}
