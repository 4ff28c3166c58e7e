//! Transverse phonon bath seen by a chain of current rings.
//!
//! The coupling constant `λ²` scales as `1/V` and the spectral density
//! `J_jk(ω)` as `V`, so everything here works with the volume-free effective
//! rate density
//!
//! ```text
//! g(ω) = (λ²/ħ²) J_jj(ω) = m_e² I² R⁴ ω⁵ / (6 ħ e² ρ c⊥⁵) · ₁F₂(3/2; 5/2, 3; −(ωτ_R)²)
//! ```
//!
//! with `τ_R = R/c⊥`. Frequencies are in rad/ns and `g` is returned in 1/ns.

pub mod quadrature;
pub mod special;

use std::f64::consts::PI;

use crate::par::{self, Execution};
use crate::units::{ghz_to_rad_per_ns, s_to_ns, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR};
use crate::{Error, Result};

/// Form-factor arguments above this use the angular quadrature.
pub const SERIES_SAFE_RADIUS: f64 = 30.0;
/// Below this the direct hypergeometric series is used.
pub const DIRECT_SERIES_RADIUS: f64 = 4.0;

/// Material, geometry and temperature of the bath. SI units except the
/// temperature, which is `k_B T / h` in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    /// kg/m³
    pub mass_density: f64,
    /// Transverse sound speed c⊥ (m/s).
    pub sound_speed: f64,
    /// `k_B T / h` (GHz).
    pub temperature_ghz: f64,
    /// Ring radius R (m).
    pub ring_radius: f64,
    /// Circulating current I (A).
    pub current: f64,
    /// Centre-to-centre spacing d (m).
    pub spacing: f64,
    pub electron_mass: f64,
    pub charge: f64,
    /// Debye-like cutoff Λ (rad/ns). Only used for the Markov diagnostics.
    pub cutoff: Option<f64>,
    /// Longitudinal sound speed. Accepted but unused: the ring couples only
    /// to the in-plane transverse polarization.
    pub longitudinal_speed: Option<f64>,
}

impl BathSpec {
    /// Bath with the physical electron constants.
    pub fn new(
        mass_density: f64,
        sound_speed: f64,
        temperature_ghz: f64,
        ring_radius: f64,
        current: f64,
        spacing: f64,
    ) -> Result<Self> {
        let b = BathSpec {
            mass_density,
            sound_speed,
            temperature_ghz,
            ring_radius,
            current,
            spacing,
            electron_mass: ELECTRON_MASS,
            charge: ELEMENTARY_CHARGE,
            cutoff: None,
            longitudinal_speed: None,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass_density", self.mass_density),
            ("sound_speed", self.sound_speed),
            ("temperature", self.temperature_ghz),
            ("ring_radius", self.ring_radius),
            ("spacing", self.spacing),
            ("electron_mass", self.electron_mass),
            ("charge", self.charge),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidBath(format!("{name} must be > 0, got {v}")));
            }
        }
        // I = 0 is a decoupled bath
        if !(self.current >= 0.0) || !self.current.is_finite() {
            return Err(Error::InvalidBath(format!("current must be >= 0, got {}", self.current)));
        }
        if let Some(l) = self.cutoff {
            if !(l > 0.0) {
                return Err(Error::InvalidBath(format!("cutoff must be > 0, got {l}")));
            }
        }
        Ok(())
    }

    /// `τ_R = R/c⊥` in ns.
    pub fn tau_r(&self) -> f64 {
        s_to_ns(self.ring_radius / self.sound_speed)
    }

    /// Phonon transit time between 1-based sites `j` and `k` in ns.
    pub fn tau_jk(&self, j: usize, k: usize) -> f64 {
        s_to_ns(self.spacing * j.abs_diff(k) as f64 / self.sound_speed)
    }

    /// `k_B T/ħ` in rad/ns.
    pub fn thermal_frequency(&self) -> f64 {
        ghz_to_rad_per_ns(self.temperature_ghz)
    }

    /// Prefactor `K` with `g(ω) = K ω⁵ F(ωτ_R)` for ω in rad/ns, g in 1/ns.
    pub fn rate_prefactor(&self) -> f64 {
        let si = self.electron_mass.powi(2) * self.current.powi(2) * self.ring_radius.powi(4)
            / (6.0 * HBAR * self.charge.powi(2) * self.mass_density * self.sound_speed.powi(5));
        // ω_SI = 1e9 ω, g_ns = 1e-9 g_SI
        si * 1e36
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMethod {
    /// Direct hypergeometric series.
    Series,
    /// Bounded Neumann series of Bessel functions.
    BesselSum,
    /// Angular quadrature fallback beyond the safe radius.
    Quadrature,
    /// Closed form (limits, ω = 0, vanishing cross terms).
    ClosedForm,
}

/// Effective rate density `g(ω)` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralValue {
    pub omega: f64,
    /// 1/ns
    pub value: f64,
    pub method: SpectralMethod,
}

impl SpectralValue {
    fn closed(omega: f64, value: f64) -> Self {
        SpectralValue {
            omega,
            value,
            method: SpectralMethod::ClosedForm,
        }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega >= 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidBath(format!("frequency must be >= 0, got {omega}")))
    }
}

/// Ring form factor `₁F₂(3/2; 5/2, 3; −x²)` and the route used to get it.
pub fn ring_form_factor(x: f64) -> Result<(f64, SpectralMethod)> {
    if x <= DIRECT_SERIES_RADIUS {
        Ok((special::ring_form_factor_series(x), SpectralMethod::Series))
    } else if x <= SERIES_SAFE_RADIUS {
        Ok((special::ring_form_factor_bessel_sum(x), SpectralMethod::BesselSum))
    } else {
        let theta = theta_oracle(x, 0.0)?;
        Ok((3.0 * theta / (2.0 * PI * x * x), SpectralMethod::Quadrature))
    }
}

/// Self-term effective rate density `g(ω) = (λ²/ħ²) J_jj(ω)`.
pub fn effective_spectral_density(bath: &BathSpec, omega: f64) -> Result<SpectralValue> {
    check_omega(omega)?;
    if omega == 0.0 {
        return Ok(SpectralValue::closed(0.0, 0.0));
    }
    let (f, method) = ring_form_factor(omega * bath.tau_r())?;
    Ok(SpectralValue {
        omega,
        value: bath.rate_prefactor() * omega.powi(5) * f,
        method,
    })
}

/// Small-ring limit `ωτ_R ≪ 1`:
/// `(2 m_e² / 3π² ħ e²) · I² (πR²)² / (4 ρ c⊥⁵) · ω⁵`.
pub fn small_ring_density(bath: &BathSpec, omega: f64) -> Result<SpectralValue> {
    check_omega(omega)?;
    let w = omega * 1e9;
    let area = PI * bath.ring_radius.powi(2);
    let si = 2.0 * bath.electron_mass.powi(2) / (3.0 * PI * PI * HBAR * bath.charge.powi(2))
        * bath.current.powi(2)
        * area
        * area
        / (4.0 * bath.mass_density * bath.sound_speed.powi(5))
        * w.powi(5);
    Ok(SpectralValue::closed(omega, si * 1e-9))
}

/// Large-ring limit `ωτ_R ≫ 1`:
/// `(2 m_e² / ħ e²) · I² R / (4 ρ c⊥²) · ω²`.
pub fn large_ring_density(bath: &BathSpec, omega: f64) -> Result<SpectralValue> {
    check_omega(omega)?;
    let w = omega * 1e9;
    let si = 2.0 * bath.electron_mass.powi(2) / (HBAR * bath.charge.powi(2)) * bath.current.powi(2)
        * bath.ring_radius
        / (4.0 * bath.mass_density * bath.sound_speed.powi(2))
        * w.powi(2);
    Ok(SpectralValue::closed(omega, si * 1e-9))
}

/// Angular integral
/// `Θ(ωτ_R, ωτ_jk) = ∫₀^π dθ sinθ J₁²(ωτ_R sinθ) · 2π J₀(ωτ_jk sinθ)`
/// by adaptive Gauss–Kronrod quadrature, absolute tolerance 1e-10 (tightened
/// relative to the value for small arguments).
pub fn theta_oracle(omega_tau_r: f64, omega_tau_jk: f64) -> Result<f64> {
    theta_oracle_with(omega_tau_r, omega_tau_jk, quadrature::Tolerance::default())
}

pub fn theta_oracle_with(
    omega_tau_r: f64,
    omega_tau_jk: f64,
    tol: quadrature::Tolerance,
) -> Result<f64> {
    if !(omega_tau_r >= 0.0) || !(omega_tau_jk >= 0.0) {
        return Err(Error::InvalidBath(format!(
            "angular integral arguments must be >= 0, got ({omega_tau_r}, {omega_tau_jk})"
        )));
    }
    if omega_tau_r == 0.0 {
        return Ok(0.0);
    }
    // Integrand is symmetric about θ = π/2.
    let integrand = |theta: f64| {
        let s = theta.sin();
        let j1 = special::bessel_j1(omega_tau_r * s);
        s * j1 * j1 * 2.0 * PI * special::bessel_j0(omega_tau_jk * s)
    };
    let half = quadrature::integrate(
        integrand,
        0.0,
        PI / 2.0,
        quadrature::Tolerance {
            abs: tol.abs / 2.0,
            ..tol
        },
    )?;
    Ok(2.0 * half.value)
}

/// Oracle route for the self-term density: `K ω⁵ · 3Θ(ωτ_R, 0) / (2π (ωτ_R)²)`.
pub fn oracle_spectral_density(bath: &BathSpec, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    if omega == 0.0 {
        return Ok(0.0);
    }
    let x = omega * bath.tau_r();
    let theta = theta_oracle(x, 0.0)?;
    Ok(bath.rate_prefactor() * omega.powi(5) * 3.0 * theta / (2.0 * PI * x * x))
}

/// How a pair of sites shares the bath at a given frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingRegime {
    /// `j = k`.
    SelfTerm,
    /// `ωτ_jk ≪ 1`: cross term equals the self term.
    Collective,
    /// `ωτ_jk ≫ 1`: cross term vanishes.
    Independent,
}

/// How cross terms are resolved when building rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingMode {
    /// Decide per frequency from `ωτ_jk`.
    #[default]
    Auto,
    Independent,
    Collective,
}

impl CouplingMode {
    pub fn name(self) -> &'static str {
        match self {
            CouplingMode::Auto => "auto",
            CouplingMode::Independent => "independent",
            CouplingMode::Collective => "collective",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(CouplingMode::Auto),
            "independent" => Some(CouplingMode::Independent),
            "collective" => Some(CouplingMode::Collective),
            _ => None,
        }
    }
}

/// `ωτ_jk` thresholds separating collective and independent coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCuts {
    pub collective: f64,
    pub independent: f64,
}

impl Default for RegimeCuts {
    fn default() -> Self {
        RegimeCuts {
            collective: 0.5,
            independent: 10.0,
        }
    }
}

/// Classify the pair `(j, k)` (1-based) at frequency `omega ≥ 0`.
pub fn classify_regime(
    bath: &BathSpec,
    omega: f64,
    j: usize,
    k: usize,
    mode: CouplingMode,
    cuts: RegimeCuts,
) -> Result<CouplingRegime> {
    if j == k {
        return Ok(CouplingRegime::SelfTerm);
    }
    match mode {
        CouplingMode::Independent => Ok(CouplingRegime::Independent),
        CouplingMode::Collective => Ok(CouplingRegime::Collective),
        CouplingMode::Auto => {
            let wt = omega.abs() * bath.tau_jk(j, k);
            if wt < cuts.collective {
                Ok(CouplingRegime::Collective)
            } else if wt > cuts.independent {
                Ok(CouplingRegime::Independent)
            } else {
                Err(Error::IntermediateRegime {
                    omega_tau: wt,
                    omega,
                    j,
                    k,
                })
            }
        }
    }
}

/// Cross spectral density `g_jk(ω)` with the regime rule: the self term for
/// `j = k` or `ωτ_jk` below the collective cut, zero above the independent
/// cut, and an error in between.
pub fn cross_spectral_density(
    bath: &BathSpec,
    omega: f64,
    j: usize,
    k: usize,
) -> Result<SpectralValue> {
    pair_spectral_density(bath, omega, j, k, CouplingMode::Auto, RegimeCuts::default())
        .map(|(v, _)| v)
}

pub fn pair_spectral_density(
    bath: &BathSpec,
    omega: f64,
    j: usize,
    k: usize,
    mode: CouplingMode,
    cuts: RegimeCuts,
) -> Result<(SpectralValue, CouplingRegime)> {
    check_omega(omega)?;
    let regime = classify_regime(bath, omega, j, k, mode, cuts)?;
    let value = match regime {
        CouplingRegime::SelfTerm | CouplingRegime::Collective => {
            effective_spectral_density(bath, omega)?
        }
        CouplingRegime::Independent => SpectralValue::closed(omega, 0.0),
    };
    Ok((value, regime))
}

/// Evaluate the self-term density on a grid of frequencies.
pub fn spectral_density_grid(
    bath: &BathSpec,
    omegas: &[f64],
    exec: Execution,
) -> Result<Vec<SpectralValue>> {
    par::map(exec, omegas, |&w| effective_spectral_density(bath, w))
        .into_iter()
        .collect()
}

/// Thermal functions of the bath at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thermal {
    /// `N_ω = 1/(e^{ħω/k_BT} − 1)`
    pub occupation: f64,
    /// `coth(ħω/2k_BT) = 2N_ω + 1`
    pub coth: f64,
    /// `ω·coth(ħω/2k_BT)`, finite (`2k_BT/ħ`) at ω = 0.
    pub omega_coth: f64,
}

/// Bose occupation and related thermal factors at `omega ≥ 0` (rad/ns) for
/// temperature `k_BT/h` in GHz.
pub fn thermal_occupation(temperature_ghz: f64, omega: f64) -> Result<Thermal> {
    if !(temperature_ghz > 0.0) {
        return Err(Error::InvalidBath(format!(
            "temperature must be > 0, got {temperature_ghz}"
        )));
    }
    check_omega(omega)?;
    let kt = ghz_to_rad_per_ns(temperature_ghz);
    if omega == 0.0 {
        return Ok(Thermal {
            occupation: f64::INFINITY,
            coth: f64::INFINITY,
            omega_coth: 2.0 * kt,
        });
    }
    let x = omega / kt;
    let occupation = 1.0 / x.exp_m1();
    let coth = 1.0 / (0.5 * x).tanh();
    Ok(Thermal {
        occupation,
        coth,
        omega_coth: omega * coth,
    })
}

/// Markov diffusion constant `D^ω_jk = (π/2) g_jk(ω) coth(ħω/2k_BT)`.
/// Vanishes at ω = 0 because `g ∝ ω⁵`.
pub fn diffusion_coefficient(
    bath: &BathSpec,
    omega: f64,
    j: usize,
    k: usize,
    mode: CouplingMode,
    cuts: RegimeCuts,
) -> Result<f64> {
    let (g, _) = pair_spectral_density(bath, omega, j, k, mode, cuts)?;
    if omega == 0.0 {
        return Ok(0.0);
    }
    let th = thermal_occupation(bath.temperature_ghz, omega)?;
    Ok(0.5 * PI * g.value * th.coth)
}

/// Markov damping constant `γ^ω_jk = (π/2) g_jk(ω)`.
pub fn damping_coefficient(
    bath: &BathSpec,
    omega: f64,
    j: usize,
    k: usize,
    mode: CouplingMode,
    cuts: RegimeCuts,
) -> Result<f64> {
    let (g, _) = pair_spectral_density(bath, omega, j, k, mode, cuts)?;
    Ok(0.5 * PI * g.value)
}

/// Renormalization `r` and anomalous diffusion `A` coefficients.
///
/// Their Markov limits are principal-value integrals of `J_jk` against the
/// cutoff `e^{−ω'/Λ}` that only shift the chain Hamiltonian. The chain is
/// taken to be engineered with a counter term that cancels them, so both are
/// identically zero here.
pub fn counterterm_coefficients(_bath: &BathSpec, _omega: f64) -> (f64, f64) {
    (0.0, 0.0)
}

/// Time scales that the Markov limit must be long compared to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovDiagnostics {
    pub tau_r_ns: f64,
    pub max_tau_jk_ns: f64,
    pub cutoff_time_ns: Option<f64>,
    /// `ħ/k_BT` in ns.
    pub thermal_time_ns: f64,
    /// Shortest dynamical time of the reduced system (ns).
    pub dynamics_time_ns: f64,
    /// `dynamics_time / max(bath times)`.
    pub separation: f64,
}

impl MarkovDiagnostics {
    /// Rough validity: the reduced dynamics is at least 100× slower than
    /// every bath memory time.
    pub fn is_valid(&self) -> bool {
        self.separation > 100.0
    }
}

pub fn markov_diagnostics(bath: &BathSpec, n_sites: usize, fastest_rate: f64) -> MarkovDiagnostics {
    let tau_r_ns = bath.tau_r();
    let max_tau_jk_ns = bath.tau_jk(1, n_sites);
    let cutoff_time_ns = bath.cutoff.map(|l| 1.0 / l);
    let thermal_time_ns = 1.0 / bath.thermal_frequency();
    let dynamics_time_ns = if fastest_rate > 0.0 {
        1.0 / fastest_rate
    } else {
        f64::INFINITY
    };
    let slowest_bath = [tau_r_ns, max_tau_jk_ns, thermal_time_ns, cutoff_time_ns.unwrap_or(0.0)]
        .into_iter()
        .fold(0.0, f64::max);
    MarkovDiagnostics {
        tau_r_ns,
        max_tau_jk_ns,
        cutoff_time_ns,
        thermal_time_ns,
        dynamics_time_ns,
        separation: dynamics_time_ns / slowest_bath,
    }
}
