//! Figure presets `fig1` … `fig8`.

use num_complex::Complex64;

use super::config::{
    BathConfig, ChainConfig, RunConfig, ScenarioConfig, DEFAULT_N_EFOLD, DEFAULT_SPACING_OVER_R,
};
use crate::bath::CouplingMode;
use crate::dynamics::TimeGrid;
use crate::redfield::DEFAULT_RESONANCE_TOL;
use crate::spin_chain::Basis;
use crate::{Error, Result};

pub const PRESETS: [&str; 8] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

fn large(temperature_ghz: f64) -> BathConfig {
    BathConfig {
        temperature_ghz,
        radius_m: 10e-6,
        current_a: 3e-6,
        density_kg_m3: 5000.0,
        speed_m_s: 5000.0,
        spacing_over_r: DEFAULT_SPACING_OVER_R,
        cutoff_rad_ns: None,
        longitudinal_speed_m_s: None,
    }
}

fn small(temperature_ghz: f64) -> BathConfig {
    BathConfig {
        radius_m: 10e-9,
        current_a: 0.1e-6,
        ..large(temperature_ghz)
    }
}

/// Equal-weight superposition of the listed basis indices.
fn superposition(dim: usize, members: &[usize]) -> Vec<Complex64> {
    let amp = 1.0 / (members.len() as f64).sqrt();
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    for &m in members {
        v[m] = Complex64::new(amp, 0.0);
    }
    v
}

/// `|↑↑↓⟩` with `|↑⟩ = (|0⟩+|1⟩)/√2` and `|↓⟩ = (|0⟩−|1⟩)/√2`.
fn up_up_down() -> Vec<Complex64> {
    let amp = 1.0 / 8f64.sqrt();
    (0..8)
        .map(|bits| Complex64::new(if bits & 1 == 1 { -amp } else { amp }, 0.0))
        .collect()
}

fn scenario(
    label: &str,
    n_sites: usize,
    splitting_ghz: f64,
    bath: BathConfig,
    initial_state: Vec<Complex64>,
    initial_basis: Basis,
) -> ScenarioConfig {
    ScenarioConfig {
        chain: ChainConfig {
            n_sites,
            heisenberg_ghz: 1.0,
            splitting_ghz,
        },
        bath,
        run: RunConfig {
            label: Some(label.to_owned()),
            t_max_ns: None,
            dt_ns: None,
            output_stride: None,
            samples: None,
            time_grid: TimeGrid::Linear,
            n_efold: DEFAULT_N_EFOLD,
            coupling_mode: CouplingMode::Auto,
            initial_state,
            initial_basis,
            resonance_tol: DEFAULT_RESONANCE_TOL,
            track: None,
        },
    }
}

/// The crossing presets relax over rates many decades apart.
fn log_grid(mut c: ScenarioConfig) -> ScenarioConfig {
    c.run.time_grid = TimeGrid::Log;
    c
}

/// Parameters and initial state of one preset.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    use Basis::{Computational as C, Eigen as E};
    Ok(match name {
        "fig1" => scenario(name, 2, 1.5, large(0.3), superposition(4, &[3]), C),
        "fig2" => scenario(name, 3, 1.5, large(0.3), superposition(8, &[3, 6]), E),
        "fig3" => scenario(name, 2, 1.5, large(0.3), superposition(4, &[0, 3]), C),
        "fig4" => scenario(name, 2, 0.5, large(0.1), superposition(4, &[1]), C),
        "fig5" => scenario(name, 2, 1.5, small(0.3), superposition(4, &[0, 1, 2, 3]), E),
        "fig6" => log_grid(scenario(name, 2, 1.0, large(0.2), superposition(4, &[0, 1, 2, 3]), E)),
        "fig7" => scenario(name, 3, 1.5, small(0.3), superposition(8, &[4, 5]), E),
        "fig8" => log_grid(scenario(name, 3, 1.0, large(0.1), up_up_down(), C)),
        _ => return Err(Error::UnknownPreset(name.to_owned())),
    })
}

/// Preset rendered as scenario-file text.
pub fn preset_text(name: &str) -> Result<String> {
    preset(name).map(|c| super::config::emit(&c))
}
