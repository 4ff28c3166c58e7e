use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported chain length {0} (supported: 2..=4)")]
    UnsupportedSites(usize),

    #[error("invalid chain parameter: {0}")]
    InvalidChain(String),

    #[error("site index {index} out of range 1..={n_sites}")]
    SiteOutOfRange { index: usize, n_sites: usize },

    #[error("eigenbasis alignment failed for reference state ψ_{label}: residual {residual:.3e}")]
    Alignment { label: usize, residual: f64 },

    #[error("invalid bath parameter: {0}")]
    InvalidBath(String),

    #[error(
        "intermediate coupling regime: ω·τ_jk = {omega_tau:.4} for sites ({j}, {k}) at ω = {omega:.6} rad/ns; \
         retune J and B close to or far from a level crossing"
    )]
    IntermediateRegime {
        omega_tau: f64,
        omega: f64,
        j: usize,
        k: usize,
    },

    #[error("quadrature did not converge: achieved error estimate {achieved:.3e} (target {target:.3e})")]
    Quadrature { achieved: f64, target: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("basis mismatch: expected {expected} basis")]
    BasisMismatch { expected: &'static str },

    #[error("stationary state is not unique: null space of dimension {dim}; supply an initial state")]
    DegenerateNullSpace { dim: usize },

    #[error("time step too large: dt·‖L‖ = {ratio:.3e} exceeds 0.1; use dt ≤ {suggested:.6e} ns")]
    Stability { ratio: f64, suggested: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("insufficient samples for fit: {found} usable (need {needed})")]
    InsufficientSamples { found: usize, needed: usize },

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("unknown preset `{0}` (expected fig1..fig8)")]
    UnknownPreset(String),

    #[error("axis `{0}` is not sweepable")]
    NotSweepable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// True for failures that mean the physical model does not apply to the
    /// requested scenario, as opposed to usage or IO errors.
    pub fn is_physics_validity(&self) -> bool {
        matches!(
            self,
            Error::IntermediateRegime { .. } | Error::Alignment { .. } | Error::Quadrature { .. }
        )
    }
}
