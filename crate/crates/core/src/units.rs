//! Physical constants and unit conversions.
//!
//! Internally `ħ = 1`, energies are angular frequencies in rad/ns, times are
//! in ns. Bath geometry stays in SI and is converted at the boundary.

use std::f64::consts::PI;

/// Electron mass (kg).
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Convert a frequency `E/h` in GHz to an angular frequency in rad/ns.
pub fn ghz_to_rad_per_ns(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz
}

/// Convert an angular frequency in rad/ns back to `E/h` in GHz.
pub fn rad_per_ns_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Seconds to nanoseconds.
pub fn s_to_ns(t: f64) -> f64 {
    t * 1e9
}
