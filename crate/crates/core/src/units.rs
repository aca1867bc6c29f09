//! Physical constants in the eV / fs / μm unit system.

/// Reduced Planck constant in eV·fs.
pub const HBAR: f64 = 0.658_211_956_9;

/// Speed of light in μm/fs.
pub const C_LIGHT: f64 = 0.299_792_458;

/// ħc in eV·μm.
pub const HBAR_C: f64 = HBAR * C_LIGHT;

/// Converts an energy in eV to an angular frequency in rad/fs.
#[inline]
pub fn to_rate(energy_ev: f64) -> f64 {
    energy_ev / HBAR
}
