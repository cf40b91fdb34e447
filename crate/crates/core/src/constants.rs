//! Physical constants in the unit system used throughout the crate:
//! energies in eV, times in fs, lengths in μm.

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.6582119569;

/// Speed of light in vacuum in μm/fs.
pub const SPEED_OF_LIGHT_UM_PER_FS: f64 = 0.299792458;

/// Bundle of the constants for callers that prefer passing a value around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
}

impl PhysicalConstants {
    pub const SI_DERIVED: PhysicalConstants = PhysicalConstants {
        hbar: HBAR_EV_FS,
        c: SPEED_OF_LIGHT_UM_PER_FS,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI_DERIVED
    }
}

/// Converts an energy in eV to an angular rate in rad/fs.
#[inline]
pub fn ev_to_rate(energy_ev: f64) -> f64 {
    energy_ev / HBAR_EV_FS
}

/// Converts an angular rate in rad/fs to an energy in eV.
#[inline]
pub fn rate_to_ev(rate: f64) -> f64 {
    rate * HBAR_EV_FS
}
