//! Physical constants (CODATA 2018, SI units).
//!
//! All internal quantities use rad/s for frequencies, meters for lengths,
//! joules for energies and kelvin for temperatures.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Elementary charge, C.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const EPS_0: f64 = 8.854_187_812_8e-12;
/// Electron rest mass, kg.
pub const M_E: f64 = 9.109_383_701_5e-31;
/// Standard gravitational acceleration, m/s².
pub const G_STANDARD: f64 = 9.806_65;

/// Apéry's constant ζ(3).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

/// Conversion factor from eV to rad/s (e/ħ).
pub const EV_TO_RAD_S: f64 = E_CHARGE / HBAR;

/// Spacing of the Matsubara frequencies at temperature `t`, 2πk_BT/ħ.
pub fn matsubara_spacing(t: f64) -> f64 {
    2.0 * std::f64::consts::PI * K_B * t / HBAR
}

/// Temperature whose first Matsubara frequency equals `xi`, ħξ/(2πk_B).
pub fn matsubara_temperature(xi: f64) -> f64 {
    HBAR * xi / (2.0 * std::f64::consts::PI * K_B)
}
