//! Physical constants and unit helpers.

/// Boltzmann constant over Planck constant, GHz per kelvin.
pub const KB_GHZ_PER_K: f64 = 20.836_619;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Hz per GHz.
pub const HZ_PER_GHZ: f64 = 1e9;

/// One microelectronvolt expressed as a frequency, GHz.
pub const GHZ_PER_MICRO_EV: f64 = 0.241_798_924_2;

/// Thermal energy `k_B T / h` in GHz.
pub fn thermal_ghz(temperature: f64) -> f64 {
    KB_GHZ_PER_K * temperature
}

/// Converts a frequency in GHz to an energy in joules.
pub fn ghz_to_joule(f: f64) -> f64 {
    f * HZ_PER_GHZ * PLANCK
}

/// Converts microelectronvolts to GHz.
pub fn micro_ev_to_ghz(e: f64) -> f64 {
    e * GHZ_PER_MICRO_EV
}
