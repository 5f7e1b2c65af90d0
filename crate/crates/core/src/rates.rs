//! Quasiparticle tunneling rates across the SQUID junctions.
//!
//! Number-conserving rates (a quasiparticle crosses the junction, possibly
//! exchanging the qubit energy) are given per unit normalized density and
//! are thermal averages over quasi-equilibrium distributions. Photon-assisted
//! rates describe pair breaking at the junction by a monochromatic photon
//! mode and do not depend on the density.

use crate::field::InterferenceWeights;
use crate::specfun::{bessel_k01_scaled, photon_kernel, KernelSign, PhotonKernelArgs};
use crate::units::{thermal_ghz, HZ_PER_GHZ};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Superconducting gaps of the two junction electrodes, GHz. The bottom
/// electrode is the thinner film with the larger gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapParams {
    pub delta_b: f64,
    pub delta_t: f64,
}

impl GapParams {
    pub fn new(delta_b: f64, delta_t: f64) -> Result<Self> {
        let g = Self { delta_b, delta_t };
        g.validate()?;
        Ok(g)
    }

    /// Gaps from the smaller gap and the gap difference.
    pub fn from_difference(delta_t: f64, difference: f64) -> Result<Self> {
        Self::new(delta_t + difference, delta_t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_t > 0.0 && self.delta_b > self.delta_t && self.delta_b.is_finite()) {
            return Err(Error::domain(
                "gaps",
                format!(
                    "need delta_b > delta_t > 0, got {} and {}",
                    self.delta_b, self.delta_t
                ),
            ));
        }
        Ok(())
    }

    /// `delta_t / delta_b`.
    pub fn ratio(&self) -> f64 {
        self.delta_t / self.delta_b
    }

    /// Gap difference frequency `delta_b - delta_t`.
    pub fn difference(&self) -> f64 {
        self.delta_b - self.delta_t
    }

    /// Mean gap, used in the subleading Bessel term.
    pub fn mean(&self) -> f64 {
        0.5 * (self.delta_b + self.delta_t)
    }
}

/// Everything the rate formulas need at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEnvironment {
    pub gaps: GapParams,
    /// Quasiparticle temperature, K.
    pub temperature: f64,
    /// Pair-breaking photon frequency, GHz.
    pub f_nu: f64,
    /// Dimensionless photon rate.
    pub gamma_nu: f64,
    /// Sum of the zero-field junction energies, GHz.
    pub ej_sigma0: f64,
    /// First-harmonic loop energy at the operating point, GHz.
    pub ej: f64,
    pub f01: f64,
    pub ec: f64,
    pub weights: InterferenceWeights,
}

impl RateEnvironment {
    pub fn validate(&self) -> Result<()> {
        self.gaps.validate()?;
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::domain(
                "rate environment",
                format!("temperature {} must be > 0", self.temperature),
            ));
        }
        if !(self.f_nu > 0.0) {
            return Err(Error::domain(
                "rate environment",
                "photon frequency must be > 0",
            ));
        }
        if !(self.gamma_nu >= 0.0) {
            return Err(Error::domain(
                "rate environment",
                "photon rate must be >= 0",
            ));
        }
        if !(self.ej > 0.0 && self.ec > 0.0 && self.ej_sigma0 > 0.0) {
            return Err(Error::domain("rate environment", "energies must be > 0"));
        }
        if !(self.f01 > 0.0) {
            return Err(Error::domain(
                "rate environment",
                "qubit frequency must be > 0",
            ));
        }
        Ok(())
    }

    /// Charge matrix element of the qubit transition, `sqrt(E_C / 8 E_J)`.
    pub fn matrix_element(&self) -> f64 {
        (self.ec / (8.0 * self.ej)).sqrt()
    }

    pub fn with_temperature(&self, temperature: f64) -> Self {
        Self {
            temperature,
            ..*self
        }
    }
}

/// Number-conserving rates per unit normalized density, Hz. The suffix names
/// the electrode the quasiparticle starts in; `g10` relaxes the qubit, `g01`
/// excites it and `g00` leaves it unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NupsRates {
    pub g00_t: f64,
    pub g10_t: f64,
    pub g01_t: f64,
    pub g00_b: f64,
    pub g10_b: f64,
    pub g01_b: f64,
}

/// Photon-assisted pair-breaking rates, Hz. The rate from the excited state
/// without a qubit transition equals `g00_ph`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PapsRates {
    pub g00_ph: f64,
    pub g01_ph: f64,
    pub g10_ph: f64,
}

/// `exp(-u) K_n(|u|)` for both orders, times `exp(shift)`, from the scaled
/// Bessel functions so that no intermediate overflows.
fn damped_bessel(u: f64, shift: f64) -> Result<(f64, f64)> {
    let x = u.abs();
    if x == 0.0 {
        return Err(Error::domain(
            "rates",
            "qubit frequency resonant with the gap difference",
        ));
    }
    let (k0, k1) = bessel_k01_scaled(x)?;
    let e = (shift - u - x).exp();
    Ok((k0 * e, k1 * e))
}

struct Kernel<'a> {
    env: &'a RateEnvironment,
    kt: f64,
    thermal: f64,
}

impl Kernel<'_> {
    /// Rate for a quasiparticle leaving the top electrode while the qubit
    /// releases `f`, with the electrode energy offset `fdd`.
    fn flip(&self, fdd: f64, f: f64, shift: f64) -> Result<f64> {
        let w = self.env.weights;
        let d = fdd - f;
        let (k0, k1) = damped_bessel(d / (2.0 * self.kt), shift)?;
        let sub = d.abs() / (2.0 * self.env.gaps.mean());
        Ok(self.thermal
            * self.env.matrix_element()
            * (w.gamma_plus * k0 + (w.gamma_minus + 0.5 * w.gamma_plus) * sub * k1))
    }

    fn keep(&self, fdd: f64, shift: f64) -> Result<f64> {
        let w = self.env.weights;
        let (k0, k1) = damped_bessel(fdd / (2.0 * self.kt), shift)?;
        let sub = fdd.abs() / (2.0 * self.env.gaps.mean());
        Ok(self.thermal * (w.gamma_minus * k0 + (w.gamma_plus + 0.5 * w.gamma_minus) * sub * k1))
    }
}

/// The six number-conserving rates. Requires the gap difference to exceed
/// the qubit frequency.
pub fn nups_rates(env: &RateEnvironment) -> Result<NupsRates> {
    env.validate()?;
    let fdd = env.gaps.difference();
    if fdd <= env.f01 {
        return Err(Error::domain(
            "rates",
            format!(
                "gap difference {fdd} GHz must exceed the qubit frequency {} GHz",
                env.f01
            ),
        ));
    }
    let kt = thermal_ghz(env.temperature);
    let thermal = 8.0 * env.ej_sigma0 * HZ_PER_GHZ * (2.0 * env.gaps.delta_t / (PI * kt)).sqrt();
    let k = Kernel { env, kt, thermal };
    let to_bottom = (env.gaps.delta_b / env.gaps.delta_t).sqrt();
    let f01 = env.f01;
    Ok(NupsRates {
        g10_t: k.flip(fdd, f01, 0.0)?,
        g01_t: k.flip(fdd, -f01, 0.0)?,
        g00_t: k.keep(fdd, 0.0)?,
        g10_b: to_bottom * k.flip(-fdd, f01, 0.0)?,
        g00_b: to_bottom * k.keep(fdd, fdd / kt)?,
        g01_b: to_bottom * k.flip(fdd, f01, -(f01 - fdd) / kt)?,
    })
}

/// Normal-state conductance prefactor of the photon-assisted rates,
/// expressed as a frequency, GHz.
pub fn tunnel_conductance_prefactor(env: &RateEnvironment) -> f64 {
    env.ej_sigma0 * (env.gaps.delta_b + env.gaps.delta_t) / (2.0 * env.gaps.delta_t)
}

fn kernel_pair(f: f64, gaps: &GapParams) -> (f64, f64) {
    if f <= 0.0 {
        return (0.0, 0.0);
    }
    let x = f / gaps.delta_b;
    let z = gaps.ratio();
    let eval =
        |sign| photon_kernel(PhotonKernelArgs::new(x, z, sign).expect("validated arguments"));
    (eval(KernelSign::Plus), eval(KernelSign::Minus))
}

/// Photon-assisted pair-breaking rates for a monochromatic photon mode.
pub fn paps_rates(env: &RateEnvironment) -> Result<PapsRates> {
    env.validate()?;
    let w = env.weights;
    let scale = env.gamma_nu * tunnel_conductance_prefactor(env) * HZ_PER_GHZ;
    let me = env.matrix_element();
    let (s0p, s0m) = kernel_pair(env.f_nu, &env.gaps);
    let (s1p, s1m) = kernel_pair(env.f_nu + env.f01, &env.gaps);
    let (s2p, s2m) = kernel_pair(env.f_nu - env.f01, &env.gaps);
    Ok(PapsRates {
        g00_ph: scale * (w.gamma_minus * s0p + w.gamma_plus * s0m),
        g10_ph: scale * me * (w.gamma_plus * s1p + w.gamma_minus * s1m),
        g01_ph: scale * me * (w.gamma_plus * s2p + w.gamma_minus * s2m),
    })
}

/// Normalized thermal quasiparticle density of an electrode with gap
/// `delta` (GHz) at `temperature` (K).
pub fn thermal_density(delta: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::domain("thermal density", "temperature must be > 0"));
    }
    let kt = thermal_ghz(temperature);
    Ok((2.0 * PI * kt / delta).sqrt() * (-delta / kt).exp())
}
