//! Steady-state quasiparticle densities in the two junction electrodes and
//! the resulting parity-switching rate.
//!
//! Densities are normalized by the Cooper-pair density of their electrode.
//! Quasiparticles are generated by pair-breaking photons (both electrodes)
//! and thermal phonons (small-gap electrode only), removed by trapping and
//! recombination, and exchanged between the electrodes by tunneling.

use crate::rates::{GapParams, NupsRates, PapsRates, RateEnvironment};
use crate::units::{ghz_to_joule, thermal_ghz};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Trapping, recombination and material constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapRecombParams {
    /// Trapping rate in the large-gap electrode, Hz.
    pub s_b: f64,
    /// Trapping rate in the small-gap electrode, Hz.
    pub s_t: f64,
    /// Recombination rate constant, Hz.
    pub r: f64,
    /// Single-spin density of states at the Fermi level, 1/(J m^3).
    pub nu0: f64,
    /// Volume of the small-gap electrode, m^3.
    pub vol_t: f64,
}

impl TrapRecombParams {
    pub fn reference() -> Self {
        Self {
            s_b: 3.23,
            s_t: 3.23,
            r: 1.0 / 160e-9,
            nu0: 0.73e47,
            vol_t: 3400e-18,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.s_b, self.s_t, self.r, self.nu0, self.vol_t];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::domain(
                "trapping parameters",
                "all values must be positive",
            ));
        }
        Ok(())
    }

    /// Number of Cooper pairs in the small-gap electrode.
    pub fn cooper_pairs(&self, gaps: &GapParams) -> f64 {
        2.0 * self.nu0 * ghz_to_joule(gaps.delta_t) * self.vol_t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QpDensities {
    pub x_b: f64,
    pub x_t: f64,
}

/// Generation rates of normalized density, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationRates {
    pub g_b: f64,
    pub g_t: f64,
    /// Photon pair-breaking part, shared by both electrodes.
    pub g_paps: f64,
    /// Thermal-phonon part of `g_t`.
    pub g_thermal: f64,
}

/// Parity-switching rate split into its four mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParityContributions {
    /// Photon-assisted pair breaking at the junction, Hz.
    pub paps: f64,
    /// Tunneling that excites the qubit, Hz.
    pub qp01: f64,
    /// Tunneling that relaxes the qubit, Hz.
    pub qp10: f64,
    /// Tunneling without a qubit transition, Hz.
    pub qpii: f64,
    pub densities: QpDensities,
    /// Parity lifetime, s.
    pub tau_p: f64,
}

impl ParityContributions {
    /// Sum of the number-conserving contributions.
    pub fn nups(&self) -> f64 {
        self.qp01 + self.qp10 + self.qpii
    }

    pub fn total(&self) -> f64 {
        self.paps + self.nups()
    }
}

fn check_p1(p1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::domain(
            "steady state",
            format!("excited population {p1} outside [0, 1]"),
        ));
    }
    Ok(())
}

/// Total photon-assisted switching rate for excited population `p1`.
pub fn paps_total(paps: &PapsRates, p1: f64) -> f64 {
    paps.g00_ph + (1.0 - p1) * paps.g01_ph + p1 * paps.g10_ph
}

/// Generation rates from photon pair breaking and thermal phonons.
pub fn generation_rates(
    env: &RateEnvironment,
    traps: &TrapRecombParams,
    paps: &PapsRates,
    p1: f64,
) -> Result<GenerationRates> {
    check_p1(p1)?;
    traps.validate()?;
    let g_paps = paps_total(paps, p1) / traps.cooper_pairs(&env.gaps);
    let kt = thermal_ghz(env.temperature);
    let dt = env.gaps.delta_t;
    let g_thermal = if kt > 0.0 {
        2.0 * PI * traps.r * (kt / dt) * (-2.0 * dt / kt).exp()
    } else {
        0.0
    };
    Ok(GenerationRates {
        g_b: env.gaps.ratio() * g_paps,
        g_t: g_paps + g_thermal,
        g_paps,
        g_thermal,
    })
}

/// Electrode-exchange rates normalized by the Cooper-pair number, in the
/// form used by the closed-form solution.
struct Exchange {
    /// Out of the large-gap electrode.
    from_b: f64,
    /// Out of the small-gap electrode.
    from_t: f64,
}

fn exchange(nups: &NupsRates, p1: f64, n_pairs: f64) -> Exchange {
    let p0 = 1.0 - p1;
    Exchange {
        from_b: (nups.g00_b + p0 * nups.g01_b + p1 * nups.g10_b) / n_pairs,
        from_t: (nups.g00_t + p1 * nups.g10_t) / n_pairs,
    }
}

/// Trapping and generation seen by the small-gap electrode once the
/// large-gap density has been eliminated, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveRates {
    pub trapping: f64,
    pub generation: f64,
}

pub fn effective_rates(
    nups: &NupsRates,
    traps: &TrapRecombParams,
    gen: &GenerationRates,
    p1: f64,
    gaps: &GapParams,
) -> Result<EffectiveRates> {
    check_p1(p1)?;
    traps.validate()?;
    let delta = gaps.ratio();
    let ex = exchange(nups, p1, traps.cooper_pairs(gaps));
    let bottom_loss = delta * ex.from_b + traps.s_b;
    Ok(EffectiveRates {
        trapping: traps.s_t + traps.s_b * ex.from_t / bottom_loss,
        generation: gen.g_t + (gen.g_b / delta) * (1.0 - traps.s_b / bottom_loss),
    })
}

/// Closed-form steady state. Recombination in the large-gap electrode and
/// qubit excitation by small-gap quasiparticles are neglected.
pub fn steady_densities(
    nups: &NupsRates,
    traps: &TrapRecombParams,
    gen: &GenerationRates,
    p1: f64,
    gaps: &GapParams,
) -> Result<QpDensities> {
    let EffectiveRates {
        trapping: s_eff,
        generation: g_eff,
    } = effective_rates(nups, traps, gen, p1, gaps)?;
    let delta = gaps.ratio();
    let ex = exchange(nups, p1, traps.cooper_pairs(gaps));
    let r = traps.r;
    // numerically stable positive root of r x^2 + s x - g = 0
    let disc = (s_eff * s_eff + 4.0 * g_eff * r).sqrt();
    let x_t = if g_eff == 0.0 {
        0.0
    } else {
        2.0 * g_eff / (disc + s_eff)
    };
    let x_b = (gen.g_b / delta + ex.from_t * x_t) / (ex.from_b + traps.s_b / delta);
    Ok(QpDensities { x_b, x_t })
}

/// Time derivatives `(dx_b/dt, dx_t/dt)` of the full rate equations, with
/// recombination in both electrodes and every exchange channel kept.
pub fn residual(
    densities: &QpDensities,
    nups: &NupsRates,
    traps: &TrapRecombParams,
    gen: &GenerationRates,
    p1: f64,
    gaps: &GapParams,
) -> (f64, f64) {
    let n = traps.cooper_pairs(gaps);
    let p0 = 1.0 - p1;
    let out_t = (p0 * (nups.g00_t + nups.g01_t) + p1 * (nups.g00_t + nups.g10_t)) / n;
    let out_b = (p0 * (nups.g00_b + nups.g01_b) + p1 * (nups.g00_b + nups.g10_b)) / n;
    let delta = gaps.ratio();
    let QpDensities { x_b, x_t } = *densities;
    let r = traps.r;
    let db = gen.g_b - traps.s_b * x_b - r * x_b * x_b + delta * out_t * x_t - delta * out_b * x_b;
    let dt = gen.g_t - traps.s_t * x_t - r * x_t * x_t - out_t * x_t + out_b * x_b;
    (db, dt)
}

/// Parity-switching rate and its decomposition at excited population `p1`.
pub fn parity_rate(
    env: &RateEnvironment,
    nups: &NupsRates,
    paps: &PapsRates,
    traps: &TrapRecombParams,
    p1: f64,
) -> Result<ParityContributions> {
    let gen = generation_rates(env, traps, paps, p1)?;
    let densities = steady_densities(nups, traps, &gen, p1, &env.gaps)?;
    let QpDensities { x_b, x_t } = densities;
    let p0 = 1.0 - p1;
    let paps_rate = paps_total(paps, p1);
    let qpii = nups.g00_b * x_b + nups.g00_t * x_t;
    let qp01 = p0 * nups.g01_b * x_b;
    let qp10 = p1 * (nups.g10_t * x_t + nups.g10_b * x_b);
    let total = paps_rate + qpii + qp01 + qp10;
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::domain(
            "parity rate",
            format!("total switching rate {total} is not positive"),
        ));
    }
    Ok(ParityContributions {
        paps: paps_rate,
        qp01,
        qp10,
        qpii,
        densities,
        tau_p: 1.0 / total,
    })
}

/// The same rate written as the redistribution prefactor times the
/// small-gap electrode terms; algebraically equal to the four-way sum.
pub fn parity_rate_factored(
    env: &RateEnvironment,
    nups: &NupsRates,
    paps: &PapsRates,
    traps: &TrapRecombParams,
    p1: f64,
) -> Result<f64> {
    let gen = generation_rates(env, traps, paps, p1)?;
    let d = steady_densities(nups, traps, &gen, p1, &env.gaps)?;
    let n = traps.cooper_pairs(&env.gaps);
    let ex = exchange(nups, p1, n);
    let prefactor = 2.0 - traps.s_b / (env.gaps.ratio() * ex.from_b + traps.s_b);
    Ok(prefactor * (paps_total(paps, p1) + ex.from_t * n * d.x_t))
}
