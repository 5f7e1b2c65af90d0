//! A complete device description: spectrum, field dependence, gaps, photon
//! environment and quasiparticle sinks.

use crate::field::{gaps_at_field, FieldModel, GapFieldDependence, InterferenceWeights};
use crate::rates::{nups_rates, paps_rates, GapParams, RateEnvironment};
use crate::spectrum::{levels, parity_splitting, TransmonParams, DEFAULT_N_CUT, LOWER_SWEET_SPOT};
use crate::steady::{parity_rate, ParityContributions, TrapRecombParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Offset charge at which both parity branches share one qubit frequency.
pub const BRANCH_CROSSING_NG: f64 = 0.25;

/// Pair-breaking photon mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonParams {
    /// Photon frequency, GHz.
    pub f_nu: f64,
    /// Dimensionless photon rate.
    pub gamma_nu: f64,
}

fn default_flux() -> f64 {
    LOWER_SWEET_SPOT
}

fn default_n_cut() -> usize {
    DEFAULT_N_CUT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceModel {
    /// Charging energy, GHz.
    pub ec: f64,
    pub field: FieldModel,
    /// Loop phase, radians; defaults to the lower sweet spot.
    #[serde(default = "default_flux")]
    pub flux: f64,
    #[serde(default = "default_n_cut")]
    pub n_cut: usize,
    pub gaps: GapParams,
    pub photon: PhotonParams,
    pub traps: TrapRecombParams,
    #[serde(default)]
    pub gap_field_dependence: GapFieldDependence,
}

/// Device quantities at one in-plane field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub b_par: f64,
    pub transmon: TransmonParams,
    /// Qubit frequency where the parity branches cross, GHz.
    pub f01: f64,
    /// First-harmonic loop energy, GHz.
    pub ej: f64,
    pub weights: InterferenceWeights,
    pub gaps: GapParams,
}

impl DeviceModel {
    /// The reference Al/AlOx/Al device.
    pub fn reference() -> Self {
        Self {
            ec: 0.3275,
            field: FieldModel::reference(),
            flux: LOWER_SWEET_SPOT,
            n_cut: DEFAULT_N_CUT,
            gaps: GapParams {
                delta_b: 54.0 + 5.49,
                delta_t: 54.0,
            },
            photon: PhotonParams {
                f_nu: 119.0,
                gamma_nu: 1.69e-8,
            },
            traps: TrapRecombParams::reference(),
            gap_field_dependence: GapFieldDependence::Frozen,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ec > 0.0) {
            return Err(Error::domain("device", "charging energy must be > 0"));
        }
        self.field.validate()?;
        self.gaps.validate()?;
        self.traps.validate()?;
        if !(self.photon.f_nu > 0.0 && self.photon.gamma_nu >= 0.0) {
            return Err(Error::domain(
                "device",
                "photon frequency must be > 0 and photon rate >= 0",
            ));
        }
        Ok(())
    }

    pub fn transmon_at(&self, b_par: f64) -> Result<TransmonParams> {
        self.field.transmon_params(self.ec, b_par, self.flux)
    }

    pub fn operating_point(&self, b_par: f64) -> Result<OperatingPoint> {
        let transmon = self.transmon_at(b_par)?;
        let f01 = levels(&transmon, BRANCH_CROSSING_NG, self.n_cut, 2)?.transition(0, 1);
        let ej = transmon.effective_ej();
        let gaps = gaps_at_field(&self.gaps, b_par, self.field.b_c, self.gap_field_dependence)?;
        Ok(OperatingPoint {
            b_par,
            f01,
            ej,
            weights: self.field.weights(b_par),
            gaps,
            transmon,
        })
    }

    /// Parity splitting of transition `i -> j` at field `b_par`, GHz.
    pub fn splitting(&self, b_par: f64, i: usize, j: usize) -> Result<f64> {
        parity_splitting(&self.transmon_at(b_par)?, self.n_cut, i, j)
    }

    pub fn environment(&self, op: &OperatingPoint, temperature: f64) -> RateEnvironment {
        RateEnvironment {
            gaps: op.gaps,
            temperature,
            f_nu: self.photon.f_nu,
            gamma_nu: self.photon.gamma_nu,
            ej_sigma0: self.field.ej0_a + self.field.ej0_b,
            ej: op.ej,
            f01: op.f01,
            ec: self.ec,
            weights: op.weights,
        }
    }

    /// Parity-switching rate at an operating point.
    pub fn parity_rate(
        &self,
        op: &OperatingPoint,
        temperature: f64,
        p1: f64,
    ) -> Result<ParityContributions> {
        let env = self.environment(op, temperature);
        let nups = nups_rates(&env)?;
        let paps = paps_rates(&env)?;
        parity_rate(&env, &nups, &paps, &self.traps, p1)
    }
}
