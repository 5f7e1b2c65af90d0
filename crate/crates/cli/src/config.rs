//! Run configuration: one JSON document, unknown keys rejected.

use crate::failure::Failure;
use serde::Deserialize;
use std::path::Path;
use transmon_qp::device::{DeviceModel, BRANCH_CROSSING_NG};
use transmon_qp::observables::{P1Model, SweepConfig, REFERENCE_P1, REFERENCE_P1_FITS};
use transmon_qp::telegraph::{EmissionModel, DEFAULT_T_REP};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Device parameters; the reference device when absent.
    #[serde(default = "DeviceModel::reference")]
    pub device: DeviceModel,
    pub spectrum: Option<SpectrumGrid>,
    pub sweep: Option<SweepConfig>,
    pub telegraph: Option<TelegraphConfig>,
    #[serde(default)]
    pub fit: FitConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumGrid {
    /// In-plane fields, T.
    pub fields: Vec<f64>,
    /// Loop phases, radians; the device flux when absent.
    pub fluxes: Option<Vec<f64>>,
    #[serde(default = "default_offset_charges")]
    pub offset_charges: Vec<f64>,
}

fn default_offset_charges() -> Vec<f64> {
    vec![BRANCH_CROSSING_NG]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelegraphConfig {
    /// Mean even dwell time, s.
    pub tau_even: f64,
    /// Mean odd dwell time, s.
    pub tau_odd: f64,
    #[serde(default = "default_t_rep")]
    pub t_rep: f64,
    pub n_shots: usize,
    pub seed: u64,
    #[serde(default = "EmissionModel::typical")]
    pub emission: EmissionModel,
}

fn default_t_rep() -> f64 {
    DEFAULT_T_REP
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct P1Table {
    pub b_par: f64,
    pub model: P1Model,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Josephson harmonics per junction in the spectrum recipe.
    #[serde(default = "default_harmonics")]
    pub harmonics: usize,
    /// Populations for field-only rows of the rates recipe.
    #[serde(default = "default_p1_field")]
    pub p1_field: P1Model,
    /// Populations for temperature rows of the rates recipe, by field.
    #[serde(default = "default_p1_temperature")]
    pub p1_temperature: Vec<P1Table>,
    #[serde(default = "default_margin")]
    pub resonance_margin: f64,
    /// Field whose qubit frequency enters the p1 recipe, T.
    #[serde(default)]
    pub b_par: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            harmonics: default_harmonics(),
            p1_field: default_p1_field(),
            p1_temperature: default_p1_temperature(),
            resonance_margin: default_margin(),
            b_par: 0.0,
        }
    }
}

fn default_harmonics() -> usize {
    3
}

fn default_p1_field() -> P1Model {
    P1Model::Fixed { p1: REFERENCE_P1 }
}

fn default_p1_temperature() -> Vec<P1Table> {
    REFERENCE_P1_FITS
        .iter()
        .map(|(b, even, odd)| P1Table {
            b_par: *b,
            model: P1Model::Fit {
                even: *even,
                odd: *odd,
            },
        })
        .collect()
}

fn default_margin() -> f64 {
    0.01
}

/// A parsed config plus the digest of its bytes.
pub struct Loaded {
    pub config: RunConfig,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    config
        .device
        .validate()
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        config,
        sha256: crate::output::sha256_hex(&bytes),
    })
}

/// Reject empty and non-finite grids before any computation.
pub fn check_grid(name: &str, values: &[f64]) -> Result<(), Failure> {
    if values.is_empty() {
        return Err(Failure::usage(format!("{name}: empty grid")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Failure::usage(format!("{name}: non-finite value {v}")));
    }
    Ok(())
}
