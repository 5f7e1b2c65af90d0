//! Experiment-facing quantities: T1 against temperature, qubit excited
//! population, ququart thermometry and parity-lifetime sweeps.

use crate::device::{DeviceModel, OperatingPoint};
use crate::rates::{nups_rates, thermal_density, RateEnvironment};
use crate::steady::ParityContributions;
use crate::units::thermal_ghz;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fraction of "even" readouts that reflect the true excited population;
/// the rest of the odd assignment comes from the mapping error.
const ASSIGNMENT_SCALE: f64 = 0.8;
const ODD_ASSIGNMENT_OFFSET: f64 = 0.2;

/// Relaxation budget at one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct T1Breakdown {
    pub t1: f64,
    /// Dielectric (temperature-independent) relaxation including stimulated emission, Hz.
    pub dielectric_rate: f64,
    /// Relaxation by thermal quasiparticles, Hz.
    pub qp_rate: f64,
}

fn boltzmann(f: f64, temperature: f64) -> f64 {
    (-f / thermal_ghz(temperature)).exp()
}

/// T1 at `temperature` from a temperature-independent relaxation rate
/// `gamma10_ee` (Hz) plus thermal quasiparticles in both electrodes.
pub fn t1_vs_temperature(
    temperature: f64,
    gamma10_ee: f64,
    env: &RateEnvironment,
) -> Result<T1Breakdown> {
    if !(temperature > 0.0) {
        return Err(Error::domain("T1", "temperature must be > 0"));
    }
    let env = env.with_temperature(temperature);
    let nups = nups_rates(&env)?;
    let x_b = thermal_density(env.gaps.delta_b, temperature)?;
    let x_t = thermal_density(env.gaps.delta_t, temperature)?;
    let detailed = 1.0 + boltzmann(env.f01, temperature);
    let dielectric_rate = gamma10_ee * detailed;
    let qp_rate = (nups.g10_b * x_b + nups.g10_t * x_t) * detailed;
    Ok(T1Breakdown {
        t1: 1.0 / (dielectric_rate + qp_rate),
        dielectric_rate,
        qp_rate,
    })
}

/// Steady excited population from T1, the non-thermal excitation rate
/// `gamma01_eo` (Hz) and thermal equilibrium.
pub fn p1_steady(t1: f64, gamma01_eo: f64, f01: f64, temperature: f64) -> f64 {
    let e = boltzmann(f01, temperature);
    let p = t1 * gamma01_eo + e / (1.0 + e);
    if p > 1.0 {
        log::warn!("excited population {p} exceeds one; clamped");
        return 1.0;
    }
    p
}

/// Non-thermal excitation rate: photon-assisted plus quasiparticle-induced.
pub fn excitation_rate(g01_ph: f64, contributions: &ParityContributions, p1: f64) -> f64 {
    g01_ph + contributions.qp01 / (1.0 - p1)
}

/// Average excited population seen during "even" and "odd" assigned runs.
pub fn assigned_populations(p1: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::domain(
            "assigned populations",
            format!("p1 = {p1} outside [0, 1]"),
        ));
    }
    Ok((
        ASSIGNMENT_SCALE * p1,
        ODD_ASSIGNMENT_OFFSET + ASSIGNMENT_SCALE * p1,
    ))
}

/// Parameters of the two-term excited-population model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct P1FitParams {
    pub a: f64,
    pub b: f64,
}

impl P1FitParams {
    pub fn validate(&self) -> Result<()> {
        if !((0.0..=1.0).contains(&self.a) && self.b >= 0.0) {
            return Err(Error::domain("p1 model", "need a in [0, 1] and b >= 0"));
        }
        Ok(())
    }
}

/// `a / (1 + e) + b e / (1 + e)` with `e` the Boltzmann factor of the qubit.
pub fn p1_fit_model(temperature: f64, f01: f64, params: &P1FitParams) -> f64 {
    let e = boltzmann(f01, temperature);
    (params.a + params.b * e) / (1.0 + e)
}

/// Measured two-term population fits `(field, even, odd)` for the reference
/// device, using the excited-pair readout where both exist.
pub const REFERENCE_P1_FITS: [(f64, P1FitParams, P1FitParams); 6] = [
    (
        0.0,
        P1FitParams { a: 0.034, b: 1.461 },
        P1FitParams { a: 0.172, b: 0.932 },
    ),
    (
        -0.13,
        P1FitParams { a: 0.031, b: 1.261 },
        P1FitParams { a: 0.212, b: 0.788 },
    ),
    (
        0.23,
        P1FitParams { a: 0.014, b: 1.280 },
        P1FitParams { a: 0.172, b: 0.788 },
    ),
    (
        0.28,
        P1FitParams { a: 0.052, b: 1.801 },
        P1FitParams { a: 0.180, b: 1.382 },
    ),
    (
        0.34,
        P1FitParams { a: 0.094, b: 0.712 },
        P1FitParams { a: 0.183, b: 0.522 },
    ),
    (
        0.41,
        P1FitParams { a: 0.064, b: 0.649 },
        P1FitParams { a: 0.167, b: 0.407 },
    ),
];

/// Excited population of the field sweeps at base temperature.
pub const REFERENCE_P1: f64 = 0.054;

/// Tabulated population model at one of the measured fields.
pub fn reference_p1_model(b_par: f64) -> Option<P1Model> {
    REFERENCE_P1_FITS
        .iter()
        .find(|(b, _, _)| (b - b_par).abs() < 1e-9)
        .map(|(_, even, odd)| P1Model::Fit {
            even: *even,
            odd: *odd,
        })
}

/// Source of the assigned excited populations used in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum P1Model {
    /// One excited population, split by [`assigned_populations`].
    Fixed { p1: f64 },
    /// The assigned populations directly.
    Assigned { even: f64, odd: f64 },
    /// Temperature-dependent populations from the two-term model.
    Fit { even: P1FitParams, odd: P1FitParams },
}

impl P1Model {
    pub fn validate(&self) -> Result<()> {
        match self {
            P1Model::Fixed { p1 } => assigned_populations(*p1).map(|_| ()),
            P1Model::Assigned { even, odd } => {
                if [even, odd].iter().all(|p| (0.0..=1.0).contains(*p)) {
                    Ok(())
                } else {
                    Err(Error::domain(
                        "p1 model",
                        "assigned populations must lie in [0, 1]",
                    ))
                }
            }
            P1Model::Fit { even, odd } => {
                even.validate()?;
                odd.validate()
            }
        }
    }

    /// `(even, odd)` assigned populations.
    pub fn populations(&self, temperature: f64, f01: f64) -> Result<(f64, f64)> {
        match self {
            P1Model::Fixed { p1 } => assigned_populations(*p1),
            P1Model::Assigned { even, odd } => Ok((*even, *odd)),
            P1Model::Fit { even, odd } => Ok((
                p1_fit_model(temperature, f01, even).min(1.0),
                p1_fit_model(temperature, f01, odd).min(1.0),
            )),
        }
    }
}

/// Thermal ground-state population of a four-level system.
pub fn ground_population(temperature: f64, f01: f64, f02: f64, f03: f64) -> f64 {
    1.0 / (1.0
        + boltzmann(f01, temperature)
        + boltzmann(f02, temperature)
        + boltzmann(f03, temperature))
}

const THERMOMETRY_T_MIN: f64 = 1e-3;
const THERMOMETRY_T_MAX: f64 = 10.0;

/// Temperature at which a thermal four-level system has ground population
/// `p0`. A ground population of exactly one maps to zero temperature.
pub fn effective_temperature(p0: f64, f01: f64, f02: f64, f03: f64) -> Result<f64> {
    if !(0.0 < p0 && p0 <= 1.0) {
        return Err(Error::domain(
            "thermometry",
            format!("p0 = {p0} outside (0, 1]"),
        ));
    }
    if !(0.0 < f01 && f01 < f02 && f02 < f03) {
        return Err(Error::domain(
            "thermometry",
            "frequencies must be positive and increasing",
        ));
    }
    if p0 < 0.25 {
        return Err(Error::domain(
            "thermometry",
            format!("p0 = {p0} is below the infinite-temperature limit 1/4"),
        ));
    }
    if p0 == 1.0 {
        return Ok(0.0);
    }
    let mut lo = THERMOMETRY_T_MIN.ln();
    let mut hi = THERMOMETRY_T_MAX.ln();
    let g = |log_t: f64| ground_population(log_t.exp(), f01, f02, f03) - p0;
    if g(lo) < 0.0 {
        return Err(Error::domain("thermometry", "temperature below 1 mK"));
    }
    if g(hi) > 0.0 {
        return Err(Error::domain("thermometry", "temperature above 10 K"));
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// In-plane field, T.
    Field,
    /// Temperature, K.
    Temperature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    /// Strictly increasing axis values.
    pub values: Vec<f64>,
    /// Field held fixed in a temperature sweep, T.
    #[serde(default)]
    pub b_par: f64,
    /// Temperature held fixed in a field sweep, K.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    pub p1: P1Model,
}

fn default_temperature() -> f64 {
    0.007
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub axis: f64,
    pub b_par: f64,
    pub temperature: f64,
    pub f01: f64,
    pub p1_even: f64,
    pub p1_odd: f64,
    pub even: ParityContributions,
    pub odd: ParityContributions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointFailure {
    pub axis: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub failures: Vec<PointFailure>,
}

fn sweep_point(
    model: &DeviceModel,
    op: &OperatingPoint,
    axis: f64,
    temperature: f64,
    p1: &P1Model,
) -> Result<SweepPoint> {
    let (p1_even, p1_odd) = p1.populations(temperature, op.f01)?;
    Ok(SweepPoint {
        axis,
        b_par: op.b_par,
        temperature,
        f01: op.f01,
        p1_even,
        p1_odd,
        even: model.parity_rate(op, temperature, p1_even)?,
        odd: model.parity_rate(op, temperature, p1_odd)?,
    })
}

/// Parity lifetimes for both assignments along a field or temperature grid.
/// Points run in parallel on the current rayon pool; failures at single
/// points are collected rather than aborting the sweep.
pub fn sweep(model: &DeviceModel, config: &SweepConfig) -> Result<SweepResult> {
    model.validate()?;
    config.p1.validate()?;
    if config.values.is_empty() {
        return Err(Error::domain("sweep", "empty grid"));
    }
    if config.values.iter().any(|v| !v.is_finite())
        || config.values.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::domain(
            "sweep",
            "grid must be finite and strictly increasing",
        ));
    }
    let fixed_op = match config.axis {
        SweepAxis::Temperature => Some(model.operating_point(config.b_par)?),
        SweepAxis::Field => None,
    };
    let outcomes: Vec<(f64, Result<SweepPoint>)> = config
        .values
        .par_iter()
        .map(|&v| {
            let outcome = match config.axis {
                SweepAxis::Field => model
                    .operating_point(v)
                    .and_then(|op| sweep_point(model, &op, v, config.temperature, &config.p1)),
                SweepAxis::Temperature => sweep_point(
                    model,
                    fixed_op.as_ref().expect("fixed operating point"),
                    v,
                    v,
                    &config.p1,
                ),
            };
            (v, outcome)
        })
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (axis, outcome) in outcomes {
        match outcome {
            Ok(p) => points.push(p),
            Err(e) => failures.push(PointFailure {
                axis,
                message: e.to_string(),
            }),
        }
    }
    Ok(SweepResult {
        axis: config.axis,
        points,
        failures,
    })
}
