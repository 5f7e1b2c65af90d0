//! Fits of the device model to measured tables.
//!
//! Each recipe reads the observables it understands from a [`Dataset`],
//! builds a residual vector and hands it to [`least_squares`]. Starting
//! points come from the supplied device model, so results are deterministic.

use super::{least_squares, FitProblem, FitReport, LmOptions};
use crate::dataset::{Dataset, Observation};
use crate::device::{DeviceModel, BRANCH_CROSSING_NG};
use crate::field::{gaps_at_field, FieldModel, HarmonicRatios};
use crate::observables::{p1_fit_model, t1_vs_temperature, P1FitParams, P1Model};
use crate::rates::{nups_rates, paps_rates, GapParams};
use crate::spectrum::{levels, parity_splitting};
use crate::steady::parity_rate;
use crate::{Error, Result};
use serde::Serialize;

/// Temperature assumed for rows that give only a field, kelvin.
pub const BASE_TEMPERATURE: f64 = 0.007;

fn lm_options() -> LmOptions {
    LmOptions {
        parallel_jacobian: true,
        ..Default::default()
    }
}

// ---------------------------------------------------------------- spectrum

#[derive(Debug, Clone, Copy, PartialEq)]
enum SpectralKind {
    Frequency,
    HalfFrequency,
    Splitting,
}

fn spectral_observable(name: &str) -> Option<(usize, usize, SpectralKind)> {
    use SpectralKind::*;
    Some(match name {
        "f01" => (0, 1, Frequency),
        "f12" => (1, 2, Frequency),
        "f03" => (0, 3, Frequency),
        "f02" => (0, 2, Frequency),
        "f02_half" => (0, 2, HalfFrequency),
        "df01" => (0, 1, Splitting),
        "df02" => (0, 2, Splitting),
        "df12" => (1, 2, Splitting),
        "df03" => (0, 3, Splitting),
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumFitOptions {
    /// Josephson harmonics per junction (2 or 3); with 2 the third is pinned at zero.
    pub harmonics: usize,
}

impl Default for SpectrumFitOptions {
    fn default() -> Self {
        Self { harmonics: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumFit {
    pub ec: f64,
    pub ej0_a: f64,
    pub ej0_b: f64,
    pub c2: f64,
    pub c3: f64,
    pub b_c: f64,
    /// Parameter order: ec, ej0_a, ej0_b, c2, (c3), b_c.
    pub report: FitReport,
}

impl SpectrumFit {
    /// `start` with the fitted spectral parameters substituted.
    pub fn apply(&self, start: &DeviceModel) -> Result<DeviceModel> {
        let mut m = start.clone();
        m.ec = self.ec;
        m.field.ej0_a = self.ej0_a;
        m.field.ej0_b = self.ej0_b;
        m.field.b_c = self.b_c;
        m.field.harmonic_ratios = HarmonicRatios::new(vec![1.0, self.c2, self.c3])?;
        Ok(m)
    }
}

struct SpectralRow {
    i: usize,
    j: usize,
    kind: SpectralKind,
    value: f64,
    sigma: f64,
}

/// Joint fit of transition frequencies (linear residuals) and parity
/// splittings (log residuals) for charging energy, junction energies, the
/// two higher harmonic ratios and the critical field. The flux-node fields
/// stay at their values in `start`.
pub fn fit_spectrum(
    data: &Dataset,
    start: &DeviceModel,
    options: &SpectrumFitOptions,
) -> Result<SpectrumFit> {
    if !(2..=3).contains(&options.harmonics) {
        return Err(Error::domain(
            "spectrum fit",
            format!("{} harmonics unsupported", options.harmonics),
        ));
    }
    // rows grouped by (field, flux)
    let mut groups: Vec<((f64, f64), Vec<SpectralRow>)> = Vec::new();
    let mut transitions = Vec::new();
    for row in &data.rows {
        let Some((i, j, kind)) = spectral_observable(&row.observable) else {
            continue;
        };
        if kind == SpectralKind::Splitting && !(row.value > 0.0) {
            return Err(data.row_error(row, "splittings must be positive"));
        }
        let key = (row.b_par.unwrap_or(0.0), row.flux.unwrap_or(start.flux));
        let entry = SpectralRow {
            i,
            j,
            kind,
            value: row.value,
            sigma: row.sigma,
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(entry),
            None => groups.push((key, vec![entry])),
        }
        if !transitions.contains(&(i, j)) {
            transitions.push((i, j));
        }
    }
    let mut fields: Vec<f64> = groups.iter().map(|((b, _), _)| *b).collect();
    fields.sort_by(f64::total_cmp);
    fields.dedup();
    if transitions.len() < 2 || fields.len() < 3 {
        return Err(Error::RankDeficient(format!(
            "spectrum fit needs at least 2 transitions and 3 fields, got {} and {}",
            transitions.len(),
            fields.len()
        )));
    }
    let b_max = fields.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let ratios = start.field.harmonic_ratios.as_slice();
    let ratio = |k: usize| ratios.get(k).copied().unwrap_or(0.0);
    let full = options.harmonics == 3;
    let unpack = |p: &[f64]| -> (f64, f64, f64, f64, f64, f64) {
        if full {
            (p[0], p[1], p[2], p[3], p[4], p[5])
        } else {
            (p[0], p[1], p[2], p[3], 0.0, p[4])
        }
    };
    let top_level = transitions.iter().map(|t| t.1).max().unwrap_or(1);
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let (ec, ea, eb, c2, c3, bc) = unpack(p);
        let field = FieldModel {
            ej0_a: ea,
            ej0_b: eb,
            b_c: bc,
            harmonic_ratios: HarmonicRatios::new(if full {
                vec![1.0, c2, c3]
            } else {
                vec![1.0, c2]
            })?,
            ..start.field.clone()
        };
        let mut out = Vec::new();
        for ((b, flux), rows) in &groups {
            let t = field.transmon_params(ec, *b, *flux)?;
            let lv = levels(&t, BRANCH_CROSSING_NG, start.n_cut, top_level + 1)?;
            for r in rows {
                let res = match r.kind {
                    SpectralKind::Frequency => (lv.transition(r.i, r.j) - r.value) / r.sigma,
                    SpectralKind::HalfFrequency => {
                        (0.5 * lv.transition(r.i, r.j) - r.value) / r.sigma
                    }
                    SpectralKind::Splitting => {
                        let model = parity_splitting(&t, start.n_cut, r.i, r.j)?;
                        (model / r.value).ln() * r.value / r.sigma
                    }
                };
                out.push(res);
            }
        }
        Ok(out)
    };
    let mut initial = vec![start.ec, start.field.ej0_a, start.field.ej0_b, ratio(1)];
    let mut lower = vec![1e-3, 1e-2, 1e-2, -0.5];
    let mut upper = vec![10.0, 1e3, 1e3, 0.5];
    if full {
        initial.push(ratio(2));
        lower.push(-0.5);
        upper.push(0.5);
    }
    initial.push(start.field.b_c);
    lower.push(b_max * (1.0 + 1e-6) + 1e-9);
    upper.push(100.0);
    let problem = FitProblem::new(residual, initial).with_bounds(lower, upper);
    let report = least_squares(&problem, &lm_options())?;
    let (ec, ej0_a, ej0_b, c2, c3, b_c) = unpack(&report.params);
    Ok(SpectrumFit {
        ec,
        ej0_a,
        ej0_b,
        c2,
        c3,
        b_c,
        report,
    })
}

// ------------------------------------------------------------------- rates

#[derive(Debug, Clone, PartialEq)]
pub struct RatesFitOptions {
    /// Populations for rows that give only a field.
    pub p1_field: P1Model,
    /// Populations for rows that give a temperature, keyed by field.
    pub p1_temperature: Vec<(f64, P1Model)>,
    /// Minimum distance of the gap difference above the highest qubit frequency, GHz.
    pub resonance_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatesFit {
    /// Gap difference, GHz.
    pub gap_difference: f64,
    pub f_nu: f64,
    /// Common trapping rate of both electrodes, Hz.
    pub trapping: f64,
    pub gamma_nu: f64,
    /// Parameter order: gap difference, photon frequency above the pair-breaking
    /// threshold, ln trapping, ln photon rate.
    pub report: FitReport,
    pub warnings: Vec<String>,
}

impl RatesFit {
    pub fn apply(&self, start: &DeviceModel) -> Result<DeviceModel> {
        let mut m = start.clone();
        m.gaps = GapParams::from_difference(start.gaps.delta_t, self.gap_difference)?;
        m.photon.f_nu = self.f_nu;
        m.photon.gamma_nu = self.gamma_nu;
        m.traps.s_b = self.trapping;
        m.traps.s_t = self.trapping;
        Ok(m)
    }
}

/// Joint log-residual fit of even and odd parity lifetimes over field and
/// temperature for the gap difference, photon frequency and rate, and a
/// trapping rate shared by both electrodes. The top-electrode gap stays fixed.
pub fn fit_rate_model(
    data: &Dataset,
    start: &DeviceModel,
    options: &RatesFitOptions,
) -> Result<RatesFit> {
    let rows: Vec<&Observation> = data
        .rows
        .iter()
        .filter(|r| r.observable == "tau_even" || r.observable == "tau_odd")
        .collect();
    for parity in ["tau_even", "tau_odd"] {
        if !rows.iter().any(|r| r.observable == parity) {
            return Err(Error::Fit(format!("rate fit needs `{parity}` rows")));
        }
    }
    if let Some(bad) = rows.iter().find(|r| !(r.value > 0.0)) {
        return Err(data.row_error(bad, "parity lifetimes must be positive"));
    }
    options.p1_field.validate()?;
    for (_, m) in &options.p1_temperature {
        m.validate()?;
    }
    struct Point {
        op: crate::device::OperatingPoint,
        temperature: f64,
        p1: f64,
        value: f64,
        weight: f64,
    }
    let mut points = Vec::with_capacity(rows.len());
    let mut ops: Vec<crate::device::OperatingPoint> = Vec::new();
    for r in &rows {
        let b = r.b_par.unwrap_or(0.0);
        let op = match ops.iter().find(|o| o.b_par == b) {
            Some(o) => o.clone(),
            None => {
                let o = start.operating_point(b)?;
                ops.push(o.clone());
                o
            }
        };
        let (model, temperature) = match r.temperature {
            Some(t) => {
                let m = options
                    .p1_temperature
                    .iter()
                    .find(|(field, _)| (field - b).abs() < 1e-9)
                    .map(|(_, m)| *m)
                    .ok_or_else(|| {
                        data.row_error(r, format!("no population model for field {b} T"))
                    })?;
                (m, t)
            }
            None => (options.p1_field, BASE_TEMPERATURE),
        };
        let (pe, po) = model.populations(temperature, op.f01)?;
        points.push(Point {
            p1: if r.observable == "tau_even" { pe } else { po },
            op,
            temperature,
            value: r.value,
            weight: r.value / r.sigma,
        });
    }
    let f01_max = ops.iter().map(|o| o.f01).fold(0.0, f64::max);
    let lower_dd = f01_max + options.resonance_margin;
    let delta_t = start.gaps.delta_t;
    let initial_dd = start.gaps.difference();
    if initial_dd <= lower_dd {
        return Err(Error::domain(
            "rate fit",
            format!(
                "starting gap difference {initial_dd} GHz must exceed the highest qubit frequency {f01_max} GHz by the margin"
            ),
        ));
    }
    let threshold = |dd: f64| 2.0 * delta_t + dd;
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let gaps = GapParams::from_difference(delta_t, p[0])?;
        let mut device = start.clone();
        device.gaps = gaps;
        device.photon.f_nu = threshold(p[0]) + p[1];
        device.photon.gamma_nu = p[3].exp();
        device.traps.s_b = p[2].exp();
        device.traps.s_t = p[2].exp();
        points
            .iter()
            .map(|pt| {
                let mut op = pt.op.clone();
                op.gaps = gaps_at_field(
                    &gaps,
                    op.b_par,
                    device.field.b_c,
                    device.gap_field_dependence,
                )?;
                let env = device.environment(&op, pt.temperature);
                let c = parity_rate(
                    &env,
                    &nups_rates(&env)?,
                    &paps_rates(&env)?,
                    &device.traps,
                    pt.p1,
                )?;
                Ok((c.tau_p / pt.value).ln() * pt.weight)
            })
            .collect()
    };
    let excess0 = (start.photon.f_nu - threshold(initial_dd)).max(1e-3);
    let problem = FitProblem::new(
        residual,
        vec![
            initial_dd,
            excess0,
            start.traps.s_b.ln(),
            start.photon.gamma_nu.max(1e-30).ln(),
        ],
    )
    .with_bounds(
        vec![lower_dd, 1e-6, (1e-6f64).ln(), (1e-20f64).ln()],
        vec![0.9 * delta_t, 10.0 * delta_t, (1e6f64).ln(), (1e-2f64).ln()],
    );
    let report = least_squares(&problem, &lm_options())?;
    let mut warnings = Vec::new();
    if let Some(rho) = report.correlation(2, 3) {
        if rho.abs() > 0.9 {
            let w = format!("trapping and photon rate are strongly correlated (rho = {rho:.3})");
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    let p = &report.params;
    Ok(RatesFit {
        gap_difference: p[0],
        f_nu: threshold(p[0]) + p[1],
        trapping: p[2].exp(),
        gamma_nu: p[3].exp(),
        warnings,
        report,
    })
}

// ---------------------------------------------------------------------- p1

#[derive(Debug, Clone, Serialize)]
pub struct P1Fit {
    pub params: P1FitParams,
    pub report: FitReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct P1Fits {
    pub even: Option<P1Fit>,
    pub odd: Option<P1Fit>,
}

impl P1Fits {
    /// Population model for sweeps; needs both assignments.
    pub fn model(&self) -> Option<P1Model> {
        Some(P1Model::Fit {
            even: self.even.as_ref()?.params,
            odd: self.odd.as_ref()?.params,
        })
    }
}

/// Two-parameter excited-population fit against temperature, separately for
/// the `p1_even` and `p1_odd` rows present.
pub fn fit_p1(data: &Dataset, f01: f64) -> Result<P1Fits> {
    if !(f01 > 0.0) {
        return Err(Error::domain("p1 fit", "qubit frequency must be > 0"));
    }
    let one = |name: &str| -> Result<Option<P1Fit>> {
        let rows: Vec<&Observation> = data.with_observable(name).collect();
        if rows.is_empty() {
            return Ok(None);
        }
        if rows.len() < 4 {
            return Err(Error::RankDeficient(format!(
                "`{name}` needs at least 4 temperatures, got {}",
                rows.len()
            )));
        }
        let mut pts = Vec::with_capacity(rows.len());
        for r in &rows {
            let t = r
                .temperature
                .ok_or_else(|| data.row_error(r, "p1 rows need a temperature"))?;
            pts.push((t, r.value, r.sigma));
        }
        let coldest = pts
            .iter()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|p| p.1)
            .unwrap_or(0.0);
        let residual = |p: &[f64]| -> Result<Vec<f64>> {
            let params = P1FitParams { a: p[0], b: p[1] };
            Ok(pts
                .iter()
                .map(|(t, v, s)| (p1_fit_model(*t, f01, &params) - v) / s)
                .collect())
        };
        let problem = FitProblem::new(residual, vec![coldest.clamp(0.0, 1.0), 1.0])
            .with_bounds(vec![0.0, 0.0], vec![1.0, 1e3]);
        let report = least_squares(&problem, &LmOptions::default())?;
        Ok(Some(P1Fit {
            params: P1FitParams {
                a: report.params[0],
                b: report.params[1],
            },
            report,
        }))
    };
    let fits = P1Fits {
        even: one("p1_even")?,
        odd: one("p1_odd")?,
    };
    if fits.even.is_none() && fits.odd.is_none() {
        return Err(Error::Fit("no `p1_even` or `p1_odd` rows".into()));
    }
    Ok(fits)
}

// ---------------------------------------------------------------------- T1

#[derive(Debug, Clone, Serialize)]
pub struct T1Fit {
    /// Temperature-independent relaxation rate, Hz.
    pub gamma10_ee: f64,
    pub report: FitReport,
}

/// One-parameter fit of T1 against temperature with the gaps held fixed.
/// Residuals are linear in T1, so a flat data set returns the inverse mean.
pub fn fit_t1(data: &Dataset, device: &DeviceModel) -> Result<T1Fit> {
    let rows: Vec<&Observation> = data.with_observable("t1").collect();
    if rows.len() < 4 {
        return Err(Error::RankDeficient(format!(
            "T1 fit needs at least 4 points, got {}",
            rows.len()
        )));
    }
    let mut pts = Vec::with_capacity(rows.len());
    for r in &rows {
        let t = r
            .temperature
            .ok_or_else(|| data.row_error(r, "T1 rows need a temperature"))?;
        if !(r.value > 0.0) {
            return Err(data.row_error(r, "T1 must be positive"));
        }
        let op = device.operating_point(r.b_par.unwrap_or(0.0))?;
        pts.push((device.environment(&op, t), t, r.value, r.sigma));
    }
    let coldest = pts
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.2)
        .unwrap_or(1.0);
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        pts.iter()
            .map(|(env, t, v, s)| Ok((t1_vs_temperature(*t, p[0], env)?.t1 - v) / s))
            .collect()
    };
    let problem =
        FitProblem::new(residual, vec![1.0 / coldest]).with_bounds(vec![1e-3], vec![1e12]);
    let report = least_squares(&problem, &LmOptions::default())?;
    Ok(T1Fit {
        gamma10_ee: report.params[0],
        report,
    })
}
