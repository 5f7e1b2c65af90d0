//! In-plane magnetic field dependence of the SQUID junctions and the
//! film-thickness bookkeeping that sets the superconducting gaps.

use crate::rates::GapParams;
use crate::specfun::sinc;
use crate::spectrum::TransmonParams;
use crate::units::micro_ev_to_ghz;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Ratios `E_m / E_1` of the Josephson harmonics, shared by both junctions.
/// The first entry is always one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HarmonicRatios(Vec<f64>);

impl HarmonicRatios {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if ratios.first() != Some(&1.0) {
            return Err(Error::domain(
                "harmonic ratios",
                "first ratio must be exactly 1",
            ));
        }
        if ratios.iter().any(|r| !r.is_finite()) {
            return Err(Error::domain("harmonic ratios", "non-finite ratio"));
        }
        Ok(Self(ratios))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl TryFrom<Vec<f64>> for HarmonicRatios {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<HarmonicRatios> for Vec<f64> {
    fn from(r: HarmonicRatios) -> Self {
        r.0
    }
}

/// Zero-field junction energies and the field scales that suppress them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldModel {
    /// First-harmonic Josephson energy of junction a at zero field, GHz.
    pub ej0_a: f64,
    /// Same for junction b, GHz.
    pub ej0_b: f64,
    /// Field of the first Fraunhofer node of junction a, T.
    pub b_phi_a: f64,
    /// Field of the first Fraunhofer node of junction b, T.
    pub b_phi_b: f64,
    /// Effective in-plane critical field of the junction films, T.
    pub b_c: f64,
    pub harmonic_ratios: HarmonicRatios,
}

/// First-harmonic Josephson energies of the two junctions, GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JunctionPair {
    pub a: f64,
    pub b: f64,
}

/// Weights of the interference terms in the quasiparticle matrix elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterferenceWeights {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

/// Whether the gaps follow the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapFieldDependence {
    /// Gaps held at their zero-field values.
    #[default]
    Frozen,
    /// Gaps scaled by `sqrt(1 - (B / B_c)^2)`.
    Suppressed,
}

impl FieldModel {
    /// The Al/AlOx/Al device used throughout the documentation.
    pub fn reference() -> Self {
        Self {
            ej0_a: 19.47,
            ej0_b: 5.97,
            b_phi_a: 0.8,
            b_phi_b: 1.12,
            b_c: 1.85,
            harmonic_ratios: HarmonicRatios(vec![1.0, -0.009, 0.0003]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.ej0_a, self.ej0_b, self.b_phi_a, self.b_phi_b, self.b_c];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::domain(
                "field model",
                "energies and field scales must be positive",
            ));
        }
        Ok(())
    }

    /// Junction energies at in-plane field `b_par` (even in the field).
    pub fn ej_vs_field(&self, b_par: f64) -> Result<JunctionPair> {
        self.validate()?;
        let b = b_par.abs();
        if !(b < self.b_c) {
            return Err(Error::domain(
                "field model",
                format!("|B| = {b} T must stay below B_c = {} T", self.b_c),
            ));
        }
        let envelope = (1.0 - (b / self.b_c).powi(2)).sqrt();
        Ok(JunctionPair {
            a: self.ej0_a * envelope * sinc(b / self.b_phi_a).abs(),
            b: self.ej0_b * envelope * sinc(b / self.b_phi_b).abs(),
        })
    }

    /// Transmon parameters at field `b_par` and loop flux `flux`.
    pub fn transmon_params(&self, ec: f64, b_par: f64, flux: f64) -> Result<TransmonParams> {
        let ej = self.ej_vs_field(b_par)?;
        let r = self.harmonic_ratios.as_slice();
        TransmonParams::new(
            ec,
            r.iter().map(|c| c * ej.a).collect(),
            r.iter().map(|c| c * ej.b).collect(),
            flux,
        )
    }

    /// Zero-field junction asymmetry.
    pub fn asymmetry0(&self) -> f64 {
        (self.ej0_a - self.ej0_b).abs() / (self.ej0_a + self.ej0_b)
    }

    /// Junction asymmetry at field `b_par`.
    pub fn squid_asymmetry(&self, b_par: f64) -> Result<f64> {
        let p = self.ej_vs_field(b_par)?;
        squid_asymmetry(p.a, p.b)
    }

    /// Interference weights at field `b_par`.
    pub fn weights(&self, b_par: f64) -> InterferenceWeights {
        interference_weights(self.asymmetry0(), b_par, self.b_phi_a, self.b_phi_b)
    }

    /// Smallest positive field at which the two junction energies cross.
    pub fn symmetric_field(&self) -> Result<f64> {
        let diff = |b: f64| -> Result<f64> {
            let p = self.ej_vs_field(b)?;
            Ok(p.a - p.b)
        };
        let top = 0.999 * self.b_c;
        let steps = 2000;
        let mut lo = 0.0;
        let mut f_lo = diff(lo)?;
        for i in 1..=steps {
            let hi = top * i as f64 / steps as f64;
            let f_hi = diff(hi)?;
            if f_lo == 0.0 {
                return Ok(lo);
            }
            if f_lo.signum() != f_hi.signum() {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if diff(m)?.signum() == f_lo.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                    if b - a < 1e-15 {
                        break;
                    }
                }
                return Ok(0.5 * (a + b));
            }
            lo = hi;
            f_lo = f_hi;
        }
        Err(Error::domain(
            "symmetric field",
            "junction energies never cross below B_c",
        ))
    }
}

/// `|E_a - E_b| / (E_a + E_b)`.
pub fn squid_asymmetry(ej_a: f64, ej_b: f64) -> Result<f64> {
    let sum = ej_a + ej_b;
    if !(sum > 0.0) {
        return Err(Error::domain(
            "squid asymmetry",
            "both junction energies vanish",
        ));
    }
    Ok((ej_a - ej_b).abs() / sum)
}

/// Interference weights from the zero-field asymmetry and the Fraunhofer
/// patterns of the two junctions.
pub fn interference_weights(
    asymmetry0: f64,
    b_par: f64,
    b_phi_a: f64,
    b_phi_b: f64,
) -> InterferenceWeights {
    let sa = sinc(b_par / b_phi_a);
    let sb = sinc(b_par / b_phi_b);
    let z_plus = sa + sb;
    let z_minus = sa - sb;
    let plus = (0.25 * (2.0 + z_minus + asymmetry0 * z_plus)).clamp(0.0, 1.0);
    InterferenceWeights {
        gamma_plus: plus,
        gamma_minus: 1.0 - plus,
    }
}

/// Fraunhofer node of junction b that places the crossing of the junction
/// energies at `b_sym`, given the other junction's parameters.
pub fn node_for_symmetric_field(ej0_a: f64, ej0_b: f64, b_phi_a: f64, b_sym: f64) -> Result<f64> {
    let target = ej0_a * sinc(b_sym / b_phi_a).abs() / ej0_b;
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::domain(
            "symmetric field",
            format!("no solution: required envelope ratio {target}"),
        ));
    }
    // sinc decreases monotonically on (0, 1)
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sinc(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(b_sym / (0.5 * (lo + hi)))
}

const GAP_BULK_MICRO_EV: f64 = 180.0;
const GAP_THICKNESS_COEFF: f64 = 600.0;

/// Aluminium gap of a film of thickness `t_nm` (nm), GHz.
pub fn gap_from_thickness(t_nm: f64) -> Result<f64> {
    if !(t_nm > 0.0 && t_nm.is_finite()) {
        return Err(Error::domain(
            "gap",
            format!("film thickness {t_nm} nm must be > 0"),
        ));
    }
    Ok(micro_ev_to_ghz(
        GAP_BULK_MICRO_EV + GAP_THICKNESS_COEFF / t_nm,
    ))
}

/// Effective film thicknesses of a double-angle evaporated junction, nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElectrodeThicknesses {
    pub bottom: f64,
    pub top: f64,
    /// Thickness of the overlap region shared between the two films.
    pub overlap: f64,
}

/// Splits measured stack heights into electrode thicknesses. `t1` is the
/// bottom film, `t2` the top film, `t3` the full stack height and
/// `t_barrier` the oxide.
pub fn electrode_thicknesses(
    t1: f64,
    t2: f64,
    t3: f64,
    t_barrier: f64,
) -> Result<ElectrodeThicknesses> {
    let overlap = t1 + t2 - t3 + t_barrier;
    let out = ElectrodeThicknesses {
        bottom: t1 - overlap,
        top: t2 - overlap,
        overlap,
    };
    if !(out.bottom > 0.0 && out.top > 0.0 && out.overlap >= 0.0) {
        return Err(Error::domain(
            "electrode thicknesses",
            format!("inconsistent stack heights give {out:?}"),
        ));
    }
    Ok(out)
}

/// Critical field of a bilayer from the critical fields of its films.
pub fn effective_critical_field(b_c_bottom: f64, b_c_top: f64, gaps: &GapParams) -> f64 {
    let (db, dt) = (gaps.delta_b, gaps.delta_t);
    let inv2 = (dt / (b_c_bottom * b_c_bottom) + db / (b_c_top * b_c_top)) / (db + dt);
    inv2.sqrt().recip()
}

/// Gaps at field `b_par`.
pub fn gaps_at_field(
    gaps: &GapParams,
    b_par: f64,
    b_c: f64,
    mode: GapFieldDependence,
) -> Result<GapParams> {
    match mode {
        GapFieldDependence::Frozen => Ok(*gaps),
        GapFieldDependence::Suppressed => {
            if !(b_par.abs() < b_c) {
                return Err(Error::domain(
                    "gaps",
                    "field at or above the critical field",
                ));
            }
            let s = (1.0 - (b_par / b_c).powi(2)).sqrt();
            GapParams::new(gaps.delta_b * s, gaps.delta_t * s)
        }
    }
}
