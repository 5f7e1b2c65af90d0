//! Single-shot parity readout: synthetic telegraph traces, hidden-Markov
//! analysis, spectral extraction and a few auxiliary signal shapes.

mod emission;
mod hmm;
mod psd;
mod signals;
mod trace;

pub use emission::{
    classify_point, classify_shots, parity_fidelity, parity_signal, EmissionModel, Gaussian2,
};
pub use hmm::{hmm_fit, viterbi_path, HmmModel, HmmOptions, HmmResult};
pub use psd::{periodogram, psd_extract, psd_model, psd_model_sampled, PsdResult};
pub use signals::{qutrit_relaxation, ramsey_beating, ramsey_beating_detuned};
pub use trace::{
    read_trace, simulate, simulate_trace, write_trace, ShotTrace, Simulation, TraceSidecar,
};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default repetition time of the parity measurement, seconds.
pub const DEFAULT_T_REP: f64 = 80e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// +1 for even, -1 for odd.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Number of parity changes along a path.
pub fn switch_count(path: &[Parity]) -> usize {
    path.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Rates and sampling of the hidden two-state parity process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelegraphParams {
    /// Even to odd switching rate, Hz.
    pub gamma_eo: f64,
    /// Odd to even switching rate, Hz.
    pub gamma_oe: f64,
    pub t_rep: f64,
    pub n_shots: usize,
}

impl TelegraphParams {
    /// Parameters from mean dwell times (seconds).
    pub fn from_dwell_times(
        tau_even: f64,
        tau_odd: f64,
        t_rep: f64,
        n_shots: usize,
    ) -> Result<Self> {
        if !(tau_even > 0.0 && tau_odd > 0.0) {
            return Err(Error::domain(
                "dwell time",
                format!("({tau_even}, {tau_odd}) must be positive"),
            ));
        }
        let p = Self {
            gamma_eo: 1.0 / tau_even,
            gamma_oe: 1.0 / tau_odd,
            t_rep,
            n_shots,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_rep > 0.0 && self.t_rep.is_finite()) {
            return Err(Error::domain(
                "t_rep",
                format!("{} must be positive", self.t_rep),
            ));
        }
        for (name, g) in [("gamma_eo", self.gamma_eo), ("gamma_oe", self.gamma_oe)] {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::domain("switching rate", format!("{name} = {g}")));
            }
            if g * self.t_rep >= 0.5 {
                return Err(Error::domain(
                    "switching rate",
                    format!("{name} * t_rep = {} must stay below 0.5", g * self.t_rep),
                ));
            }
        }
        if self.n_shots == 0 {
            return Err(Error::domain("n_shots", "must be at least 1".to_string()));
        }
        Ok(())
    }

    /// Per-shot switching probabilities (even to odd, odd to even).
    pub fn switch_probabilities(&self) -> [f64; 2] {
        [self.gamma_eo * self.t_rep, self.gamma_oe * self.t_rep]
    }
}
