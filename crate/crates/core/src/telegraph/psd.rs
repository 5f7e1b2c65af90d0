use crate::fit::{least_squares, FitProblem, LmOptions};
use crate::{Error, Result};
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::Serialize;
use std::f64::consts::PI;
use std::ops::Range;

/// Number of Welch segment lengths that fit into the padded record.
const SEGMENT_DIVISOR: usize = 8;
const LOG_BINS: usize = 48;

/// Lorentzian-plus-floor spectral density of a two-level signal of
/// amplitude one with mean dwell `tau`, contrast `fidelity`, sampled at `t_rep`.
pub fn psd_model(f: f64, tau: f64, fidelity: f64, t_rep: f64) -> f64 {
    let f2 = fidelity * fidelity;
    let corner = 2.0 / tau;
    f2 * 2.0 * corner / (corner * corner + (2.0 * PI * f).powi(2)) + (1.0 - f2) * t_rep
}

/// Exact density of the same signal observed once per `t_rep`: the parity
/// correlation decays as `lambda^k` with `lambda = 1 - 2 t_rep / tau`.
/// Tends to [`psd_model`] when `tau >> t_rep`; used for fitting so that
/// short dwell times are not biased low.
pub fn psd_model_sampled(f: f64, tau: f64, fidelity: f64, t_rep: f64) -> f64 {
    let f2 = fidelity * fidelity;
    let lambda = 1.0 - 2.0 * t_rep / tau;
    let c = (2.0 * PI * f * t_rep).cos();
    // 1 - 2 lambda c + lambda^2 written to keep precision when lambda -> 1
    let denom = (1.0 - lambda).powi(2) + 2.0 * lambda * (1.0 - c);
    f2 * t_rep * (1.0 - lambda * lambda) / denom + (1.0 - f2) * t_rep
}

/// Welch estimate of the spectral density at positive frequencies.
/// The mean is removed and the record zero-padded to a power of two; Hann
/// segments of an eighth of the padded length overlap by half. Normalised so
/// white noise of unit variance gives `t_rep`.
pub fn periodogram(signal: &[f64], t_rep: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if signal.len() < 16 * SEGMENT_DIVISOR {
        return Err(Error::domain(
            "spectrum",
            format!("{} samples is too short", signal.len()),
        ));
    }
    if !(t_rep > 0.0) {
        return Err(Error::domain("t_rep", format!("{t_rep} must be positive")));
    }
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let n = signal.len().next_power_of_two();
    let mut x: Vec<f64> = signal.iter().map(|v| v - mean).collect();
    x.resize(n, 0.0);
    let len = n / SEGMENT_DIVISOR;
    let hop = len / 2;
    let window: Vec<f64> = (0..len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
        .collect();
    let wsq: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(len);
    let half = len / 2;
    let mut acc = vec![0.0; half];
    let mut segments = 0;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut start = 0;
    while start + len <= n {
        for i in 0..len {
            buf[i] = Complex64::new(x[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for k in 1..=half {
            acc[k - 1] += buf[k].norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let norm = t_rep / (wsq * segments as f64);
    let freqs = (1..=half)
        .map(|k| k as f64 / (len as f64 * t_rep))
        .collect();
    Ok((freqs, acc.into_iter().map(|v| v * norm).collect()))
}

#[derive(Debug, Clone, Serialize)]
pub struct PsdResult {
    pub tau_p: f64,
    pub fidelity: f64,
    /// False when the dwell time falls outside `[t_rep, N t_rep]`.
    pub reliable: bool,
    /// Log-binned spectrum used in the fit.
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
}

fn log_bins(freqs: &[f64]) -> Vec<Range<usize>> {
    let (lo, hi) = (freqs[0].ln(), freqs[freqs.len() - 1].ln());
    let step = (hi - lo) / LOG_BINS as f64;
    let mut bins = Vec::new();
    let mut start = 0;
    for b in 1..=LOG_BINS {
        let edge = if b == LOG_BINS {
            f64::INFINITY
        } else {
            lo + step * b as f64
        };
        let mut end = start;
        while end < freqs.len() && freqs[end].ln() <= edge {
            end += 1;
        }
        if end > start {
            bins.push(start..end);
            start = end;
        }
    }
    bins
}

/// Dwell time and contrast from a sequence of parity values (`±1`).
pub fn psd_extract(parities: &[f64], t_rep: f64) -> Result<PsdResult> {
    let (freqs, dens) = periodogram(parities, t_rep)?;
    let bins = log_bins(&freqs);
    let avg = |v: &[f64], r: &Range<usize>| v[r.clone()].iter().sum::<f64>() / r.len() as f64;
    let bf: Vec<f64> = bins.iter().map(|r| avg(&freqs, r)).collect();
    let bd: Vec<f64> = bins.iter().map(|r| avg(&dens, r)).collect();
    if bd.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::domain(
            "spectrum",
            "non-positive spectral density".to_string(),
        ));
    }
    let k = 3.min(bd.len());
    let plateau = bd[..k].iter().sum::<f64>() / k as f64;
    let floor = bd[bd.len() - k..].iter().sum::<f64>() / k as f64;
    let f2 = (1.0 - floor / t_rep).clamp(0.05, 0.99);
    let n = parities.len().next_power_of_two() as f64;
    let tau0 = ((plateau - (1.0 - f2) * t_rep) / f2).clamp(2.0 * t_rep, n * t_rep);
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let tau = p[0].exp();
        Ok(bins
            .iter()
            .zip(&bd)
            .map(|(r, d)| {
                let m = freqs[r.clone()]
                    .iter()
                    .map(|f| psd_model_sampled(*f, tau, p[1], t_rep))
                    .sum::<f64>()
                    / r.len() as f64;
                m.ln() - d.ln()
            })
            .collect())
    };
    let problem = FitProblem::new(residual, vec![tau0.ln(), f2.sqrt()]).with_bounds(
        vec![(1.05 * t_rep).ln(), 0.0],
        vec![(10.0 * n * t_rep).ln(), 1.0],
    );
    let report = least_squares(&problem, &LmOptions::default())?;
    if !report.converged {
        return Err(Error::NoConvergence("spectral fit"));
    }
    let tau_p = report.params[0].exp();
    Ok(PsdResult {
        tau_p,
        fidelity: report.params[1],
        reliable: tau_p >= t_rep && tau_p <= parities.len() as f64 * t_rep,
        frequencies: bf,
        density: bd.clone(),
    })
}
