use crate::{Error, Result};
use std::f64::consts::PI;

/// Populations `(P0, P1, P2)` after a time `t` in a three-level ladder
/// prepared in |2>, with decay rates 1->0, 2->1 and 2->0 (Hz).
pub fn qutrit_relaxation(g10: f64, g21: f64, g20: f64, t: f64) -> Result<(f64, f64, f64)> {
    if [g10, g21, g20]
        .iter()
        .any(|g| !(*g >= 0.0 && g.is_finite()))
        || !(t >= 0.0)
    {
        return Err(Error::domain(
            "qutrit relaxation",
            format!("rates ({g10}, {g21}, {g20}), t = {t}"),
        ));
    }
    let g2 = g21 + g20;
    let p2 = (-g2 * t).exp();
    // P1 = g21 (e^{-g10 t} - e^{-g2 t}) / (g2 - g10), factored around the
    // slower rate so nothing overflows
    let gap = (g2 - g10).abs();
    let growth = if gap == 0.0 {
        t
    } else {
        -(-gap * t).exp_m1() / gap
    };
    let p1 = g21 * (-g10.min(g2) * t).exp() * growth;
    let p0 = (1.0 - p1 - p2).max(0.0);
    Ok((p0, p1, p2))
}

/// Ramsey signal with parity-split frequencies `carrier ± delta_f/2` (GHz),
/// equal weight, exponential envelope; times in seconds.
pub fn ramsey_beating_detuned(
    delta_f: f64,
    carrier: f64,
    t2_star: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    if !(delta_f >= 0.0 && t2_star > 0.0 && carrier.is_finite()) {
        return Err(Error::domain(
            "ramsey",
            format!("delta_f = {delta_f}, T2* = {t2_star}"),
        ));
    }
    let half = 0.5 * delta_f * 1e9;
    let c = carrier * 1e9;
    Ok(times
        .iter()
        .map(|&t| {
            let env = (-t / t2_star).exp();
            0.5 * env * ((2.0 * PI * (c + half) * t).cos() + (2.0 * PI * (c - half) * t).cos())
        })
        .collect())
}

/// Ramsey beating with no carrier detuning.
pub fn ramsey_beating(delta_f: f64, t2_star: f64, times: &[f64]) -> Result<Vec<f64>> {
    ramsey_beating_detuned(delta_f, 0.0, t2_star, times)
}
