//! Single-instance property checks shared by the randomized suites and the
//! acceptance runner.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use super::oracle;
use super::recovery::Outcome;
use num_complex::Complex64;
use transmon_qp::device::DeviceModel;
use transmon_qp::field::interference_weights;
use transmon_qp::rates::{nups_rates, paps_rates, RateEnvironment};
use transmon_qp::specfun::*;
use transmon_qp::spectrum::{hamiltonian, TransmonParams};
use transmon_qp::steady::{effective_rates, generation_rates, residual, steady_densities};
use transmon_qp::telegraph::{
    hmm_fit, qutrit_relaxation, simulate_trace, EmissionModel, HmmOptions, TelegraphParams,
};
use transmon_qp::units::thermal_ghz;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Banded eigenvalues against a dense symmetric-embedding diagonalisation,
/// relative to the spectral radius.
pub fn banded_vs_dense(params: &TransmonParams, ng: f64, n_cut: usize) -> Outcome {
    let h = hamiltonian(params, ng, n_cut).map_err(text)?;
    let got = h.eigenvalues().map_err(text)?;
    let n = h.dim();
    let flat = h.to_dense();
    let rows: Vec<Vec<Complex64>> = flat.chunks(n).map(|r| r.to_vec()).collect();
    let want = oracle::hermitian_eigenvalues_dense(&rows);
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, (g, w)) in got.iter().zip(&want).enumerate() {
        ensure!(
            (g - w).abs() <= 1e-9 * scale,
            "level {i} of dim {n}: {g} vs {w}"
        );
    }
    Ok(())
}

pub fn bessel_matches_oracle(x: f64) -> Outcome {
    let (k0, k1) = bessel_k01_scaled(x).map_err(text)?;
    for (order, got, nu) in [(0, k0, 0.0), (1, k1, 1.0)] {
        let want = oracle::bessel_k_scaled(nu, x);
        ensure!(rel(got, want) <= 1e-8, "K{order}({x}): {got} vs {want}");
    }
    if x < 700.0 {
        let plain = bessel_k(BesselOrder::Zero, x).map_err(text)?;
        ensure!(
            rel(plain, k0 * (-x).exp()) <= 1e-12,
            "scaled and plain K0 disagree at {x}"
        );
    }
    Ok(())
}

pub fn elliptic_matches_oracle(k: f64) -> Outcome {
    let kk = elliptic_complete(EllipticKind::First, k).map_err(text)?;
    let ee = elliptic_complete(EllipticKind::Second, k).map_err(text)?;
    ensure!(rel(kk, oracle::elliptic_k(k)) <= 1e-8, "K({k}) = {kk}");
    ensure!(rel(ee, oracle::elliptic_e(k)) <= 1e-8, "E({k}) = {ee}");
    Ok(())
}

pub fn photon_kernel_matches_oracle(x: f64, z: f64) -> Outcome {
    let mut values = [0.0; 2];
    for (slot, (sign, plus)) in [(KernelSign::Plus, true), (KernelSign::Minus, false)]
        .into_iter()
        .enumerate()
    {
        let got = photon_kernel(PhotonKernelArgs::new(x, z, sign).map_err(text)?);
        let want = oracle::photon_kernel(x, z, plus);
        ensure!(
            (got - want).abs() <= 1e-8 * want.abs().max(1e-3),
            "S({x}, {z}, {sign:?}): {got} vs {want}"
        );
        values[slot] = got;
    }
    ensure!(
        values[0] >= values[1] && values[1] >= -1e-12,
        "kernel ordering violated at ({x}, {z}): {values:?}"
    );
    Ok(())
}

/// The three gap-exchange relations between rates out of the two electrodes,
/// compared in log space, plus non-negativity.
pub fn detailed_balance(env: &RateEnvironment) -> Outcome {
    let r = nups_rates(env).map_err(text)?;
    let p = paps_rates(env).map_err(text)?;
    let all = [
        r.g00_t, r.g10_t, r.g01_t, r.g00_b, r.g10_b, r.g01_b, p.g00_ph, p.g01_ph, p.g10_ph,
    ];
    ensure!(
        all.iter().all(|v| *v >= 0.0 && v.is_finite()),
        "negative or non-finite rate {all:?}"
    );
    let kt = thermal_ghz(env.temperature);
    let fdd = env.gaps.difference();
    let half_ln_ratio = 0.5 * (env.gaps.delta_b / env.gaps.delta_t).ln();
    let pairs = [
        ("keep", r.g00_b, r.g00_t, fdd / kt),
        ("excite", r.g01_b, r.g10_t, (fdd - env.f01) / kt),
        ("relax", r.g10_b, r.g01_t, (fdd + env.f01) / kt),
    ];
    for (name, from_b, from_t, exponent) in pairs {
        if from_b == 0.0 && from_t == 0.0 {
            continue;
        }
        let lhs = from_b.ln() - from_t.ln();
        let rhs = half_ln_ratio + exponent;
        ensure!(
            (lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0),
            "{name}: ln ratio {lhs} vs {rhs}"
        );
    }
    Ok(())
}

pub fn weights_sum_to_one(asymmetry0: f64, b_par: f64, b_phi_a: f64, b_phi_b: f64) -> Outcome {
    let w = interference_weights(asymmetry0, b_par, b_phi_a, b_phi_b);
    ensure!(
        w.gamma_plus + w.gamma_minus == 1.0,
        "weights {w:?} at {b_par} T"
    );
    ensure!(
        (0.0..=1.0).contains(&w.gamma_plus),
        "weight outside [0, 1]: {w:?}"
    );
    Ok(())
}

pub fn decomposition_exact(device: &DeviceModel, b_par: f64, temperature: f64, p1: f64) -> Outcome {
    let op = device.operating_point(b_par).map_err(text)?;
    let c = device.parity_rate(&op, temperature, p1).map_err(text)?;
    let sum = c.paps + c.qp01 + c.qp10 + c.qpii;
    ensure!(
        rel(1.0 / c.tau_p, sum) <= 1e-12,
        "1/tau {} vs sum {sum}",
        1.0 / c.tau_p
    );
    Ok(())
}

/// Full rate equations evaluated at the closed-form steady state:
/// `|dx_t/dt| <= 1e-3 g_eff` and `|dx_b/dt| <= 0.05 g_b`.
pub fn steady_state_residual(
    device: &DeviceModel,
    b_par: f64,
    temperature: f64,
    p1: f64,
) -> Outcome {
    let op = device.operating_point(b_par).map_err(text)?;
    let env = device.environment(&op, temperature);
    let nups = nups_rates(&env).map_err(text)?;
    let paps = paps_rates(&env).map_err(text)?;
    let traps = &device.traps;
    let gen = generation_rates(&env, traps, &paps, p1).map_err(text)?;
    let x = steady_densities(&nups, traps, &gen, p1, &env.gaps).map_err(text)?;
    let eff = effective_rates(&nups, traps, &gen, p1, &env.gaps).map_err(text)?;
    let (db, dt) = residual(&x, &nups, traps, &gen, p1, &env.gaps);
    ensure!(
        dt.abs() <= 1e-3 * eff.generation,
        "B = {b_par} T, T = {temperature} K, p1 = {p1}: |dx_t/dt| / g_eff = {:.2e}",
        dt.abs() / eff.generation
    );
    ensure!(
        db.abs() <= 0.05 * gen.g_b,
        "B = {b_par} T, T = {temperature} K, p1 = {p1}: |dx_b/dt| / g_b = {:.2e}",
        db.abs() / gen.g_b
    );
    Ok(())
}

pub fn qutrit_conserves_population(g10: f64, g21: f64, g20: f64, t: f64) -> Outcome {
    let (p0, p1, p2) = qutrit_relaxation(g10, g21, g20, t).map_err(text)?;
    for p in [p0, p1, p2] {
        ensure!((0.0..=1.0).contains(&p), "population {p} outside [0, 1]");
    }
    ensure!(
        (p0 + p1 + p2 - 1.0).abs() <= 4.0 * f64::EPSILON,
        "populations sum to {}",
        p0 + p1 + p2
    );
    Ok(())
}

/// Every EM pass must not lower the log-likelihood beyond rounding.
pub fn em_monotone(tau_even: f64, tau_odd: f64, n_shots: usize, seed: u64) -> Outcome {
    let t_rep = 80e-6;
    let params =
        TelegraphParams::from_dwell_times(tau_even, tau_odd, t_rep, n_shots).map_err(text)?;
    let trace = simulate_trace(&params, &EmissionModel::typical(), seed).map_err(text)?;
    let options = HmmOptions {
        fidelity_samples: 1000,
        ..HmmOptions::default()
    };
    let fit = hmm_fit(&trace, &options).map_err(text)?;
    for (i, w) in fit.log_likelihood.windows(2).enumerate() {
        ensure!(
            w[1] >= w[0] - 1e-9 * w[0].abs(),
            "pass {}: {} after {}",
            i + 1,
            w[1],
            w[0]
        );
    }
    Ok(())
}
