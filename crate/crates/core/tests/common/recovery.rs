//! Generate noiseless data from known parameters, fit, compare.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use transmon_qp::dataset::{Dataset, Observation};
use transmon_qp::device::{DeviceModel, BRANCH_CROSSING_NG};
use transmon_qp::fit::recipes::*;
use transmon_qp::observables::{
    p1_fit_model, reference_p1_model, t1_vs_temperature, P1FitParams, P1Model, REFERENCE_P1,
};
use transmon_qp::spectrum::levels;

pub type Outcome = Result<(), String>;

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
    (a / b - 1.0).abs()
}

fn spectrum_rows(device: &DeviceModel, harmonics3: bool) -> Vec<Observation> {
    let mut rows = Vec::new();
    for &b in &[0.0, 0.1, 0.2, 0.25, 0.3, 0.4, 0.5] {
        let t = device.transmon_at(b).unwrap();
        let lv = levels(&t, BRANCH_CROSSING_NG, device.n_cut, 4).unwrap();
        rows.push(Observation::new("f01", lv.transition(0, 1), 1e-3).at_field(b));
        rows.push(Observation::new("f12", lv.transition(1, 2), 1e-3).at_field(b));
        rows.push(Observation::new("f02_half", 0.5 * lv.transition(0, 2), 1e-3).at_field(b));
        for (name, i, j) in [("df01", 0, 1), ("df12", 1, 2), ("df02", 0, 2)] {
            let d = device.splitting(b, i, j).unwrap();
            rows.push(Observation::new(name, d, 0.05 * d).at_field(b));
        }
        if harmonics3 {
            let d = device.splitting(b, 0, 3).unwrap();
            rows.push(Observation::new("df03", d, 0.05 * d).at_field(b));
            rows.push(Observation::new("f03", lv.transition(0, 3), 1e-3).at_field(b));
        }
    }
    // a flux arc at zero field
    for &phi in &[2.2, 2.6, 3.0] {
        let mut d = device.clone();
        d.flux = phi;
        let t = d.transmon_at(0.0).unwrap();
        let f = levels(&t, BRANCH_CROSSING_NG, d.n_cut, 2)
            .unwrap()
            .transition(0, 1);
        rows.push(Observation::new("f01", f, 1e-3).at_field(0.0).at_flux(phi));
    }
    rows
}

pub fn spectrum_three_harmonics() -> Outcome {
    let truth = DeviceModel::reference();
    let data = Dataset::from_rows(spectrum_rows(&truth, true));
    let mut start = truth.clone();
    start.ec *= 1.03;
    start.field.ej0_a *= 0.97;
    start.field.ej0_b *= 1.04;
    start.field.b_c *= 1.05;
    start.field.harmonic_ratios =
        transmon_qp::field::HarmonicRatios::new(vec![1.0, -0.012, 0.0]).unwrap();
    let fit = fit_spectrum(&data, &start, &SpectrumFitOptions::default()).map_err(text)?;
    ensure!(fit.report.converged, "spectrum fit did not converge");
    let got = [fit.ec, fit.ej0_a, fit.ej0_b, fit.c2, fit.c3, fit.b_c];
    let want = [0.3275, 19.47, 5.97, -0.009, 0.0003, 1.85];
    for (g, w) in got.iter().zip(&want) {
        ensure!(rel(*g, *w) < 5e-5, "spectrum: {g} vs {w}");
    }
    Ok(())
}

pub fn spectrum_two_harmonics() -> Outcome {
    let mut truth = DeviceModel::reference();
    truth.field.harmonic_ratios =
        transmon_qp::field::HarmonicRatios::new(vec![1.0, -0.009]).unwrap();
    let data = Dataset::from_rows(spectrum_rows(&truth, false));
    let mut start = truth.clone();
    start.ec *= 0.98;
    start.field.ej0_b *= 1.03;
    let fit = fit_spectrum(&data, &start, &SpectrumFitOptions { harmonics: 2 }).map_err(text)?;
    ensure!(fit.report.converged, "two-harmonic fit did not converge");
    ensure!(
        fit.c3 == 0.0,
        "third harmonic should stay zero, got {}",
        fit.c3
    );
    ensure!(
        rel(fit.ec, 0.3275) < 5e-5 && rel(fit.ej0_b, 5.97) < 5e-5,
        "two harmonics: ec {} ej0_b {}",
        fit.ec,
        fit.ej0_b
    );
    Ok(())
}

fn rate_rows(device: &DeviceModel) -> Vec<Observation> {
    let mut rows = Vec::new();
    for i in 0..9 {
        let b = -0.4 + 0.1 * i as f64;
        let op = device.operating_point(b).unwrap();
        let (pe, po) = P1Model::Fixed { p1: REFERENCE_P1 }
            .populations(0.007, op.f01)
            .unwrap();
        for (name, p1) in [("tau_even", pe), ("tau_odd", po)] {
            let tau = device.parity_rate(&op, BASE_TEMPERATURE, p1).unwrap().tau_p;
            rows.push(Observation::new(name, tau, 0.05 * tau).at_field(b));
        }
    }
    for &b in &[0.0, -0.13] {
        let op = device.operating_point(b).unwrap();
        let model = reference_p1_model(b).unwrap();
        for k in 0..8 {
            let t = 0.03 + 0.025 * k as f64;
            let (pe, po) = model.populations(t, op.f01).unwrap();
            for (name, p1) in [("tau_even", pe), ("tau_odd", po)] {
                let tau = device.parity_rate(&op, t, p1).unwrap().tau_p;
                rows.push(
                    Observation::new(name, tau, 0.05 * tau)
                        .at_field(b)
                        .at_temperature(t),
                );
            }
        }
    }
    rows
}

pub fn rates() -> Outcome {
    let truth = DeviceModel::reference();
    let data = Dataset::from_rows(rate_rows(&truth));
    let mut start = truth.clone();
    start.gaps = transmon_qp::rates::GapParams::from_difference(54.0, 7.0).unwrap();
    start.photon.f_nu = 125.0;
    start.photon.gamma_nu = 5e-9;
    start.traps.s_b = 10.0;
    start.traps.s_t = 10.0;
    let opts = RatesFitOptions {
        p1_field: P1Model::Fixed { p1: REFERENCE_P1 },
        p1_temperature: [0.0, -0.13]
            .iter()
            .map(|&b| (b, reference_p1_model(b).unwrap()))
            .collect(),
        resonance_margin: 0.01,
    };
    let fit = fit_rate_model(&data, &start, &opts).map_err(text)?;
    ensure!(
        rel(fit.gap_difference, 5.49) < 0.10,
        "gap difference {}",
        fit.gap_difference
    );
    ensure!(rel(fit.f_nu, 119.0) < 0.10, "photon frequency {}", fit.f_nu);
    ensure!(rel(fit.trapping, 3.23) < 0.30, "trapping {}", fit.trapping);
    ensure!(
        rel(fit.gamma_nu, 1.69e-8) < 0.30,
        "photon rate {}",
        fit.gamma_nu
    );
    // starting far above the qubit band still lands above it
    let mut far = start.clone();
    far.gaps = transmon_qp::rates::GapParams::from_difference(54.0, 20.0).map_err(text)?;
    let fit2 = fit_rate_model(&data, &far, &opts).map_err(text)?;
    ensure!(
        fit2.gap_difference > 5.47,
        "far start gap difference {}",
        fit2.gap_difference
    );
    Ok(())
}

pub fn p1() -> Outcome {
    let truth = P1FitParams { a: 0.034, b: 1.461 };
    let f01 = 5.46;
    let rows = (0..10)
        .map(|i| {
            let t = 0.02 + 0.02 * i as f64;
            Observation::new("p1_even", p1_fit_model(t, f01, &truth), 1e-3).at_temperature(t)
        })
        .collect();
    let fits = fit_p1(&Dataset::from_rows(rows), f01).map_err(text)?;
    ensure!(fits.odd.is_none(), "odd fit without odd rows");
    let p = fits.even.ok_or("missing even fit")?.params;
    ensure!(
        (p.a - truth.a).abs() < 1e-8 && (p.b - truth.b).abs() < 1e-7,
        "p1: {p:?}"
    );
    Ok(())
}

pub fn t1() -> Outcome {
    let device = DeviceModel::reference();
    let op = device.operating_point(0.0).unwrap();
    let env = device.environment(&op, 0.01);
    let gamma = 140e3;
    let rows = (0..12)
        .map(|i| {
            let t = 0.01 + 0.02 * i as f64;
            let t1 = t1_vs_temperature(t, gamma, &env).unwrap().t1;
            Observation::new("t1", t1, 0.02 * t1)
                .at_temperature(t)
                .at_field(0.0)
        })
        .collect();
    let fit = fit_t1(&Dataset::from_rows(rows), &device).map_err(text)?;
    ensure!(
        rel(fit.gamma10_ee, gamma) < 1e-3,
        "T1 rate {}",
        fit.gamma10_ee
    );
    Ok(())
}
