//! Writes the bundled synthetic tables under `data/` from the reference
//! device with fixed seeds, and the device itself to
//! `configs/reference.json`. Run from the workspace root:
//!
//!     cargo run -p transmon-qp --example make_datasets

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::path::Path;
use transmon_qp::dataset::{write_dataset, Observation};
use transmon_qp::device::{DeviceModel, BRANCH_CROSSING_NG};
use transmon_qp::fit::recipes::BASE_TEMPERATURE;
use transmon_qp::observables::{
    p1_fit_model, reference_p1_model, t1_vs_temperature, P1Model, REFERENCE_P1,
};
use transmon_qp::spectrum::levels;

const FIELDS: [f64; 11] = [
    -0.41, -0.34, -0.28, -0.23, -0.13, 0.0, 0.13, 0.23, 0.28, 0.34, 0.41,
];

struct Noise(ChaCha8Rng);

impl Noise {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// `value` plus Gaussian noise of width `sigma`, as an observation.
    fn obs(&mut self, name: &str, value: f64, sigma: f64) -> Observation {
        let z: f64 = StandardNormal.sample(&mut self.0);
        Observation::new(name, value + sigma * z, sigma)
    }
}

fn spectrum(device: &DeviceModel) -> Vec<Observation> {
    let mut n = Noise::new(11);
    let mut rows = Vec::new();
    for &b in &[0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5] {
        let t = device.transmon_at(b).unwrap();
        let s = levels(&t, BRANCH_CROSSING_NG, device.n_cut, 4).unwrap();
        rows.push(n.obs("f01", s.transition(0, 1), 1e-3).at_field(b));
        rows.push(n.obs("f12", s.transition(1, 2), 1e-3).at_field(b));
        rows.push(
            n.obs("f02_half", 0.5 * s.transition(0, 2), 1e-3)
                .at_field(b),
        );
        rows.push(n.obs("f03", s.transition(0, 3), 3e-3).at_field(b));
        for (name, i, j) in [
            ("df01", 0, 1),
            ("df02", 0, 2),
            ("df12", 1, 2),
            ("df03", 0, 3),
        ] {
            let d = device.splitting(b, i, j).unwrap();
            rows.push(n.obs(name, d, 0.05 * d).at_field(b));
        }
    }
    for &phi in &[2.4, 2.7, 3.0] {
        let d = DeviceModel {
            flux: phi,
            ..device.clone()
        };
        let t = d.transmon_at(0.0).unwrap();
        let f = levels(&t, BRANCH_CROSSING_NG, d.n_cut, 2)
            .unwrap()
            .transition(0, 1);
        rows.push(n.obs("f01", f, 1e-3).at_field(0.0).at_flux(phi));
    }
    rows
}

fn parity(device: &DeviceModel) -> Vec<Observation> {
    let mut n = Noise::new(12);
    let mut rows = Vec::new();
    let fixed = P1Model::Fixed { p1: REFERENCE_P1 };
    for &b in &FIELDS {
        let op = device.operating_point(b).unwrap();
        let (pe, po) = fixed.populations(BASE_TEMPERATURE, op.f01).unwrap();
        for (name, p1) in [("tau_even", pe), ("tau_odd", po)] {
            let tau = device.parity_rate(&op, BASE_TEMPERATURE, p1).unwrap().tau_p;
            rows.push(n.obs(name, tau, 0.05 * tau).at_field(b));
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
                rows.push(n.obs(name, tau, 0.05 * tau).at_field(b).at_temperature(t));
            }
        }
    }
    rows
}

fn populations(device: &DeviceModel) -> Vec<Observation> {
    let mut n = Noise::new(13);
    let f01 = device.operating_point(0.0).unwrap().f01;
    let Some(P1Model::Fit { even, odd }) = reference_p1_model(0.0) else {
        unreachable!("zero field is tabulated")
    };
    let mut rows = Vec::new();
    for k in 0..12 {
        let t = 0.02 + 0.02 * k as f64;
        for (name, p) in [("p1_even", &even), ("p1_odd", &odd)] {
            rows.push(
                n.obs(name, p1_fit_model(t, f01, p), 2e-3)
                    .at_temperature(t)
                    .at_field(0.0),
            );
        }
    }
    rows
}

fn relaxation(device: &DeviceModel) -> Vec<Observation> {
    let mut n = Noise::new(14);
    let op = device.operating_point(0.0).unwrap();
    let gamma = 1.0 / 7.0e-6;
    (0..12)
        .map(|k| {
            let t = 0.02 + 0.02 * k as f64;
            let env = device.environment(&op, t);
            let t1 = t1_vs_temperature(t, gamma, &env).unwrap().t1;
            n.obs("t1", t1, 0.03 * t1).at_temperature(t).at_field(0.0)
        })
        .collect()
}

fn main() {
    let device = DeviceModel::reference();
    let dir = Path::new("data");
    std::fs::create_dir_all(dir).unwrap();
    let note = |what: &str, seed: u64| {
        vec![
            format!("synthetic {what} from the reference device"),
            format!("Gaussian noise of width sigma, ChaCha8 seed {seed}"),
        ]
    };
    let sets = [
        ("spectrum.csv", spectrum(&device), note("spectroscopy", 11)),
        (
            "parity_lifetimes.csv",
            parity(&device),
            note("parity lifetimes", 12),
        ),
        (
            "p1.csv",
            populations(&device),
            note("excited populations", 13),
        ),
        ("t1.csv", relaxation(&device), note("relaxation times", 14)),
    ];
    for (name, rows, comments) in sets {
        write_dataset(&dir.join(name), &rows, &comments).unwrap();
        println!("{name}: {} rows", rows.len());
    }
    let config = serde_json::json!({ "device": device });
    std::fs::write(
        "configs/reference.json",
        serde_json::to_string_pretty(&config).unwrap() + "\n",
    )
    .unwrap();
}
