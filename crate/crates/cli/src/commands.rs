use crate::config::{check_grid, Loaded};
use crate::failure::{Failure, Kind};
use crate::output::{num, provenance, sha256_hex, write_json, Table};
use serde::Serialize;
use std::path::{Path, PathBuf};
use transmon_qp::dataset::{read_dataset, Dataset};
use transmon_qp::device::DeviceModel;
use transmon_qp::fit::recipes::*;
use transmon_qp::observables::sweep as run_sweep;
use transmon_qp::spectrum::{levels, parity_splitting};
use transmon_qp::telegraph::*;

const CONFIG_KEY: &str = "config_sha256";

fn section<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
    value
        .as_ref()
        .ok_or_else(|| Failure::usage(format!("config has no `{name}` section")))
}

const SPLIT_PAIRS: [(usize, usize); 4] = [(0, 1), (0, 2), (1, 2), (0, 3)];

pub fn spectrum(loaded: &Loaded, out: &Path) -> Result<(), Failure> {
    let device = &loaded.config.device;
    let grid = section(&loaded.config.spectrum, "spectrum")?;
    let fluxes = grid.fluxes.clone().unwrap_or_else(|| vec![device.flux]);
    check_grid("spectrum.fields", &grid.fields)?;
    check_grid("spectrum.fluxes", &fluxes)?;
    check_grid("spectrum.offset_charges", &grid.offset_charges)?;
    let mut table = Table::new(vec![
        "b_par_tesla",
        "flux",
        "ng",
        "f01",
        "f02_half",
        "f12",
        "f03",
        "df01",
        "df02",
        "df12",
        "df03",
    ]);
    for &b in &grid.fields {
        for &phi in &fluxes {
            let model = DeviceModel {
                flux: phi,
                ..device.clone()
            };
            let transmon = model.transmon_at(b)?;
            let mut splits = Vec::with_capacity(SPLIT_PAIRS.len());
            for (i, j) in SPLIT_PAIRS {
                splits.push(parity_splitting(&transmon, model.n_cut, i, j)?);
            }
            for &ng in &grid.offset_charges {
                let s = levels(&transmon, ng, model.n_cut, 4)?;
                let mut row = vec![
                    num(b),
                    num(phi),
                    num(ng),
                    num(s.transition(0, 1)),
                    num(0.5 * s.transition(0, 2)),
                    num(s.transition(1, 2)),
                    num(s.transition(0, 3)),
                ];
                row.extend(splits.iter().map(|v| num(*v)));
                table.push(row);
            }
        }
    }
    table.write(out, &provenance(CONFIG_KEY, &loaded.sha256))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Assignment {
    Even,
    Odd,
}

pub fn sweep(
    loaded: &Loaded,
    out: &Path,
    jobs: usize,
    assignment: Assignment,
) -> Result<(), Failure> {
    let config = section(&loaded.config.sweep, "sweep")?;
    check_grid("sweep.values", &config.values)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::usage(format!("worker pool: {e}")))?;
    let result = pool.install(|| run_sweep(&loaded.config.device, config))?;
    for f in &result.failures {
        eprintln!("tqp: warning: point {} skipped: {}", f.axis, f.message);
    }
    if result.points.is_empty() {
        return Err(Failure::numeric("every sweep point failed"));
    }
    let mut table = Table::new(vec![
        "axis",
        "tau_p_even",
        "tau_p_odd",
        "paps",
        "qp01",
        "qp10",
        "qpii",
        "x_b",
        "x_t",
        "f01",
        "p1_even",
        "p1_odd",
    ]);
    for p in &result.points {
        let c = match assignment {
            Assignment::Even => &p.even,
            Assignment::Odd => &p.odd,
        };
        table.push(vec![
            num(p.axis),
            num(p.even.tau_p),
            num(p.odd.tau_p),
            num(c.paps),
            num(c.qp01),
            num(c.qp10),
            num(c.qpii),
            num(c.densities.x_b),
            num(c.densities.x_t),
            num(p.f01),
            num(p.p1_even),
            num(p.p1_odd),
        ]);
    }
    let mut prov = provenance(CONFIG_KEY, &loaded.sha256);
    let axis = serde_json::to_value(config.axis).expect("axis serializes");
    prov.insert("axis".into(), axis.as_str().unwrap_or_default().into());
    prov.insert(
        "contributions".into(),
        format!("{assignment:?}").to_lowercase(),
    );
    table.write(out, &prov)
}

pub fn simulate(loaded: &Loaded, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let t = section(&loaded.config.telegraph, "telegraph")?;
    let params = TelegraphParams::from_dwell_times(t.tau_even, t.tau_odd, t.t_rep, t.n_shots)?;
    t.emission.validate()?;
    let trace = simulate_trace(&params, &t.emission, seed.unwrap_or(t.seed))?;
    write_trace(&trace, out, &provenance(CONFIG_KEY, &loaded.sha256))?;
    Ok(())
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    n_shots: usize,
    t_rep: f64,
    hmm: &'a HmmResult,
    psd: &'a PsdResult,
    /// Parity readout fidelity of the fitted model.
    fidelity: f64,
    viterbi_switches: usize,
}

pub fn analyze(trace_path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let trace = read_trace(trace_path)?;
    let digest = sha256_hex(&std::fs::read(trace_path)?);
    let hmm = hmm_fit(&trace, &HmmOptions::default())?;
    let switches = switch_count(&viterbi_path(&trace, &hmm.model));
    let psd = psd_extract(&parity_signal(&classify_shots(&trace)), trace.t_rep)?;
    if !psd.reliable {
        eprintln!(
            "tqp: warning: spectral dwell time {} s lies outside the resolvable range",
            psd.tau_p
        );
    }
    let report = AnalyzeReport {
        n_shots: trace.len(),
        t_rep: trace.t_rep,
        hmm: &hmm,
        psd: &psd,
        fidelity: hmm.fidelity,
        viterbi_switches: switches,
    };
    write_json(out, &provenance("trace_sha256", &digest), &report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Recipe {
    Spectrum,
    Rates,
    P1,
    T1,
}

#[derive(Serialize)]
struct FitOutput<T: Serialize> {
    recipe: &'static str,
    converged: bool,
    data_files: Vec<String>,
    fit: T,
    /// Start device with the fitted values substituted.
    #[serde(skip_serializing_if = "Option::is_none")]
    device: Option<DeviceModel>,
}

pub fn fit(
    loaded: &Loaded,
    recipe: Recipe,
    data_paths: &[PathBuf],
    out: Option<&Path>,
) -> Result<(), Failure> {
    let mut data = Dataset::default();
    for p in data_paths {
        if !p.is_file() {
            return Err(Failure::usage(format!(
                "data file {} not found",
                p.display()
            )));
        }
        data.extend(read_dataset(p)?);
    }
    let device = &loaded.config.device;
    let opts = &loaded.config.fit;
    let files = data_paths.iter().map(|p| p.display().to_string()).collect();
    let prov = provenance(CONFIG_KEY, &loaded.sha256);
    let converged = match recipe {
        Recipe::Spectrum => {
            let options = SpectrumFitOptions {
                harmonics: opts.harmonics,
            };
            let fit = fit_spectrum(&data, device, &options)?;
            let converged = fit.report.converged;
            let doc = FitOutput {
                recipe: "spectrum",
                converged,
                data_files: files,
                device: Some(fit.apply(device)?),
                fit,
            };
            write_json(out, &prov, &doc)?;
            converged
        }
        Recipe::Rates => {
            let options = RatesFitOptions {
                p1_field: opts.p1_field,
                p1_temperature: opts
                    .p1_temperature
                    .iter()
                    .map(|t| (t.b_par, t.model))
                    .collect(),
                resonance_margin: opts.resonance_margin,
            };
            let fit = fit_rate_model(&data, device, &options)?;
            for w in &fit.warnings {
                eprintln!("tqp: warning: {w}");
            }
            let converged = fit.report.converged;
            let doc = FitOutput {
                recipe: "rates",
                converged,
                data_files: files,
                device: Some(fit.apply(device)?),
                fit,
            };
            write_json(out, &prov, &doc)?;
            converged
        }
        Recipe::P1 => {
            let f01 = device.operating_point(opts.b_par)?.f01;
            let fit = fit_p1(&data, f01)?;
            let converged = [&fit.even, &fit.odd]
                .iter()
                .all(|f| f.as_ref().map_or(true, |f| f.report.converged));
            let doc = FitOutput {
                recipe: "p1",
                converged,
                data_files: files,
                device: None,
                fit,
            };
            write_json(out, &prov, &doc)?;
            converged
        }
        Recipe::T1 => {
            let fit = fit_t1(&data, device)?;
            let converged = fit.report.converged;
            let doc = FitOutput {
                recipe: "t1",
                converged,
                data_files: files,
                device: None,
                fit,
            };
            write_json(out, &prov, &doc)?;
            converged
        }
    };
    if converged {
        Ok(())
    } else {
        Err(Failure {
            kind: Kind::NotConverged,
            message: "fit did not converge; report written".into(),
        })
    }
}
