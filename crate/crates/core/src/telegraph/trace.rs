use super::{EmissionModel, Gaussian2, Parity, TelegraphParams};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const TRACE_HEADER: &str = "i_volts,q_volts";

/// Measured IQ points, one per repetition, with the calibration clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotTrace {
    pub iq: Vec<[f64; 2]>,
    pub t_rep: f64,
    pub calibration: [Gaussian2; 3],
    pub seed: Option<u64>,
}

impl ShotTrace {
    pub fn validate(&self) -> Result<()> {
        if self.iq.is_empty() {
            return Err(Error::domain("trace", "no shots".to_string()));
        }
        if !(self.t_rep > 0.0 && self.t_rep.is_finite()) {
            return Err(Error::domain(
                "t_rep",
                format!("{} must be positive", self.t_rep),
            ));
        }
        for g in &self.calibration {
            g.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.iq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iq.is_empty()
    }
}

/// A synthetic trace together with its hidden variables.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub trace: ShotTrace,
    pub parities: Vec<Parity>,
    pub states: Vec<u8>,
}

/// Draw a trace: the parity follows a two-state Markov chain started from its
/// stationary distribution, each shot picks a transmon state from the parity's
/// mixture and then an IQ point from that state's cluster.
pub fn simulate(
    params: &TelegraphParams,
    emission: &EmissionModel,
    seed: u64,
) -> Result<Simulation> {
    params.validate()?;
    emission.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [p_eo, p_oe] = params.switch_probabilities();
    let p_even = if p_eo + p_oe > 0.0 {
        p_oe / (p_eo + p_oe)
    } else {
        1.0
    };
    let mut parity = if rng.gen::<f64>() < p_even {
        Parity::Even
    } else {
        Parity::Odd
    };
    let n = params.n_shots;
    let mut iq = Vec::with_capacity(n);
    let mut parities = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    for t in 0..n {
        if t > 0 {
            let p = match parity {
                Parity::Even => p_eo,
                Parity::Odd => p_oe,
            };
            if rng.gen::<f64>() < p {
                parity = match parity {
                    Parity::Even => Parity::Odd,
                    Parity::Odd => Parity::Even,
                };
            }
        }
        let w = emission.weights(parity);
        let u: f64 = rng.gen();
        let k = if u < w[0] {
            0
        } else if u < w[0] + w[1] {
            1
        } else {
            2
        };
        iq.push(emission.states[k].sample(&mut rng));
        parities.push(parity);
        states.push(k as u8);
    }
    Ok(Simulation {
        trace: ShotTrace {
            iq,
            t_rep: params.t_rep,
            calibration: emission.states,
            seed: Some(seed),
        },
        parities,
        states,
    })
}

pub fn simulate_trace(
    params: &TelegraphParams,
    emission: &EmissionModel,
    seed: u64,
) -> Result<ShotTrace> {
    simulate(params, emission, seed).map(|s| s.trace)
}

/// JSON document stored next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSidecar {
    pub t_rep: f64,
    pub calibration: [Gaussian2; 3],
    #[serde(default)]
    pub seed: Option<u64>,
    pub n_shots: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Write `path` (CSV) and its `.json` sidecar. Provenance entries become
/// leading `#` comment lines and a sidecar field.
pub fn write_trace(
    trace: &ShotTrace,
    path: &Path,
    provenance: &BTreeMap<String, String>,
) -> Result<()> {
    trace.validate()?;
    let sidecar = TraceSidecar {
        t_rep: trace.t_rep,
        calibration: trace.calibration,
        seed: trace.seed,
        n_shots: trace.iq.len(),
        provenance: provenance.clone(),
    };
    std::fs::write(
        sidecar_path(path),
        serde_json::to_string_pretty(&sidecar)? + "\n",
    )?;
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    for (k, v) in provenance {
        writeln!(out, "# {k}: {v}")?;
    }
    writeln!(out, "{TRACE_HEADER}")?;
    for p in &trace.iq {
        // Debug formatting is the shortest string that parses back exactly
        writeln!(out, "{:?},{:?}", p[0], p[1])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<ShotTrace> {
    let side = sidecar_path(path);
    let fmt = |p: &Path, line: u64, message: String| Error::Format {
        path: p.display().to_string(),
        line,
        message,
    };
    let text = std::fs::read_to_string(&side)?;
    let sidecar: TraceSidecar =
        serde_json::from_str(&text).map_err(|e| fmt(&side, e.line() as u64, e.to_string()))?;
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut iq = Vec::with_capacity(sidecar.n_shots);
    let mut header_seen = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let no = idx as u64 + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        if !header_seen {
            if body != TRACE_HEADER {
                return Err(fmt(
                    path,
                    no,
                    format!("expected header `{TRACE_HEADER}`, found `{body}`"),
                ));
            }
            header_seen = true;
            continue;
        }
        let mut fields = body.split(',');
        let mut next = |name: &str| -> Result<f64> {
            let raw = fields
                .next()
                .ok_or_else(|| fmt(path, no, format!("missing {name}")))?;
            let v: f64 = raw
                .trim()
                .parse()
                .map_err(|_| fmt(path, no, format!("{name} `{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(fmt(path, no, format!("{name} is not finite")));
            }
            Ok(v)
        };
        let i = next("i_volts")?;
        let q = next("q_volts")?;
        if fields.next().is_some() {
            return Err(fmt(path, no, "expected exactly two columns".to_string()));
        }
        iq.push([i, q]);
    }
    if !header_seen {
        return Err(fmt(path, 1, format!("missing header `{TRACE_HEADER}`")));
    }
    if iq.len() != sidecar.n_shots {
        return Err(fmt(
            path,
            0,
            format!(
                "sidecar announces {} shots, file has {}",
                sidecar.n_shots,
                iq.len()
            ),
        ));
    }
    let trace = ShotTrace {
        iq,
        t_rep: sidecar.t_rep,
        calibration: sidecar.calibration,
        seed: sidecar.seed,
    };
    trace.validate().map_err(|e| fmt(&side, 0, e.to_string()))?;
    Ok(trace)
}
