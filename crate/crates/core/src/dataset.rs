//! Measurement tables for the fit recipes.
//!
//! CSV with a header row naming the columns. `observable`, `value` and
//! `sigma` are required, plus at least one of `b_par_tesla` or
//! `temp_kelvin`; `flux` (radians) is optional. Empty cells mean "not
//! given". Lines starting with `#` are comments.

use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const COLUMNS: [&str; 6] = [
    "observable",
    "value",
    "sigma",
    "b_par_tesla",
    "temp_kelvin",
    "flux",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub observable: String,
    pub value: f64,
    pub sigma: f64,
    pub b_par: Option<f64>,
    pub temperature: Option<f64>,
    pub flux: Option<f64>,
    /// 1-based line in the source file.
    pub line: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub source: String,
    pub rows: Vec<Observation>,
}

impl Dataset {
    pub fn from_rows(rows: Vec<Observation>) -> Self {
        Self {
            source: "<memory>".into(),
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn extend(&mut self, other: Dataset) {
        self.rows.extend(other.rows);
    }

    pub fn with_observable<'a>(
        &'a self,
        name: &'a str,
    ) -> impl Iterator<Item = &'a Observation> + 'a {
        self.rows.iter().filter(move |r| r.observable == name)
    }

    /// Error pointing at the offending row.
    pub fn row_error(&self, row: &Observation, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.source.clone(),
            line: row.line,
            message: message.into(),
        }
    }
}

impl Observation {
    pub fn new(observable: &str, value: f64, sigma: f64) -> Self {
        Self {
            observable: observable.to_string(),
            value,
            sigma,
            b_par: None,
            temperature: None,
            flux: None,
            line: 0,
        }
    }

    pub fn at_field(mut self, b_par: f64) -> Self {
        self.b_par = Some(b_par);
        self
    }

    pub fn at_temperature(mut self, temperature: f64) -> Self {
        self.temperature = Some(temperature);
        self
    }

    pub fn at_flux(mut self, flux: f64) -> Self {
        self.flux = Some(flux);
        self
    }
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, &source)
}

pub fn parse_dataset(text: &str, source: &str) -> Result<Dataset> {
    // strip comments up front, remembering where each kept line came from
    let mut kept = String::with_capacity(text.len());
    let mut origin = vec![0u64];
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') || line.trim().is_empty() {
            continue;
        }
        kept.push_str(line);
        kept.push('\n');
        origin.push(i as u64 + 1);
    }
    let source_line = |l: u64| origin.get(l as usize).copied().unwrap_or(0);
    let fail = |line: u64, message: String| Error::Format {
        path: source.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(kept.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| fail(source_line(1), e.to_string()))?
        .clone();
    let header_line = source_line(1);
    let mut index = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        if !COLUMNS.contains(&h) {
            return Err(fail(header_line, format!("unknown column `{h}`")));
        }
        if index.insert(h.to_string(), i).is_some() {
            return Err(fail(header_line, format!("duplicate column `{h}`")));
        }
    }
    for required in &COLUMNS[..3] {
        if !index.contains_key(*required) {
            return Err(fail(header_line, format!("missing column `{required}`")));
        }
    }
    if !index.contains_key("b_par_tesla") && !index.contains_key("temp_kelvin") {
        return Err(fail(
            header_line,
            "need a `b_par_tesla` or `temp_kelvin` column".into(),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| source_line(p.line())).unwrap_or(0);
            fail(line, e.to_string())
        })?;
        let line = record
            .position()
            .map(|p| source_line(p.line()))
            .unwrap_or(0);
        let cell = |name: &str| {
            index
                .get(name)
                .and_then(|&i| record.get(i))
                .filter(|s| !s.is_empty())
        };
        let number = |name: &str| -> Result<Option<f64>> {
            match cell(name) {
                None => Ok(None),
                Some(raw) => {
                    let v: f64 = raw
                        .parse()
                        .map_err(|_| fail(line, format!("{name} `{raw}` is not a number")))?;
                    if v.is_finite() {
                        Ok(Some(v))
                    } else {
                        Err(fail(line, format!("{name} is not finite")))
                    }
                }
            }
        };
        let observable = cell("observable").ok_or_else(|| fail(line, "empty observable".into()))?;
        let value = number("value")?.ok_or_else(|| fail(line, "empty value".into()))?;
        let sigma = number("sigma")?.ok_or_else(|| fail(line, "empty sigma".into()))?;
        if !(sigma > 0.0) {
            return Err(fail(line, format!("sigma {sigma} must be positive")));
        }
        let b_par = number("b_par_tesla")?;
        let temperature = number("temp_kelvin")?;
        if b_par.is_none() && temperature.is_none() {
            return Err(fail(line, "row has neither field nor temperature".into()));
        }
        if temperature.is_some_and(|t| t <= 0.0) {
            return Err(fail(line, "temperature must be positive".into()));
        }
        rows.push(Observation {
            observable: observable.to_string(),
            value,
            sigma,
            b_par,
            temperature,
            flux: number("flux")?,
            line,
        });
    }
    Ok(Dataset {
        source: source.to_string(),
        rows,
    })
}

/// Write rows with every column present; `comments` become leading `#` lines.
pub fn write_dataset(path: &Path, rows: &[Observation], comments: &[String]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{}", COLUMNS.join(","))?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{:?},{:?},{},{},{}",
            r.observable,
            r.value,
            r.sigma,
            opt(r.b_par),
            opt(r.temperature),
            opt(r.flux)
        )?;
    }
    out.flush()?;
    Ok(())
}
