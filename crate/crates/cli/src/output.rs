use crate::failure::Failure;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Version plus the digest of whatever input drove the run.
pub fn provenance(input_key: &str, digest: &str) -> BTreeMap<String, String> {
    BTreeMap::from([
        (
            "tqp_version".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        ),
        (input_key.to_string(), digest.to_string()),
    ])
}

/// CSV with `# key: value` provenance lines before the header.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, provenance: &BTreeMap<String, String>) -> Result<(), Failure> {
        let mut text = String::new();
        for (k, v) in provenance {
            text += &format!("# {k}: {v}\n");
        }
        text += &self.header.join(",");
        text.push('\n');
        for row in &self.rows {
            text += &row.join(",");
            text.push('\n');
        }
        write_file(path, text.as_bytes())
    }
}

/// Shortest text that reads back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Serialize)]
struct WithProvenance<'a, T: Serialize> {
    provenance: &'a BTreeMap<String, String>,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with a `provenance` object; to stdout when `path` is None.
pub fn write_json<T: Serialize>(
    path: Option<&Path>,
    provenance: &BTreeMap<String, String>,
    body: &T,
) -> Result<(), Failure> {
    let doc = WithProvenance { provenance, body };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Failure::numeric(format!("cannot encode report: {e}")))?
        + "\n";
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}
