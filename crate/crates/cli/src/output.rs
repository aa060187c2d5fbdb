use std::path::Path;

use serde::Serialize;

use crate::args::RunManifest;
use crate::CliError;

#[derive(Serialize)]
struct Versions {
    hyperlangevin: &'static str,
    #[serde(rename = "hyperlangevin-cli")]
    cli: &'static str,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    manifest: &'a RunManifest,
    results: T,
    versions: Versions,
}

pub fn json_bytes<T: Serialize>(manifest: &RunManifest, results: T) -> Result<Vec<u8>, CliError> {
    let report = Report {
        manifest,
        results,
        versions: Versions {
            hyperlangevin: hyperlangevin::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
        },
    };
    let mut out = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn csv_bytes<I>(header: &[&str], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Shortest round-trip formatting, so output is byte-stable across runs;
/// scientific notation outside `[1e-5, 1e16)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
