//! Deterministic file writers. Every file carries the library version and the
//! resolved configuration; CSV files as leading `#` lines, JSON files as
//! top-level fields.

use std::io::Write;
use std::path::{Path, PathBuf};

use aelim_core::numkernel::ComplexMatrix;
use aelim_core::C64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, VERSION};

pub type ComplexEntry = [f64; 2];

pub fn complex(z: C64) -> ComplexEntry {
    [z.re, z.im]
}

pub fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<ComplexEntry>> {
    (0..m.rows()).map(|i| m.row(i).iter().copied().map(complex).collect()).collect()
}

/// Eigenvalues sorted by real part, then imaginary part.
pub fn sorted_spectrum(mut ev: Vec<C64>) -> Vec<ComplexEntry> {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev.into_iter().map(complex).collect()
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: &'a T,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(contents).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e.error })?;
    Ok(())
}

pub fn output_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg
        .output
        .dir
        .clone()
        .ok_or_else(|| CliError::Config("output.dir: no output directory; pass --out or set output.dir".into()))?;
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

pub fn write_json<T: Serialize>(path: &Path, cfg: &RunConfig, body: &T) -> Result<(), CliError> {
    let env = Envelope { tool: "aelim", version: VERSION, config: cfg, body };
    let mut text = serde_json::to_string_pretty(&env)
        .map_err(|e| CliError::Config(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `# key: value` lines after the provenance header.
    #[serde(skip)]
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn to_csv(&self, cfg: &RunConfig) -> Result<String, CliError> {
        let config = serde_json::to_string(cfg).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let mut out = format!("# aelim {VERSION}\n# config: {config}\n");
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }
}

/// Shortest round-trip representation; `nan`/`inf` spelled out.
fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

#[derive(Serialize)]
struct JsonTable<'a> {
    notes: std::collections::BTreeMap<&'a str, &'a str>,
    #[serde(flatten)]
    table: &'a Table,
}

pub fn write_table(path: &Path, cfg: &RunConfig, table: &Table, format: crate::config::TableFormat) -> Result<(), CliError> {
    match format {
        crate::config::TableFormat::Csv => write_atomic(path, table.to_csv(cfg)?.as_bytes()),
        crate::config::TableFormat::Json => {
            let notes = table.notes.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
            write_json(path, cfg, &JsonTable { notes, table })
        }
    }
}
