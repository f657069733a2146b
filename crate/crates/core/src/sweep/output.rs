//! CSV/JSON data files with `.meta` provenance sidecars.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};
use thiserror::Error;

use super::SweepTable;
use crate::model::ValidatedSystem;
use crate::scattering::Probabilities;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One probability column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Tp,
    Rp,
    TpBar,
    RpBar,
    T,
}

impl Quantity {
    pub const ALL: [Quantity; 5] =
        [Quantity::Tp, Quantity::Rp, Quantity::TpBar, Quantity::RpBar, Quantity::T];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Tp => "T_p",
            Quantity::Rp => "R_p",
            Quantity::TpBar => "T_pbar",
            Quantity::RpBar => "R_pbar",
            Quantity::T => "T",
        }
    }

    pub fn pick(self, p: &Probabilities) -> f64 {
        match self {
            Quantity::Tp => p.t_p,
            Quantity::Rp => p.r_p,
            Quantity::TpBar => p.t_pbar,
            Quantity::RpBar => p.r_pbar,
            Quantity::T => p.transfer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

/// Ordered `key = value` provenance entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn remove(&mut self, key: &str) {
        self.entries.retain(|(k, _)| k != key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Every parameter of a validated system, in config-file vocabulary.
    pub fn for_system(system: &ValidatedSystem) -> Self {
        let mut m = Self::default();
        let c = &system.couplings;
        m.push("gamma_ar", c.gamma_ar());
        m.push("gamma_al", c.gamma_al());
        m.push("gamma_br", c.gamma_br());
        m.push("gamma_bl", c.gamma_bl());
        if let Some(e) = system.emitter {
            m.push("omega_2", e.omega_2());
            m.push("omega_3", e.omega_3());
        }
        if let Some(w) = system.cavity.omega_a() {
            m.push("omega_a", w);
        }
        m.push("lambda", system.cavity.lambda());
        m.push("n", system.cavity.n());
        m.push("Delta_a", system.detuning_a);
        m
    }

    /// Sidecar text: tool version, optional generation time, then entries.
    pub fn render(&self, generated: Option<u64>) -> String {
        let mut out = format!("tool = {} {}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
        if let Some(t) = generated {
            out.push_str(&format!("generated_unix = {t}\n"));
        }
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Shortest round-trip text for a number; scientific outside [1e-5, 1e16).
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A rectangular block of named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataFile {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn from_table(table: &SweepTable, quantities: &[Quantity]) -> Self {
        let mut columns: Vec<String> = table.axis_names.iter().map(|s| s.to_string()).collect();
        columns.extend(quantities.iter().map(|q| q.name().to_string()));
        let naxes = table.axis_names.len();
        let rows = table
            .rows
            .iter()
            .map(|r| {
                let mut row = r.axes[..naxes].to_vec();
                row.extend(quantities.iter().map(|q| q.pick(&r.probs)));
                row
            })
            .collect();
        Self { columns, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects keyed by column name.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().cloned().zip(row.iter().map(|v| Value::from(*v))).collect();
                Value::Object(obj)
            })
            .collect();
        let mut text = serde_json::to_string(&Value::Array(rows)).expect("JSON rendering");
        text.push('\n');
        text
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), OutputError> {
    fs::write(path, text).map_err(|source| OutputError::Io { path: path.display().to_string(), source })
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Writes `<data path stem>.meta` next to a data file.
pub fn write_meta(data_path: &Path, metadata: &Metadata) -> Result<PathBuf, OutputError> {
    let path = data_path.with_extension("meta");
    write_file(&path, &metadata.render(Some(now_unix())))?;
    Ok(path)
}

/// Writes `dir/basename.<ext>` and its sidecar; returns both paths.
pub fn write_data(
    dir: &Path,
    basename: &str,
    format: Format,
    data: &DataFile,
    metadata: &Metadata,
) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.display().to_string(), source })?;
    let path = dir.join(format!("{basename}.{}", format.extension()));
    write_file(&path, &data.render(format))?;
    let meta = write_meta(&path, metadata)?;
    Ok(vec![path, meta])
}

/// Writes a sweep table with the chosen probability columns.
pub fn write_table(
    table: &SweepTable,
    dir: &Path,
    basename: &str,
    format: Format,
    quantities: &[Quantity],
) -> Result<Vec<PathBuf>, OutputError> {
    write_data(dir, basename, format, &DataFile::from_table(table, quantities), &table.metadata)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_round_trips() {
        for v in [0.0, 1.0, -0.5, 0.1 + 0.2, 1e-20, 3.5e-7, 6.02e23, 12345.678] {
            let s = fmt_num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_num(1e-20), "1e-20");
        assert_eq!(fmt_num(0.25), "0.25");
    }

    #[test]
    fn csv_and_json_rendering() {
        let mut d = DataFile::new(&["Delta_k", "T_p"]);
        d.rows.push(vec![-1.0, 0.5]);
        d.rows.push(vec![0.0, 1.0]);
        assert_eq!(d.to_csv(), "Delta_k,T_p\n-1,0.5\n0,1\n");
        let v: Value = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(v[0]["T_p"], 0.5);
        assert_eq!(v[1]["Delta_k"], 0.0);
    }

    #[test]
    fn files_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut d = DataFile::new(&["x"]);
        d.rows.push(vec![1.0]);
        let mut meta = Metadata::default();
        meta.push("lambda", 1.0);
        let paths = write_data(dir.path(), "curve", Format::Csv, &d, &meta).unwrap();
        assert!(paths[0].ends_with("curve.csv") && paths[1].ends_with("curve.meta"));
        let side = fs::read_to_string(&paths[1]).unwrap();
        assert!(side.starts_with("tool = photon-router"));
        assert!(side.contains("lambda = 1\n") && side.contains("generated_unix = "));
        assert_eq!("JSON".parse::<Format>(), Ok(Format::Json));
    }
}
