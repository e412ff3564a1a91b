//! Tabular results and their CSV/JSON encodings.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::args::Format;
use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    /// Empty in CSV, `null` in JSON.
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let err = |e: csv::Error| CliError::Output(e.to_string());
        wtr.write_record(&self.columns).map_err(err)?;
        for row in &self.rows {
            wtr.serialize(row).map_err(err)?;
        }
        wtr.flush().map_err(|e| CliError::Output(e.to_string()))
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Table", 2)?;
        st.serialize_field("columns", &self.columns)?;
        st.serialize_field("rows", &self.rows)?;
        st.end()
    }
}

/// The tables of one run, the first being the primary one.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

struct Tables<'a>(&'a [Table]);

impl Serialize for Tables<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for t in self.0 {
            map.serialize_entry(t.name, t)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    manifest: &'a RunManifest,
    data: Tables<'a>,
}

pub fn render_json(report: &Report, manifest: &RunManifest) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(&Envelope {
        manifest,
        data: Tables(&report.tables),
    })
    .map_err(|e| CliError::Output(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

/// All tables as CSV, separated by blank lines.
pub fn render_csv(report: &Report) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    for (i, t) in report.tables.iter().enumerate() {
        if i > 0 {
            buf.push(b'\n');
        }
        t.write_csv(&mut buf)?;
    }
    Ok(buf)
}

/// `dir/stem.suffix` for an output path `dir/stem.ext`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the report to stdout or to `out` (plus sibling table files and the
/// stamped manifest sidecar).
pub fn emit(report: &Report, manifest: &RunManifest, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let Some(out) = out else {
        let bytes = match format {
            Format::Json => render_json(report, manifest)?,
            Format::Csv => render_csv(report)?,
        };
        return match std::io::stdout().write_all(&bytes) {
            // a closed reader (`| head`) is not a failure of the run
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(|e| CliError::Output(e.to_string())),
        };
    };
    match format {
        Format::Json => write_file(out, &render_json(report, manifest)?)?,
        Format::Csv => {
            for (i, t) in report.tables.iter().enumerate() {
                let mut buf = Vec::new();
                t.write_csv(&mut buf)?;
                let path = if i == 0 {
                    out.to_path_buf()
                } else {
                    sibling(out, &format!("{}.csv", t.name))
                };
                write_file(&path, &buf)?;
            }
        }
    }
    let mut sidecar = serde_json::to_vec_pretty(&manifest.stamped()).map_err(|e| CliError::Output(e.to_string()))?;
    sidecar.push(b'\n');
    write_file(&sibling(out, "manifest.json"), &sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut a = Table::new("main", &["x", "y", "note"]);
        a.push(vec![0.5.into(), 3u64.into(), "ok".into()]);
        a.push(vec![1e-300.into(), Cell::Missing, true.into()]);
        let mut b = Table::new("extra", &["z"]);
        b.push(vec![f64::NAN.into()]);
        Report { tables: vec![a, b] }
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(render_csv(&sample()).unwrap()).unwrap();
        assert_eq!(text, "x,y,note\n0.5,3,ok\n1e-300,,true\n\nz\nNaN\n");
    }

    #[test]
    fn json_keeps_table_order() {
        let m = RunManifest::new(
            "test",
            vec![],
            crate::manifest::ResolvedConfig::new(crate::manifest::Distribution::Erlang { order: 1, mean: 1.0 }, 2.0),
        );
        let text = String::from_utf8(render_json(&sample(), &m).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["data"]["main"]["rows"][1][1], serde_json::Value::Null);
        assert_eq!(v["data"]["extra"]["rows"][0][0], serde_json::Value::Null);
        assert!(v["manifest"].get("timestamp").is_none());
        assert!(text.find("\"main\"").unwrap() < text.find("\"extra\"").unwrap());
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(
            sibling(Path::new("out/run.csv"), "profile.csv"),
            PathBuf::from("out/run.profile.csv")
        );
        assert_eq!(
            sibling(Path::new("run"), "manifest.json"),
            PathBuf::from("run.manifest.json")
        );
    }
}
