use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::ExperimentRecord;
use crate::error::{Error, Result};
use crate::kzm::Provenance;

pub const CURVES_FILE: &str = "curves.csv";
pub const RECORD_FILE: &str = "record.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// `curves.csv` next to `record.json`.
    Csv,
    /// `record.json` only.
    Json,
}

/// One line of the curve table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t_a: f64,
    pub t: f64,
    #[serde(rename = "N")]
    pub layer: usize,
    pub p: f64,
    pub p_mitigated: Option<f64>,
    pub mode: Provenance,
}

fn rows(record: &ExperimentRecord) -> impl Iterator<Item = CurveRow> + '_ {
    record.cells.iter().flat_map(|c| {
        c.curve.points().iter().map(move |q| CurveRow {
            t_a: c.t_a,
            t: q.t,
            layer: q.layer,
            p: q.p,
            p_mitigated: q.p_mitigated,
            mode: c.curve.provenance(),
        })
    })
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(CURVES_FILE, io),
        other => Error::Schema {
            path: CURVES_FILE.into(),
            message: format!("{other:?}"),
        },
    }
}

/// Writes every curve point with columns `t_a, t, N, p, p_mitigated, mode`.
pub fn write_curves_csv<W: Write>(record: &ExperimentRecord, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows(record) {
        out.serialize(row).map_err(csv_error)?;
    }
    out.flush().map_err(|e| Error::io(CURVES_FILE, e))
}

pub fn read_curves_csv<R: Read>(r: R) -> Result<Vec<CurveRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(csv_error))
        .collect()
}

pub fn write_record_json<W: Write>(record: &ExperimentRecord, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, record).map_err(|e| Error::Schema {
        path: RECORD_FILE.into(),
        message: e.to_string(),
    })?;
    writeln!(w).map_err(|e| Error::io(RECORD_FILE, e))
}

pub fn read_record_json<R: Read>(r: R) -> Result<ExperimentRecord> {
    let de = &mut serde_json::Deserializer::from_reader(r);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes the record into `dir` (created if missing) and returns the
/// written paths.
pub fn export(
    record: &ExperimentRecord,
    dir: impl AsRef<Path>,
    format: ExportFormat,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if format == ExportFormat::Csv {
        let path = dir.join(CURVES_FILE);
        write_curves_csv(record, create(&path)?).map_err(|e| relocate(e, &path))?;
        written.push(path);
    }
    let path = dir.join(RECORD_FILE);
    let mut w = create(&path)?;
    write_record_json(record, &mut w).map_err(|e| relocate(e, &path))?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

fn relocate(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

/// Reads back a record written by [`export`].
pub fn import(dir: impl AsRef<Path>) -> Result<ExperimentRecord> {
    let path = dir.as_ref().join(RECORD_FILE);
    let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
    read_record_json(BufReader::new(f))
}
