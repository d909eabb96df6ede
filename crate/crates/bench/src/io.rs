//! Matrix files.
//!
//! Data come as CSV (comma separated, one observation per line, optional
//! header) or in the binary `CHSL1` layout: the five magic bytes, `n` and `p`
//! as little-endian `u64`, then the `n × p` doubles column by column.
//! Numbers are written in the shortest form that reads back to the same
//! double.

use std::fs;
use std::io::Write;
use std::path::Path;

use choselect::{Data, Matrix, ModelGraph};

use crate::error::{BenchError, Result};

pub const MAGIC: &[u8; 5] = b"CHSL1";

/// Reads a data file, detecting the binary layout by its magic bytes.
pub fn read_data(path: &Path) -> Result<Data> {
    let bytes = fs::read(path).map_err(|e| BenchError::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        decode_binary(&bytes)
    } else {
        parse_csv(&bytes)
    }
}

/// Parses CSV rows of equal length. A first line with any non-numeric field
/// is taken as a header.
pub fn parse_csv(bytes: &[u8]) -> Result<Data> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| BenchError::Parse(e.to_string()))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if index == 0 => {
                width = Some(record.len());
                continue;
            }
            Err(_) => {
                let bad = record
                    .iter()
                    .find(|f| f.parse::<f64>().is_err())
                    .unwrap_or("");
                return Err(BenchError::Parse(format!(
                    "line {line}: {bad:?} is not a number"
                )));
            }
        };
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(BenchError::Parse(format!(
                "line {line}: non-finite value {v}"
            )));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(BenchError::Parse(format!(
                    "line {line}: {} fields, expected {w}",
                    values.len()
                )));
            }
            _ => {}
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(BenchError::Parse("no data rows".into()));
    }
    Data::from_rows(&rows).map_err(|e| BenchError::Parse(e.to_string()))
}

pub fn decode_binary(bytes: &[u8]) -> Result<Data> {
    let body = bytes
        .strip_prefix(MAGIC.as_slice())
        .ok_or_else(|| BenchError::Parse("missing CHSL1 magic".into()))?;
    if body.len() < 16 {
        return Err(BenchError::Parse("truncated CHSL1 header".into()));
    }
    let dim = |at: usize| u64::from_le_bytes(body[at..at + 8].try_into().expect("eight bytes"));
    let (n, p) = (dim(0), dim(8));
    let count = n
        .checked_mul(p)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| usize::try_from(c).ok());
    let values = &body[16..];
    if count != Some(values.len()) {
        return Err(BenchError::Parse(format!(
            "CHSL1 body has {} bytes for a {n} x {p} matrix",
            values.len()
        )));
    }
    let (n, p) = (n as usize, p as usize);
    if n == 0 || p == 0 {
        return Err(BenchError::Parse("empty CHSL1 matrix".into()));
    }
    let doubles: Vec<f64> = values
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
        .collect();
    if doubles.iter().any(|v| !v.is_finite()) {
        return Err(BenchError::Parse("non-finite value in CHSL1 body".into()));
    }
    let columns = doubles.chunks_exact(n).map(<[f64]>::to_vec).collect();
    Data::from_columns(columns).map_err(|e| BenchError::Parse(e.to_string()))
}

pub fn encode_binary(x: &Data) -> Vec<u8> {
    let mut out = Vec::with_capacity(21 + 8 * x.n() * x.p());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(x.n() as u64).to_le_bytes());
    out.extend_from_slice(&(x.p() as u64).to_le_bytes());
    for column in x.columns() {
        for v in column {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn data_csv(x: &Data) -> String {
    let mut out = String::new();
    for i in 0..x.n() {
        let line: Vec<String> = x.columns().iter().map(|c| number(c[i])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let line: Vec<String> = m.row(i).iter().map(|&v| number(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Reads a headerless square matrix written by [`matrix_csv`].
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let bytes = fs::read(path).map_err(|e| BenchError::io(path, e))?;
    let data = parse_csv(&bytes)?;
    Ok(data.to_dense())
}

/// `i,j` lines (1-based, `j < i`) under an `i,j` header.
pub fn edges_csv(graph: &ModelGraph) -> String {
    let mut out = String::from("i,j\n");
    for (i, j) in graph.edges() {
        out.push_str(&format!("{},{}\n", i + 1, j + 1));
    }
    out
}

pub fn parse_edges(text: &str, p: usize) -> Result<ModelGraph> {
    let mut edges = Vec::new();
    for (index, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parse = |s: Option<&str>| {
            s.and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&v| v >= 1)
        };
        let mut fields = line.split(',');
        match (parse(fields.next()), parse(fields.next()), fields.next()) {
            (Some(i), Some(j), None) => edges.push((i - 1, j - 1)),
            _ => {
                return Err(BenchError::Parse(format!(
                    "edge line {}: {line:?}",
                    index + 1
                )))
            }
        }
    }
    ModelGraph::from_edges(p, edges).map_err(|e| BenchError::Parse(e.to_string()))
}

/// Shortest decimal form that parses back to `v`.
pub fn number(v: f64) -> String {
    format!("{v:?}")
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let temp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&temp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&temp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&temp);
    }
    result.map_err(|e| BenchError::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| BenchError::io(path, e))
}
