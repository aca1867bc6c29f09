//! Record and table file formats.
//!
//! A [`Dataset`] is a set of named per-site fields sampled on a row axis
//! (time for trajectories, frequency for spectra). It is written either as
//!
//! * text: `#`-prefixed header lines (format tag, JSON header, column names
//!   with units), then one whitespace-separated line per (row, site);
//! * binary: the magic `PLTR1`, the JSON header length as u64 LE, the JSON
//!   header, then each field in header order as row-major f64 LE values,
//!   complex values interleaved (re, im).
//!
//! Both carry the same JSON header, so either can be read back into an
//! identical dataset. Floats are printed in shortest round-trip form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use polaritrans_core::{FieldData, SpatioTemporalRecord, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, SimError};
use crate::spectrum::SpectrumMap;

pub const MAGIC: &[u8; 5] = b"PLTR1";
const TEXT_TAG: &str = "# PLTR1 text";

/// Name and unit of a coordinate or field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
}

impl Axis {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub name: String,
    pub complex: bool,
    pub unit: String,
}

/// Self-describing header shared by both formats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Header {
    pub row_axis: Axis,
    pub rows: Vec<f64>,
    pub num_sites: usize,
    /// Site positions in μm.
    pub positions: Vec<f64>,
    pub fields: Vec<FieldInfo>,
    /// Free-form provenance: configuration echo, version, context.
    pub provenance: Value,
}

/// Named fields over (row, site).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: Header,
    pub data: BTreeMap<String, FieldData>,
}

fn field_unit(name: &str) -> &'static str {
    match name {
        "photon" | "coherence" | "inversion" | "excitation" => "1",
        n if n.starts_with("alpha") || n.starts_with("sigma") || n.starts_with('z') => "per unit drive",
        "deltaT" => "per unit eta_p^2 eta_p'^2",
        _ => "",
    }
}

impl Dataset {
    /// Time-sampled record; `positions` are the site coordinates.
    pub fn from_record(record: &SpatioTemporalRecord, positions: &[f64], provenance: Value) -> Self {
        let fields = record
            .fields
            .iter()
            .map(|(name, f)| FieldInfo {
                name: name.clone(),
                complex: f.is_complex(),
                unit: field_unit(name).into(),
            })
            .collect();
        Self {
            header: Header {
                row_axis: Axis::new("t", "fs"),
                rows: record.times.clone(),
                num_sites: record.num_sites,
                positions: positions.to_vec(),
                fields,
                provenance,
            },
            data: record.fields.clone(),
        }
    }

    /// Frequency-sampled map stored under `name`.
    pub fn from_spectrum(map: &SpectrumMap, name: &str, positions: &[f64], provenance: Value) -> Self {
        Self {
            header: Header {
                row_axis: Axis::new("omega", "eV"),
                rows: map.omegas.clone(),
                num_sites: map.num_sites,
                positions: positions.to_vec(),
                fields: vec![FieldInfo {
                    name: name.into(),
                    complex: map.values.is_complex(),
                    unit: field_unit(name).into(),
                }],
                provenance,
            },
            data: BTreeMap::from([(name.to_string(), map.values.clone())]),
        }
    }

    /// Back to a record; only meaningful for time-sampled datasets.
    pub fn to_record(&self) -> SpatioTemporalRecord {
        let mut r = SpatioTemporalRecord::new(self.header.num_sites);
        r.times = self.header.rows.clone();
        r.fields = self.data.clone();
        r
    }

    fn check(&self) -> std::result::Result<(), String> {
        let h = &self.header;
        if h.positions.len() != h.num_sites {
            return Err(format!("{} positions for {} sites", h.positions.len(), h.num_sites));
        }
        let expected = h.rows.len() * h.num_sites;
        for f in &h.fields {
            let d = self.data.get(&f.name).ok_or_else(|| format!("missing field `{}`", f.name))?;
            if d.is_complex() != f.complex || d.len() != expected {
                return Err(format!("field `{}` does not match the header", f.name));
            }
        }
        if self.data.len() != h.fields.len() {
            return Err("fields not listed in the header".into());
        }
        Ok(())
    }

    /// Number of payload bytes in the binary form.
    pub fn payload_len(&self) -> usize {
        let per_value: usize = self.header.fields.iter().map(|f| if f.complex { 16 } else { 8 }).sum();
        per_value * self.header.rows.len() * self.header.num_sites
    }
}

fn format_error(path: &Path, reason: impl Into<String>) -> SimError {
    SimError::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn header_json(h: &Header) -> String {
    serde_json::to_string(h).expect("header serializes")
}

/// Writes the binary container.
pub fn write_binary(ds: &Dataset, path: &Path) -> Result<()> {
    ds.check().map_err(|r| format_error(path, r))?;
    let json = header_json(&ds.header);
    let file = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| SimError::io(path, e);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&(json.len() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(json.as_bytes()).map_err(io)?;
    for f in &ds.header.fields {
        match &ds.data[&f.name] {
            FieldData::Real(v) => {
                for x in v {
                    w.write_all(&x.to_le_bytes()).map_err(io)?;
                }
            }
            FieldData::Complex(v) => {
                for z in v {
                    w.write_all(&z.re.to_le_bytes()).map_err(io)?;
                    w.write_all(&z.im.to_le_bytes()).map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(io)
}

/// Reads the binary container.
pub fn read_binary(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| SimError::io(path, e))?;
    if bytes.len() < 13 || &bytes[..5] != MAGIC {
        return Err(format_error(path, "missing PLTR1 magic"));
    }
    let len = u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(13..13 + len).ok_or_else(|| format_error(path, "truncated header"))?;
    let header: Header = serde_json::from_slice(body).map_err(|e| format_error(path, e.to_string()))?;
    let mut payload = bytes[13 + len..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let n = header.rows.len() * header.num_sites;
    let mut data = BTreeMap::new();
    for f in &header.fields {
        let field = if f.complex {
            let v: Vec<C64> = (0..n)
                .map_while(|_| Some(C64::new(payload.next()?, payload.next()?)))
                .collect();
            if v.len() != n {
                return Err(format_error(path, "truncated payload"));
            }
            FieldData::Complex(v)
        } else {
            let v: Vec<f64> = payload.by_ref().take(n).collect();
            if v.len() != n {
                return Err(format_error(path, "truncated payload"));
            }
            FieldData::Real(v)
        };
        data.insert(f.name.clone(), field);
    }
    let expected = 13 + len + Dataset { header: header.clone(), data: BTreeMap::new() }.payload_len();
    if bytes.len() != expected {
        return Err(format_error(path, format!("file has {} bytes, layout needs {expected}", bytes.len())));
    }
    Ok(Dataset { header, data })
}

fn column_names(h: &Header) -> Vec<String> {
    let mut cols = vec![format!("{}[{}]", h.row_axis.name, h.row_axis.unit), "r[um]".to_string()];
    for f in &h.fields {
        if f.complex {
            cols.push(format!("{}.re[{}]", f.name, f.unit));
            cols.push(format!("{}.im[{}]", f.name, f.unit));
        } else {
            cols.push(format!("{}[{}]", f.name, f.unit));
        }
    }
    cols
}

/// Writes the text form; an empty dataset gives a header-only file.
pub fn write_text(ds: &Dataset, path: &Path) -> Result<()> {
    ds.check().map_err(|r| format_error(path, r))?;
    let h = &ds.header;
    let file = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| SimError::io(path, e);
    writeln!(w, "{TEXT_TAG}").map_err(io)?;
    writeln!(w, "# header {}", header_json(h)).map_err(io)?;
    writeln!(w, "# columns {}", column_names(h).join(" ")).map_err(io)?;
    let mut line = String::new();
    for (i, row) in h.rows.iter().enumerate() {
        for (n, r) in h.positions.iter().enumerate() {
            line.clear();
            write!(line, "{row:e} {r:e}").expect("string write");
            let idx = i * h.num_sites + n;
            for f in &h.fields {
                match &ds.data[&f.name] {
                    FieldData::Real(v) => write!(line, " {:e}", v[idx]),
                    FieldData::Complex(v) => write!(line, " {:e} {:e}", v[idx].re, v[idx].im),
                }
                .expect("string write");
            }
            writeln!(w, "{line}").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Reads the text form.
pub fn read_text(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(TEXT_TAG) {
        return Err(format_error(path, "missing PLTR1 text tag"));
    }
    let header: Header = lines
        .next()
        .and_then(|l| l.strip_prefix("# header "))
        .ok_or_else(|| format_error(path, "missing header line"))
        .and_then(|j| serde_json::from_str(j).map_err(|e| format_error(path, e.to_string())))?;
    let n = header.rows.len() * header.num_sites;
    let width: usize = header.fields.iter().map(|f| if f.complex { 2 } else { 1 }).sum();
    let mut cols: Vec<Vec<f64>> = (0..width).map(|_| Vec::with_capacity(n)).collect();
    for (ln, l) in lines.enumerate().filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty()) {
        let vals: Vec<f64> = l
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format_error(path, format!("line {}: {e}", ln + 3)))?;
        if vals.len() != cols.len() + 2 {
            return Err(format_error(path, format!("line {}: expected {} columns", ln + 3, cols.len() + 2)));
        }
        for (c, v) in cols.iter_mut().zip(&vals[2..]) {
            c.push(*v);
        }
    }
    if cols.iter().any(|c| c.len() != n) {
        return Err(format_error(path, "row count does not match the header"));
    }
    let mut data = BTreeMap::new();
    let mut cols = cols.into_iter();
    for f in &header.fields {
        let field = if f.complex {
            let re = cols.next().expect("column");
            let im = cols.next().expect("column");
            FieldData::Complex(re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect())
        } else {
            FieldData::Real(cols.next().expect("column"))
        };
        data.insert(f.name.clone(), field);
    }
    Ok(Dataset { header, data })
}

/// Reads either format, chosen by the leading bytes.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut head = [0u8; 5];
    {
        use std::io::Read;
        let mut f = fs::File::open(path).map_err(|e| SimError::io(path, e))?;
        let got = f.read(&mut head).map_err(|e| SimError::io(path, e))?;
        if got == 5 && &head == MAGIC {
            return read_binary(path);
        }
    }
    read_text(path)
}

/// A small named-column table (dispersion, sweep results).
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Axis>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: Value,
}

impl Table {
    /// Text with `#` header lines: provenance JSON, then `name[unit]` columns.
    /// Non-finite entries (failed sweep points) are written as `nan`.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "# provenance {}", self.provenance).expect("string write");
        let cols: Vec<String> = self.columns.iter().map(|a| format!("{}[{}]", a.name, a.unit)).collect();
        writeln!(s, "# columns {}", cols.join(" ")).expect("string write");
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(s, "{}", cells.join(" ")).expect("string write");
        }
        fs::write(path, s).map_err(|e| SimError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Table> {
        let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        let mut provenance = Value::Null;
        let mut columns = Vec::new();
        let mut rows = Vec::new();
        for l in text.lines() {
            if let Some(p) = l.strip_prefix("# provenance ") {
                provenance = serde_json::from_str(p).map_err(|e| format_error(path, e.to_string()))?;
            } else if let Some(c) = l.strip_prefix("# columns ") {
                columns = c
                    .split_whitespace()
                    .map(|t| {
                        let (name, unit) = t.trim_end_matches(']').split_once('[').unwrap_or((t, ""));
                        Axis::new(name, unit)
                    })
                    .collect();
            } else if !l.starts_with('#') && !l.trim().is_empty() {
                let row: Vec<f64> = l
                    .split_whitespace()
                    .map(str::parse::<f64>)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| format_error(path, e.to_string()))?;
                if row.len() != columns.len() {
                    return Err(format_error(path, "row width does not match the columns"));
                }
                rows.push(row);
            }
        }
        Ok(Table {
            columns,
            rows,
            provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Dataset {
        let mut r = SpatioTemporalRecord::new(3);
        r.declare("photon", true);
        r.declare("inversion", false);
        for i in 0..2 {
            r.times.push(0.5 * i as f64);
            r.push_complex("photon", &[C64::new(0.1 * i as f64, -1.0 / 3.0); 3]);
            r.push_real("inversion", &[-1.0 + 1e-17 * i as f64; 3]);
        }
        Dataset::from_record(&r, &[-1.0, 0.0, 1.0], serde_json::json!({"k": 1}))
    }

    #[test]
    fn field_order_follows_header() {
        let d = sample();
        let names: Vec<_> = d.header.fields.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["inversion", "photon"]);
        assert_eq!(d.payload_len(), 2 * 3 * (8 + 16));
    }

    #[test]
    fn mismatched_dataset_is_rejected() {
        let mut d = sample();
        d.header.positions.pop();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(write_text(&d, &dir.path().join("x")), Err(SimError::Format { .. })));
    }

    #[test]
    fn bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        fs::write(&p, b"PLTR2aaaaaaaaaaaa").unwrap();
        assert!(read_binary(&p).is_err());
    }
}
