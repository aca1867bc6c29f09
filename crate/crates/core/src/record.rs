//! Time-stamped snapshots of per-site fields.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::model::ModelParams;
use crate::pulses::PulseSpec;
use crate::C64;

/// One field over all snapshots, stored row-major (snapshot × site).
#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

impl FieldData {
    pub fn is_complex(&self) -> bool {
        matches!(self, FieldData::Complex(_))
    }

    /// Number of stored values (snapshots × sites).
    pub fn len(&self) -> usize {
        match self {
            FieldData::Real(v) => v.len(),
            FieldData::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything needed to rerun the simulation that produced a record.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct RecordMeta {
    pub params: ModelParams,
    /// Labelled pulses (`"pump"`, `"probe"`), as used by the run.
    pub pulses: Vec<(String, PulseSpec)>,
    pub integrator: IntegratorConfig,
}

/// Snapshots of named per-site fields on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatioTemporalRecord {
    pub times: Vec<f64>,
    pub num_sites: usize,
    pub fields: BTreeMap<String, FieldData>,
    pub meta: Option<RecordMeta>,
}

impl SpatioTemporalRecord {
    pub fn new(num_sites: usize) -> Self {
        Self {
            times: Vec::new(),
            num_sites,
            fields: BTreeMap::new(),
            meta: None,
        }
    }

    pub fn num_snapshots(&self) -> usize {
        self.times.len()
    }

    /// Uniform snapshot spacing, or `None` with fewer than two snapshots.
    pub fn time_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            None
        } else {
            Some(self.times[1] - self.times[0])
        }
    }

    pub fn field(&self, name: &str) -> Result<&FieldData> {
        self.fields
            .get(name)
            .ok_or_else(|| Error::MissingField(name.to_string()))
    }

    pub fn complex(&self, name: &str) -> Result<&[C64]> {
        match self.field(name)? {
            FieldData::Complex(v) => Ok(v),
            FieldData::Real(_) => Err(Error::Shape(format!("field `{name}` is real"))),
        }
    }

    pub fn real(&self, name: &str) -> Result<&[f64]> {
        match self.field(name)? {
            FieldData::Real(v) => Ok(v),
            FieldData::Complex(_) => Err(Error::Shape(format!("field `{name}` is complex"))),
        }
    }

    /// Snapshot `i` of a complex field.
    pub fn complex_row(&self, name: &str, i: usize) -> Result<&[C64]> {
        let n = self.num_sites;
        Ok(&self.complex(name)?[i * n..(i + 1) * n])
    }

    /// Snapshot `i` of a real field.
    pub fn real_row(&self, name: &str, i: usize) -> Result<&[f64]> {
        let n = self.num_sites;
        Ok(&self.real(name)?[i * n..(i + 1) * n])
    }

    /// Declares an empty field; subsequent pushes append to it.
    pub fn declare(&mut self, name: &str, complex: bool) {
        let data = if complex {
            FieldData::Complex(Vec::new())
        } else {
            FieldData::Real(Vec::new())
        };
        self.fields.insert(name.to_string(), data);
    }

    pub fn push_complex(&mut self, name: &str, row: &[C64]) {
        if let Some(FieldData::Complex(v)) = self.fields.get_mut(name) {
            v.extend_from_slice(row);
        }
    }

    pub fn push_real(&mut self, name: &str, row: &[f64]) {
        if let Some(FieldData::Real(v)) = self.fields.get_mut(name) {
            v.extend_from_slice(row);
        }
    }

    /// Checks timestamps are strictly increasing and uniform, and every
    /// field holds snapshots × sites values.
    pub fn validate(&self) -> Result<()> {
        let expected = self.times.len() * self.num_sites;
        for (name, f) in &self.fields {
            if f.len() != expected {
                return Err(Error::Shape(format!(
                    "field `{name}` holds {} values, expected {expected}",
                    f.len()
                )));
            }
        }
        if let Some(dt) = self.time_step() {
            if !(dt > 0.0) {
                return Err(Error::Shape("times must be strictly increasing".into()));
            }
            for (i, w) in self.times.windows(2).enumerate() {
                let step = w[1] - w[0];
                if !(step > 0.0) || (step - dt).abs() > 1e-9 * dt.max(1.0) {
                    return Err(Error::Shape(format!(
                        "non-uniform time step between snapshots {i} and {}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}
