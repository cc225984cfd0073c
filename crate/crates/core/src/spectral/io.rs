//! JSON serialization of vector fields.
//!
//! Floats are written in shortest round-trip form, so reading a document back
//! reproduces the coefficients bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::VectorField;
use super::params::{GridParams, LaplacianVariant};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: f64,
    pub lambda: f64,
    pub variant: LaplacianVariant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub k1: i32,
    pub k2: i32,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub header: FieldHeader,
    pub records: Vec<FieldRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl FieldDocument {
    /// One record per half-lattice mode, in storage order.
    pub fn from_field(u: &VectorField) -> Self {
        let p = u.params;
        let records = u
            .lattice()
            .modes()
            .enumerate()
            .map(|(i, (k1, k2))| FieldRecord {
                k1,
                k2,
                c1: u.u1.coeffs()[i],
                c2: u.u2.coeffs()[i],
            })
            .collect();
        FieldDocument {
            header: FieldHeader {
                n: p.n,
                m: p.m,
                lambda: p.lambda,
                variant: p.variant,
            },
            records,
            config_digest: None,
            metadata: None,
        }
    }

    pub fn with_metadata(mut self, metadata: serde_json::Value) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.config_digest = Some(digest.into());
        self
    }

    pub fn params(&self) -> Result<GridParams> {
        let h = &self.header;
        let p = GridParams {
            n: h.n,
            m: h.m,
            lambda: h.lambda,
            variant: h.variant,
        };
        p.validate()?;
        Ok(p)
    }

    /// Rebuilds the field. Records may be sparse; modes given in the negative
    /// half are folded, repeated modes are rejected.
    pub fn to_field(&self) -> Result<VectorField> {
        let mut u = VectorField::zeros(self.params()?);
        let lat = u.lattice();
        let mut seen = vec![false; lat.len()];
        for r in &self.records {
            let (i, _) = lat.locate(r.k1, r.k2).ok_or_else(|| {
                Error::InvalidInput(format!("mode ({}, {}) is outside the lattice", r.k1, r.k2))
            })?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidInput(format!(
                    "mode ({}, {}) given twice",
                    r.k1, r.k2
                )));
            }
            u.u1.set(r.k1, r.k2, r.c1);
            u.u2.set(r.k1, r.k2, r.c2);
        }
        Ok(u)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_force, SineField};

    #[test]
    fn round_trip_is_exact() {
        let p = GridParams::new(3, 6.0, 0.1).unwrap();
        let mut u = make_force(&p);
        u.u1 = SineField::from_modes(
            3,
            &[((1, -2), 0.1 + 0.2), ((2, 3), 1.0 / 3.0), ((0, 1), 1e-300)],
        );
        let doc = FieldDocument::from_field(&u).with_digest("abc");
        let back = FieldDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_field().unwrap(), u);
    }

    #[test]
    fn rejects_bad_records() {
        let p = GridParams::new(2, 2.0, 1.0).unwrap();
        let mut doc = FieldDocument::from_field(&VectorField::zeros(p));
        doc.records.push(FieldRecord {
            k1: 3,
            k2: 0,
            c1: 1.0,
            c2: 0.0,
        });
        assert!(doc.to_field().is_err());
        doc.records.pop();
        doc.records.push(FieldRecord {
            k1: -1,
            k2: 0,
            c1: 1.0,
            c2: 0.0,
        });
        assert!(doc.to_field().is_err());
    }
}
