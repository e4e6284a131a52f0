//! CSV and JSON serialisation of fields, propagator slices and series.
//!
//! Floats are written with `{:e}` (shortest round-trip exponent form), so
//! output bytes depend only on the values.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::{PropagatorSample, QuadratureMeta};
use crate::spectral::{Field, UniformGrid};

pub const FIELD_SCHEMA: &str = "kglab.field/1";
pub const PROPAGATOR_SCHEMA: &str = "kglab.propagator/1";

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// `x, re, im` rows.
pub fn write_field_csv(path: &Path, f: &Field) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "re", "im"])?;
    for (x, v) in f.grid().points().zip(f.values()) {
        w.write_record([fmt_f64(x), fmt_f64(v.re), fmt_f64(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `x, re, im` rows back onto `grid`, checking the abscissae.
pub fn read_field_csv(path: &Path, grid: UniformGrid) -> Result<Field> {
    let mut r = csv::Reader::from_path(path)?;
    let mut values = Vec::with_capacity(grid.n());
    for (j, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Format(format!("row {j}: missing column {i}")))?
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {j}: {e}")))
        };
        if j >= grid.n() || (num(0)? - grid.x(j)).abs() > 1e-9 * grid.dx() {
            return Err(Error::Format(format!(
                "row {j}: abscissa does not match the grid"
            )));
        }
        values.push(Complex64::new(num(1)?, num(2)?));
    }
    if values.len() != grid.n() {
        return Err(Error::Format(format!(
            "{} rows for a grid of {} points",
            values.len(),
            grid.n()
        )));
    }
    Field::new(grid, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldEnvelope {
    pub schema: String,
    pub n: usize,
    pub dx: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl FieldEnvelope {
    pub fn from_field(f: &Field) -> Self {
        FieldEnvelope {
            schema: FIELD_SCHEMA.to_string(),
            n: f.grid().n(),
            dx: f.grid().dx(),
            length: f.grid().length(),
            re: f.values().iter().map(|v| v.re).collect(),
            im: f.values().iter().map(|v| v.im).collect(),
        }
    }

    pub fn into_field(self) -> Result<Field> {
        if self.schema != FIELD_SCHEMA {
            return Err(Error::Format(format!("unexpected schema {}", self.schema)));
        }
        let grid = UniformGrid::new(self.n, self.dx)?;
        if self.re.len() != self.n || self.im.len() != self.n {
            return Err(Error::Format("component lengths differ from n".into()));
        }
        let values = self
            .re
            .into_iter()
            .zip(self.im)
            .map(|(a, b)| Complex64::new(a, b))
            .collect();
        Field::new(grid, values)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_field_json(path: &Path, f: &Field) -> Result<()> {
    write_json(path, &FieldEnvelope::from_field(f))
}

pub fn read_field_json(path: &Path) -> Result<Field> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str::<FieldEnvelope>(&text)?.into_field()
}

/// Metadata stored next to a propagator slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSidecar {
    pub schema: String,
    pub t: f64,
    pub m: f64,
    pub n: usize,
    pub dx: f64,
    pub quadrature: QuadratureMeta,
    pub identity_error: Option<f64>,
}

/// `x, re_delta, im_delta, re_delta_plus, im_delta_plus`, plus a JSON
/// sidecar at `sidecar`. The `Delta_+` columns are empty for `m = 0`.
pub fn write_propagator_slice(csv_path: &Path, sidecar: &Path, s: &PropagatorSample) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record([
        "x",
        "re_delta",
        "im_delta",
        "re_delta_plus",
        "im_delta_plus",
    ])?;
    for (j, x) in s.grid().points().enumerate() {
        let d = s.delta().values()[j];
        let dp = s.delta_plus().map(|f| f.values()[j]);
        w.write_record([
            fmt_f64(x),
            fmt_f64(d.re),
            fmt_f64(d.im),
            fmt_opt(dp.map(|v| v.re)),
            fmt_opt(dp.map(|v| v.im)),
        ])?;
    }
    w.flush()?;
    write_json(sidecar, &sidecar_of(s))
}

/// JSON form of a propagator slice: the sidecar plus both fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorEnvelope {
    pub meta: PropagatorSidecar,
    pub delta: FieldEnvelope,
    pub delta_plus: Option<FieldEnvelope>,
}

fn sidecar_of(s: &PropagatorSample) -> PropagatorSidecar {
    PropagatorSidecar {
        schema: PROPAGATOR_SCHEMA.to_string(),
        t: s.t(),
        m: s.mass().value(),
        n: s.grid().n(),
        dx: s.grid().dx(),
        quadrature: *s.meta(),
        identity_error: s.identity_error(),
    }
}

pub fn write_propagator_json(path: &Path, s: &PropagatorSample) -> Result<()> {
    write_json(
        path,
        &PropagatorEnvelope {
            meta: sidecar_of(s),
            delta: FieldEnvelope::from_field(s.delta()),
            delta_plus: s.delta_plus().map(FieldEnvelope::from_field),
        },
    )
}

/// Column names and rows; `None` becomes `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub fn write_series_json(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
    if let Some(bad) = rows.iter().find(|r| r.len() != header.len()) {
        return Err(Error::Format(format!(
            "row of {} cells under {} columns",
            bad.len(),
            header.len()
        )));
    }
    write_json(
        path,
        &SeriesTable {
            columns: header.iter().map(|h| h.to_string()).collect(),
            rows: rows.to_vec(),
        },
    )
}

/// A header row and rows of optional numbers; `None` becomes an empty cell.
pub fn write_series_csv(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Format(format!(
                "row of {} cells under {} columns",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|v| fmt_opt(*v)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_bump;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = UniformGrid::new(256, 1.0 / 16.0).unwrap();
        let f = &make_bump(g, 0.3, 1.0, 2.0).unwrap()
            + &Field::from_fn(g, |x| Complex64::new(0.0, (0.1 * x).sin() * 1e-7)).unwrap();
        let p = dir.path().join("f.csv");
        write_field_csv(&p, &f).unwrap();
        assert_eq!(read_field_csv(&p, g).unwrap(), f);
        let wrong = UniformGrid::new(256, 1.0 / 8.0).unwrap();
        assert!(matches!(read_field_csv(&p, wrong), Err(Error::Format(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = UniformGrid::new(64, 0.25).unwrap();
        let f = make_bump(g, 0.0, 2.0, 1.0).unwrap();
        let p = dir.path().join("f.json");
        write_field_json(&p, &f).unwrap();
        assert_eq!(read_field_json(&p).unwrap(), f);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"L\": 16.0"));
    }

    #[test]
    fn series_rows_must_match_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_series_csv(&p, &["t", "v"], &[vec![Some(1.0), None]]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "t,v\n1e0,\n");
        assert!(write_series_csv(&p, &["t"], &[vec![Some(1.0), None]]).is_err());
    }
}
