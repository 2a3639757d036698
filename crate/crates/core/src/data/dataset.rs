//! The harmonized survey dataset and its operations.
//!
//! Cells are stored column-major as `f64` with NaN as the missing marker;
//! [`SurveyDataset::value`] exposes cells as `Option<f64>`. Datasets are
//! immutable after construction: every operation returns a new value, so
//! they are safe to share read-only across threads.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::frame::RawFrame;
use crate::data::schema::{FeatureSpec, SurveySchema};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Missing-value tokens recognized by default at ingest time.
pub fn default_missing_tokens() -> Vec<String> {
    ["", "NA", "N/A", "."].iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyDataset {
    schema: SurveySchema,
    /// One column per schema entry, features first then outcomes; NaN = missing.
    columns: Vec<Vec<f64>>,
    label: String,
    provenance: String,
    /// (lo, hi) recorded by normalization, keyed by column name; used by
    /// [`SurveyDataset::denormalize`] to reproduce raw values.
    norm_bounds: BTreeMap<String, (f64, f64)>,
}

impl SurveyDataset {
    /// Builds a dataset from named columns, validating every observed value
    /// against its declared kind.
    pub fn from_columns(
        schema: SurveySchema,
        columns: Vec<Vec<f64>>,
        label: &str,
        provenance: &str,
    ) -> Result<Self> {
        schema.validate()?;
        if columns.len() != schema.n_columns() {
            return Err(Error::ShapeMismatch {
                detail: format!(
                    "schema declares {} columns but {} were provided",
                    schema.n_columns(),
                    columns.len()
                ),
            });
        }
        let n = columns.first().map_or(0, Vec::len);
        for (spec, col) in schema.columns().zip(&columns) {
            if col.len() != n {
                return Err(Error::ShapeMismatch {
                    detail: format!("column {:?} has ragged length", spec.name),
                });
            }
            for (i, &v) in col.iter().enumerate() {
                if !v.is_nan() {
                    spec.check_value(v, Some(i + 1))?;
                }
            }
        }
        Ok(SurveyDataset {
            schema,
            columns,
            label: label.to_string(),
            provenance: provenance.to_string(),
            norm_bounds: BTreeMap::new(),
        })
    }

    /// Validates a raw frame against the schema and parses it.
    ///
    /// The header must contain exactly the schema's column names (any
    /// order). Cells matching a missing token become missing; everything
    /// else must parse as a finite number and satisfy the column's kind
    /// constraint. Out-of-range values are an error, never coerced.
    pub fn from_frame(
        frame: &RawFrame,
        schema: &SurveySchema,
        missing_tokens: &[String],
    ) -> Result<Self> {
        schema.validate()?;
        for h in &frame.headers {
            if schema.column(h).is_none() {
                return Err(Error::UnknownColumn { column: h.clone() });
            }
        }
        let mut indices = Vec::with_capacity(schema.n_columns());
        for spec in schema.columns() {
            let idx = frame
                .column_index(&spec.name)
                .ok_or_else(|| Error::MissingColumn {
                    column: spec.name.clone(),
                })?;
            indices.push(idx);
        }
        let n = frame.rows.len();
        let mut columns: Vec<Vec<f64>> = schema.columns().map(|_| Vec::with_capacity(n)).collect();
        for (r, row) in frame.rows.iter().enumerate() {
            for (c, (spec, &idx)) in schema.columns().zip(&indices).enumerate() {
                let cell = row.get(idx).map(String::as_str).unwrap_or("").trim();
                if missing_tokens.iter().any(|t| t == cell) {
                    columns[c].push(f64::NAN);
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| Error::ParseCell {
                    row: r + 1,
                    column: spec.name.clone(),
                    value: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::ParseCell {
                        row: r + 1,
                        column: spec.name.clone(),
                        value: cell.to_string(),
                    });
                }
                spec.check_value(v, Some(r + 1))?;
                columns[c].push(v);
            }
        }
        Ok(SurveyDataset {
            schema: schema.clone(),
            columns,
            label: String::new(),
            provenance: String::new(),
            norm_bounds: BTreeMap::new(),
        })
    }

    /// Reads a CSV extract and validates it against the schema.
    pub fn load_csv(
        path: impl AsRef<Path>,
        schema: &SurveySchema,
        missing_tokens: &[String],
    ) -> Result<Self> {
        let path = path.as_ref();
        let frame = RawFrame::read_csv(path)?;
        let mut ds = Self::from_frame(&frame, schema, missing_tokens)?;
        ds.provenance = path.display().to_string();
        ds.label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(ds)
    }

    /// Writes the dataset as CSV; missing cells become empty fields.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        let names: Vec<String> = self.schema.columns().map(|c| c.name.clone()).collect();
        w.write_record(&names).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        for r in 0..self.n_rows() {
            let record: Vec<String> = self
                .columns
                .iter()
                .map(|col| {
                    let v = col[r];
                    if v.is_nan() {
                        String::new()
                    } else {
                        format!("{v}")
                    }
                })
                .collect();
            w.write_record(&record).map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn schema(&self) -> &SurveySchema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn with_provenance(mut self, provenance: &str) -> Self {
        self.provenance = provenance.to_string();
        self
    }

    pub fn norm_bounds(&self) -> &BTreeMap<String, (f64, f64)> {
        &self.norm_bounds
    }

    fn column_position(&self, name: &str) -> Result<usize> {
        self.schema
            .columns()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn {
                column: name.to_string(),
            })
    }

    /// Raw column storage (NaN = missing).
    pub fn column(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.column_position(name)?])
    }

    pub fn value(&self, row: usize, name: &str) -> Result<Option<f64>> {
        let v = self.columns[self.column_position(name)?][row];
        Ok(if v.is_nan() { None } else { Some(v) })
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.schema.column(name).is_some()
    }

    /// Checks a column for missing values, returning the first offending row.
    pub fn require_complete(&self, name: &str) -> Result<()> {
        let col = self.column(name)?;
        if let Some(row) = col.iter().position(|v| v.is_nan()) {
            return Err(Error::MissingValues {
                column: name.to_string(),
                row: row + 1,
            });
        }
        Ok(())
    }

    /// Complete (no missing) outcome column as a plain vector.
    pub fn outcome_vector(&self, name: &str) -> Result<Vec<f64>> {
        if self.schema.column(name).is_none() {
            return Err(Error::TaskMissing {
                outcome: name.to_string(),
            });
        }
        self.require_complete(name)?;
        Ok(self.column(name)?.to_vec())
    }

    /// Dense row-major feature matrix in canonical feature order.
    ///
    /// Requires every feature column to be complete and normalized (no
    /// pending raw bounds).
    pub fn feature_matrix(&self) -> Result<Matrix> {
        let n = self.n_rows();
        let k = self.schema.features.len();
        for spec in &self.schema.features {
            if spec.bounds.is_some() {
                return Err(Error::SchemaMismatch {
                    detail: format!(
                        "feature {:?} still carries raw bounds; normalize it before model use",
                        spec.name
                    ),
                });
            }
            self.require_complete(&spec.name)?;
        }
        let mut data = vec![0.0; n * k];
        for (j, _) in self.schema.features.iter().enumerate() {
            let col = &self.columns[j];
            for (i, &v) in col.iter().enumerate() {
                data[i * k + j] = v;
            }
        }
        Ok(Matrix::from_vec(data, n, k))
    }

    /// Drops every row with a missing value in any of the required columns.
    /// Returns the retained dataset and the number of deleted rows.
    pub fn casewise_delete(&self, required: &[String]) -> Result<(Self, usize)> {
        let mut positions = Vec::with_capacity(required.len());
        for name in required {
            positions.push(self.column_position(name)?);
        }
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|&r| positions.iter().all(|&c| !self.columns[c][r].is_nan()))
            .collect();
        let deleted = self.n_rows() - keep.len();
        Ok((self.select_rows(&keep), deleted))
    }

    /// New dataset holding the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|col| idx.iter().map(|&i| col[i]).collect())
            .collect();
        SurveyDataset {
            schema: self.schema.clone(),
            columns,
            label: self.label.clone(),
            provenance: self.provenance.clone(),
            norm_bounds: self.norm_bounds.clone(),
        }
    }

    /// Min-max rescales the listed columns to [0, 1].
    ///
    /// Bounds are taken from `overrides` first, then the column's declared
    /// schema bounds, then the observed min/max. The applied bounds are
    /// recorded for [`SurveyDataset::denormalize`], and the column's schema
    /// entry drops its raw bounds so the result validates as a unit column.
    pub fn normalize_minmax(
        &self,
        columns: &[String],
        overrides: Option<&BTreeMap<String, (f64, f64)>>,
    ) -> Result<Self> {
        let mut out = self.clone();
        for name in columns {
            let pos = self.column_position(name)?;
            let spec = out
                .schema
                .columns()
                .nth(pos)
                .expect("position already validated")
                .clone();
            let observed = || -> Option<(f64, f64)> {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &v in &self.columns[pos] {
                    if !v.is_nan() {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                if lo.is_finite() {
                    Some((lo, hi))
                } else {
                    None
                }
            };
            let (lo, hi) = overrides
                .and_then(|m| m.get(name).copied())
                .or(spec.bounds)
                .or_else(observed)
                .ok_or(Error::EmptyDataset)?;
            if !(hi > lo) {
                return Err(Error::DegenerateBounds {
                    column: name.clone(),
                    lo,
                    hi,
                });
            }
            let col = &mut out.columns[pos];
            for (i, v) in col.iter_mut().enumerate() {
                if v.is_nan() {
                    continue;
                }
                if *v < lo || *v > hi {
                    return Err(Error::RangeViolation {
                        row: Some(i + 1),
                        column: name.clone(),
                        value: *v,
                        expected: format!("value within normalization bounds [{lo}, {hi}]"),
                    });
                }
                *v = (*v - lo) / (hi - lo);
            }
            out.norm_bounds.insert(name.clone(), (lo, hi));
            set_bounds(&mut out.schema, pos, None);
        }
        Ok(out)
    }

    /// Inverse of [`SurveyDataset::normalize_minmax`] using the stored bounds.
    pub fn denormalize(&self, columns: &[String]) -> Result<Self> {
        let mut out = self.clone();
        for name in columns {
            let pos = self.column_position(name)?;
            let (lo, hi) = *self
                .norm_bounds
                .get(name)
                .ok_or_else(|| Error::Config {
                    detail: format!("column {name:?} has no stored normalization bounds"),
                })?;
            for v in &mut out.columns[pos] {
                if !v.is_nan() {
                    *v = *v * (hi - lo) + lo;
                }
            }
            out.norm_bounds.remove(name);
            set_bounds(&mut out.schema, pos, Some((lo, hi)));
        }
        Ok(out)
    }

    /// Seeded disjoint, exhaustive train/test partition. The test share is
    /// `round(n * test_fraction)` clamped to [1, n-1]; row order within each
    /// part follows the original dataset.
    pub fn split_train_test(&self, test_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        let (train_idx, test_idx) = split_indices(self.n_rows(), test_fraction, seed)?;
        Ok((self.select_rows(&train_idx), self.select_rows(&test_idx)))
    }

    /// Projects the dataset onto another schema's columns (by name).
    pub fn project(&self, schema: &SurveySchema) -> Result<Self> {
        let mut columns = Vec::with_capacity(schema.n_columns());
        for spec in schema.columns() {
            columns.push(self.column(&spec.name)?.to_vec());
        }
        let mut norm_bounds = BTreeMap::new();
        for spec in schema.columns() {
            if let Some(b) = self.norm_bounds.get(&spec.name) {
                norm_bounds.insert(spec.name.clone(), *b);
            }
        }
        Ok(SurveyDataset {
            schema: schema.clone(),
            columns,
            label: self.label.clone(),
            provenance: self.provenance.clone(),
            norm_bounds,
        })
    }

    /// Returns a copy with an extra outcome-role column appended.
    pub fn with_outcome_column(&self, spec: FeatureSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.n_rows() {
            return Err(Error::ShapeMismatch {
                detail: format!(
                    "new column {:?} has {} rows, dataset has {}",
                    spec.name,
                    values.len(),
                    self.n_rows()
                ),
            });
        }
        let mut schema = self.schema.clone();
        schema.outcomes.push(spec);
        schema.validate()?;
        let mut columns = self.columns.clone();
        columns.push(values);
        let ds = SurveyDataset {
            schema,
            columns,
            label: self.label.clone(),
            provenance: self.provenance.clone(),
            norm_bounds: self.norm_bounds.clone(),
        };
        // validate only the new column
        let spec = ds.schema.outcomes.last().expect("just pushed");
        for (i, &v) in ds.columns.last().expect("just pushed").iter().enumerate() {
            if !v.is_nan() {
                spec.check_value(v, Some(i + 1))?;
            }
        }
        Ok(ds)
    }
}

fn set_bounds(schema: &mut SurveySchema, pos: usize, bounds: Option<(f64, f64)>) {
    let nf = schema.features.len();
    if pos < nf {
        schema.features[pos].bounds = bounds;
    } else {
        schema.outcomes[pos - nf].bounds = bounds;
    }
}

/// Seeded shuffle split of `0..n`; both halves are returned sorted so row
/// order is independent of the shuffle. Deterministic per seed.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InsufficientData {
            detail: format!("cannot split {n} row(s) into train and test"),
        });
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config {
            detail: format!("test_fraction must lie in (0, 1), got {test_fraction}"),
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let test_n = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut test: Vec<usize> = idx[..test_n].to_vec();
    let mut train: Vec<usize> = idx[test_n..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}
