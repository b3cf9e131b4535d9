//! Column-labelled numeric data with SEL provenance tags.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// How a column came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelLevel {
    /// Observed directly.
    Raw,
    /// Level 1: a proxy for an unobservable signal.
    Proxy,
    /// Level 2: a descriptive summary (moments, quantiles, counts).
    Descriptive,
    /// Level 3: a model-based estimate (MLE, EWMA, instrumented variable).
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    pub sel_level: SelLevel,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>, sel_level: SelLevel) -> Self {
        Self {
            name: name.into(),
            values,
            sel_level,
        }
    }

    pub fn raw(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self::new(name, values, SelLevel::Raw)
    }
}

/// An ordered set of equal-length, uniquely named, finite columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    columns: Vec<Column>,
    n_rows: usize,
}

impl Frame {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let first = columns
            .first()
            .ok_or_else(|| Error::InvalidDataset("no columns".into()))?;
        let n_rows = first.values.len();
        if n_rows == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        let mut seen = HashSet::new();
        for column in &columns {
            if !seen.insert(column.name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate column `{}`",
                    column.name
                )));
            }
            if column.values.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "column `{}` has {} rows, expected {n_rows}",
                    column.name,
                    column.values.len()
                )));
            }
            if let Some(row) = column.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    column: column.name.clone(),
                    row,
                });
            }
        }
        Ok(Self { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Values of a named column, or `MissingFeature`.
    pub fn values(&self, name: &str) -> Result<&[f64]> {
        self.column(name)
            .map(|c| c.values.as_slice())
            .ok_or_else(|| Error::MissingFeature(name.to_string()))
    }

    pub fn push(&mut self, column: Column) -> Result<()> {
        let mut columns = std::mem::take(&mut self.columns);
        columns.push(column);
        *self = Frame::new(columns)?;
        Ok(())
    }

    /// Copy with `name` overwritten by `values`.
    pub fn with_values(&self, name: &str, values: Vec<f64>) -> Result<Frame> {
        let mut out = self.clone();
        let column = out
            .columns
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::MissingFeature(name.to_string()))?;
        if values.len() != self.n_rows {
            return Err(Error::LengthMismatch(values.len(), self.n_rows));
        }
        column.values = values;
        Ok(out)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Frame> {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                values: rows.iter().map(|&r| c.values[r]).collect(),
                sel_level: c.sel_level,
            })
            .collect();
        Frame::new(columns)
    }
}

/// A frame with one designated target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    frame: Frame,
    target: String,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, target: impl Into<String>) -> Result<Self> {
        Self::from_frame(Frame::new(columns)?, target)
    }

    pub fn from_frame(frame: Frame, target: impl Into<String>) -> Result<Self> {
        let target = target.into();
        if frame.column(&target).is_none() {
            return Err(Error::MissingTarget(target));
        }
        Ok(Self { frame, target })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn into_frame(self) -> Frame {
        self.frame
    }

    pub fn n_rows(&self) -> usize {
        self.frame.n_rows
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn target_values(&self) -> &[f64] {
        self.frame
            .values(&self.target)
            .expect("target presence is a construction invariant")
    }

    pub fn columns(&self) -> &[Column] {
        self.frame.columns()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.frame.column(name)
    }

    /// Every non-target column name, in column order.
    pub fn feature_names(&self) -> Vec<String> {
        self.frame
            .names()
            .filter(|n| *n != self.target)
            .map(str::to_string)
            .collect()
    }

    pub fn with_column(mut self, column: Column) -> Result<Self> {
        self.frame.push(column)?;
        Ok(self)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        Ok(Dataset {
            frame: self.frame.select_rows(rows)?,
            target: self.target.clone(),
        })
    }
}

/// The observed realisation of one individual's latent process.
#[derive(Debug, Clone, PartialEq)]
pub struct Process {
    pub id: usize,
    values: Vec<f64>,
}

impl Process {
    pub fn new(id: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                required: 2,
                actual: values.len(),
            });
        }
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                column: format!("process {id}"),
                row,
            });
        }
        Ok(Self { id, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub shuffle_seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            shuffle_seed: 42,
        }
    }
}

impl SplitSpec {
    /// Row indices of the (train, test) partitions, each in ascending order.
    pub fn partition(&self, n_rows: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let degenerate = || Error::DegenerateSplit {
            n_rows,
            train_fraction: self.train_fraction,
        };
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(degenerate());
        }
        let n_train = (self.train_fraction * n_rows as f64).floor() as usize;
        if n_train == 0 || n_train >= n_rows {
            return Err(degenerate());
        }
        let mut order: Vec<usize> = (0..n_rows).collect();
        RngStream::new(self.shuffle_seed, 0).shuffle(&mut order);
        let mut train = order[..n_train].to_vec();
        let mut test = order[n_train..].to_vec();
        train.sort_unstable();
        test.sort_unstable();
        Ok((train, test))
    }
}

/// Shuffled train/test split with sizes `⌊f·n⌋` and `n − ⌊f·n⌋`.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = spec.partition(ds.n_rows())?;
    Ok((ds.select_rows(&train)?, ds.select_rows(&test)?))
}

/// Location and scale removed from a column by [`standardize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub mean: f64,
    pub sd: f64,
}

impl ColumnScaling {
    pub fn fit(name: &str, values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::DegenerateVariance(name.to_string()));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        if !(sd > 0.0) || values.iter().all(|&v| v == values[0]) {
            return Err(Error::DegenerateVariance(name.to_string()));
        }
        Ok(Self { mean, sd })
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.sd + self.mean
    }
}

/// Centres and scales every column not in `exclude` to mean 0 and sample sd 1.
pub fn standardize(
    ds: &Dataset,
    exclude: &[&str],
) -> Result<(Dataset, Vec<(String, ColumnScaling)>)> {
    let mut stats = Vec::new();
    let mut columns = Vec::with_capacity(ds.columns().len());
    for column in ds.columns() {
        if exclude.contains(&column.name.as_str()) {
            columns.push(column.clone());
            continue;
        }
        let scaling = ColumnScaling::fit(&column.name, &column.values)?;
        columns.push(Column {
            name: column.name.clone(),
            values: column.values.iter().map(|&v| scaling.apply(v)).collect(),
            sel_level: column.sel_level,
        });
        stats.push((column.name.clone(), scaling));
    }
    Ok((Dataset::new(columns, ds.target())?, stats))
}

/// Inverse of [`standardize`].
pub fn unstandardize(ds: &Dataset, stats: &[(String, ColumnScaling)]) -> Result<Dataset> {
    let mut columns = ds.columns().to_vec();
    for (name, scaling) in stats {
        let column = columns
            .iter_mut()
            .find(|c| &c.name == name)
            .ok_or_else(|| Error::MissingFeature(name.clone()))?;
        for v in &mut column.values {
            *v = scaling.invert(*v);
        }
    }
    Dataset::new(columns, ds.target())
}
