//! Model-agnostic explanations: permutation importance and partial dependence.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::extract::quantiles;
use crate::learn::{rmse, Predictor};
use crate::rng::RngStream;

pub const DEFAULT_SHUFFLES: usize = 10;
pub const DEFAULT_GRID_SIZE: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceEntry {
    pub feature: String,
    /// Mean increase in test RMSE when the column is permuted.
    pub importance: f64,
    /// Standard error of that mean over shuffles (0 for a single shuffle).
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    /// Sorted by decreasing importance.
    pub entries: Vec<ImportanceEntry>,
    pub shuffles: usize,
    pub seed: u64,
    pub baseline_rmse: f64,
}

impl ImportanceReport {
    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.feature == feature)
    }

    pub fn importance_of(&self, feature: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.feature == feature)
            .map(|e| e.importance)
    }

    /// `feature,importance`
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "feature,importance")?;
        for e in &self.entries {
            writeln!(out, "{},{}", e.feature, e.importance)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// For each model feature, the mean over `shuffles` permutations of the
/// column of `RMSE(permuted) − RMSE(original)` on `ds_test`.
///
/// Permutation `s` of the model's `k`-th feature comes from stream
/// `(seed, k·2³² + s)`, so results do not depend on the dataset's column order.
pub fn permutation_importance<P: Predictor + ?Sized>(
    model: &P,
    ds_test: &Dataset,
    shuffles: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if shuffles == 0 {
        return Err(Error::InvalidParameter(
            "shuffles must be at least 1".into(),
        ));
    }
    let y = ds_test.target_values();
    let frame = ds_test.frame();
    let baseline_rmse = rmse(y, &model.predict_frame(frame)?)?;
    let mut entries = Vec::with_capacity(model.feature_names().len());
    for (k, feature) in model.feature_names().iter().enumerate() {
        let original = frame.values(feature)?;
        let mut deltas = Vec::with_capacity(shuffles);
        for s in 0..shuffles {
            let mut rng = RngStream::new(seed, ((k as u64) << 32) | s as u64);
            let mut permuted = original.to_vec();
            rng.shuffle(&mut permuted);
            let shuffled = frame.with_values(feature, permuted)?;
            deltas.push(rmse(y, &model.predict_frame(&shuffled)?)? - baseline_rmse);
        }
        let n = deltas.len() as f64;
        let importance = deltas.iter().sum::<f64>() / n;
        let std_error = if deltas.len() > 1 {
            let var = deltas.iter().map(|d| (d - importance).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        entries.push(ImportanceEntry {
            feature: feature.clone(),
            importance,
            std_error,
        });
    }
    entries.sort_by(|a, b| b.importance.total_cmp(&a.importance));
    Ok(ImportanceReport {
        entries,
        shuffles,
        seed,
        baseline_rmse,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdpCurve {
    pub feature: String,
    /// Strictly ascending.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl PdpCurve {
    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        self.grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
            .map_or(0, |(i, _)| i)
    }

    /// `grid,value`
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_table(&["grid", "value"], &[&self.grid, &self.values], path)
    }
}

/// Mean prediction over `ds` with `feature` forced to each grid value. The
/// grid is the feature's empirical quantiles at `grid_size` equally spaced
/// probabilities in `[0.01, 0.99]`, with repeated values dropped.
pub fn partial_dependence<P: Predictor + ?Sized>(
    model: &P,
    ds: &Dataset,
    feature: &str,
    grid_size: usize,
) -> Result<PdpCurve> {
    if grid_size < 2 {
        return Err(Error::InvalidParameter(
            "grid size must be at least 2".into(),
        ));
    }
    let frame = ds.frame();
    let values = frame.values(feature)?;
    if values.iter().all(|&v| v == values[0]) {
        return Err(Error::DegenerateVariance(feature.to_string()));
    }
    let probs: Vec<f64> = (0..grid_size)
        .map(|i| 0.01 + 0.98 * i as f64 / (grid_size - 1) as f64)
        .collect();
    let mut grid = quantiles(values, &probs)?;
    grid.dedup();
    let n = frame.n_rows() as f64;
    let values = grid
        .iter()
        .map(|&g| {
            let forced = frame.with_values(feature, vec![g; frame.n_rows()])?;
            Ok(model.predict_frame(&forced)?.iter().sum::<f64>() / n)
        })
        .collect::<Result<_>>()?;
    Ok(PdpCurve {
        feature: feature.to_string(),
        grid,
        values,
    })
}
