use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Frame};
use crate::error::{Error, Result};
use crate::learn::{ForestModel, GbtModel, LassoModel, RegressionTree};

/// A fitted model that resolves its inputs by column name.
pub trait Predictor {
    fn feature_names(&self) -> &[String];

    /// Predicts one row whose entries follow [`feature_names`](Self::feature_names).
    fn predict_row(&self, row: &[f64]) -> f64;

    fn predict_frame(&self, frame: &Frame) -> Result<Vec<f64>> {
        let columns: Vec<&[f64]> = self
            .feature_names()
            .iter()
            .map(|name| frame.values(name))
            .collect::<Result<_>>()?;
        let mut row = vec![0.0; columns.len()];
        Ok((0..frame.n_rows())
            .map(|i| {
                for (slot, column) in row.iter_mut().zip(&columns) {
                    *slot = column[i];
                }
                self.predict_row(&row)
            })
            .collect())
    }

    /// Extra columns, including the target, are ignored.
    fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        self.predict_frame(ds.frame())
    }
}

impl Predictor for RegressionTree {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        self.root.predict_row(row)
    }
}

impl Predictor for ForestModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        ForestModel::predict_row(self, row)
    }
}

impl Predictor for GbtModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        GbtModel::predict_row(self, row)
    }
}

impl Predictor for LassoModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        LassoModel::predict_row(self, row)
    }
}

/// Any serialisable model. The JSON carries a `type` tag of `tree`,
/// `forest`, `gbt` or `lasso`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Model {
    Tree(RegressionTree),
    Forest(ForestModel),
    Gbt(GbtModel),
    Lasso(LassoModel),
}

impl Model {
    fn inner(&self) -> &dyn Predictor {
        match self {
            Model::Tree(m) => m,
            Model::Forest(m) => m,
            Model::Gbt(m) => m,
            Model::Lasso(m) => m,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.is_file() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Predictor for Model {
    fn feature_names(&self) -> &[String] {
        self.inner().feature_names()
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        self.inner().predict_row(row)
    }
}

pub fn predict<P: Predictor + ?Sized>(model: &P, ds: &Dataset) -> Result<Vec<f64>> {
    model.predict(ds)
}

pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sse: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok((sse / y_true.len() as f64).sqrt())
}
