use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learn::tree::{grow, FeatureMatrix, GrowParams, TreeNode};
use crate::rng::RngStream;

/// Squared-loss gradient boosting:
/// `ŷ = init_value + learning_rate · Σ tree(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub learning_rate: f64,
    pub init_value: f64,
    pub feature_names: Vec<String>,
    pub trees: Vec<TreeNode>,
}

impl GbtModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.init_value
            + self.learning_rate * self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    /// Fraction of features offered at each split; 1 disables subsampling.
    pub colsample: f64,
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 3,
            learning_rate: 0.1,
            min_leaf: 1,
            colsample: 1.0,
            seed: 42,
        }
    }
}

pub fn fit_gbt(
    ds: &Dataset,
    n_trees: usize,
    max_depth: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<GbtModel> {
    let params = GbtParams {
        n_trees,
        max_depth,
        learning_rate,
        seed,
        ..GbtParams::default()
    };
    Ok(fit_gbt_traced(ds, &params)?.0)
}

/// Fits a boosted ensemble and returns the training mean squared error
/// after initialisation and after every round.
pub fn fit_gbt_traced(ds: &Dataset, params: &GbtParams) -> Result<(GbtModel, Vec<f64>)> {
    if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) {
        return Err(Error::InvalidRate(params.learning_rate));
    }
    if !(params.colsample > 0.0 && params.colsample <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "colsample {} outside (0, 1]",
            params.colsample
        )));
    }
    let n = ds.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            actual: n,
        });
    }
    let feature_names = ds.feature_names();
    let p = feature_names.len();
    let matrix = FeatureMatrix::from_dataset(ds, &feature_names)?;
    let y = ds.target_values();
    let init_value = y.iter().sum::<f64>() / n as f64;
    let mut prediction = vec![init_value; n];
    let mut residual = vec![0.0; n];
    let weights = vec![1.0; n];
    let mse = |pred: &[f64]| {
        pred.iter()
            .zip(y)
            .map(|(f, y)| (y - f).powi(2))
            .sum::<f64>()
            / n as f64
    };
    let mut losses = vec![mse(&prediction)];

    let mtry = ((params.colsample * p as f64).ceil() as usize).clamp(1, p.max(1));
    let mut rng = RngStream::new(params.seed, 0);
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        for i in 0..n {
            residual[i] = y[i] - prediction[i];
        }
        let tree = grow(
            &matrix,
            &residual,
            &weights,
            GrowParams {
                max_depth: params.max_depth,
                min_leaf: params.min_leaf,
                mtry: (mtry < p).then_some(mtry),
            },
            Some(&mut rng),
        );
        for (i, pred) in prediction.iter_mut().enumerate() {
            *pred += params.learning_rate * tree.predict_column_major(&matrix.columns, i);
        }
        losses.push(mse(&prediction));
        trees.push(tree);
    }
    Ok((
        GbtModel {
            learning_rate: params.learning_rate,
            init_value,
            feature_names,
            trees,
        },
        losses,
    ))
}
