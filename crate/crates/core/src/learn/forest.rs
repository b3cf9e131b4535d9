use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learn::tree::{grow, FeatureMatrix, GrowParams, TreeNode};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub feature_names: Vec<String>,
    pub mtry: usize,
    pub bootstrap_seed: u64,
    pub trees: Vec<TreeNode>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub mtry: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
    /// Draw a size-`n` resample with replacement for each tree.
    pub bootstrap: bool,
}

impl ForestParams {
    /// 200 trees, `mtry = ⌈p/3⌉`, leaves of at least 5 rows.
    pub fn defaults_for(n_features: usize) -> Self {
        Self {
            n_trees: 200,
            mtry: n_features.div_ceil(3).max(1),
            max_depth: 12,
            min_leaf: 5,
            seed: 42,
            bootstrap: true,
        }
    }
}

/// Random forest with the default leaf size and bootstrap resampling.
pub fn fit_forest(
    ds: &Dataset,
    n_trees: usize,
    mtry: usize,
    max_depth: usize,
    seed: u64,
) -> Result<ForestModel> {
    fit_forest_with(
        ds,
        &ForestParams {
            n_trees,
            mtry,
            max_depth,
            seed,
            ..ForestParams::defaults_for(1)
        },
    )
}

/// Tree `t` draws its bootstrap sample and split candidates from stream
/// `(seed, t)`.
pub fn fit_forest_with(ds: &Dataset, params: &ForestParams) -> Result<ForestModel> {
    let feature_names = ds.feature_names();
    let p = feature_names.len();
    if params.mtry == 0 || params.mtry > p {
        return Err(Error::InvalidMtry {
            mtry: params.mtry,
            n_features: p,
        });
    }
    let n = ds.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            actual: n,
        });
    }
    let matrix = FeatureMatrix::from_dataset(ds, &feature_names)?;
    let targets = ds.target_values();
    let grow_params = GrowParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        mtry: Some(params.mtry),
    };
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = RngStream::new(params.seed, t as u64);
            let mut weights = vec![0.0; n];
            if params.bootstrap {
                for _ in 0..n {
                    weights[rng.below(n)] += 1.0;
                }
            } else {
                weights.fill(1.0);
            }
            grow(&matrix, targets, &weights, grow_params, Some(&mut rng))
        })
        .collect();
    Ok(ForestModel {
        feature_names,
        mtry: params.mtry,
        bootstrap_seed: params.seed,
        trees,
    })
}

impl ForestModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}
