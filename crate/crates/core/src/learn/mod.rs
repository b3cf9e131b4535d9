//! From-scratch regression learners.

mod forest;
mod gbt;
mod lasso;
mod model;
mod tree;

pub use forest::{fit_forest, fit_forest_with, ForestModel, ForestParams};
pub use gbt::{fit_gbt, fit_gbt_traced, GbtModel, GbtParams};
pub use lasso::{fit_lasso, kkt_violation, lambda_max, LassoModel};
pub use model::{predict, rmse, Model, Predictor};
pub use tree::{fit_tree, RegressionTree, TreeNode};
