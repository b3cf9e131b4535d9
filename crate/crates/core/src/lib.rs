//! Statistically enhanced learning: build covariates as statistical
//! estimates from raw processes, images, text and match records, then measure
//! what they add to a learner.
//!
//! Columns carry a [`SelLevel`] tag recording how they were produced:
//! observed (`Raw`), a proxy (`Proxy`), a descriptive summary
//! (`Descriptive`, see [`extract`]) or a model-based estimate (`Estimated`,
//! see [`estimate`]). [`learn`] provides the regressors, [`explain`] the
//! permutation importance and partial dependence used to interpret them, and
//! [`simbench`] the Monte Carlo study comparing a baseline with learners
//! given an estimated covariate.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod estimate;
pub mod explain;
pub mod extract;
pub mod io;
pub mod learn;
pub mod raster;
pub mod rng;
pub mod simbench;

pub use data::{
    split, standardize, unstandardize, Column, ColumnScaling, Dataset, Frame, Process, SelLevel,
    SplitSpec,
};
pub use error::{Error, Result};
pub use io::{read_csv, read_frame, write_csv, write_frame, write_table};
pub use learn::{Model, Predictor};
pub use raster::RasterImage;
pub use rng::{sample_cauchy, sample_normal, RngStream};

pub use nalgebra;
