use serde::{Deserialize, Serialize};

use crate::data::{ColumnScaling, Dataset};
use crate::error::{Error, Result};

const COEFFICIENT_TOLERANCE: f64 = 1e-7;
const MAX_SWEEPS: usize = 100_000;

/// L1-penalised least squares on standardised predictors.
///
/// `coefficients` live on the standardised scale and `intercept` is the
/// training mean of the target, so a prediction is
/// `intercept + Σ βⱼ (xⱼ − meanⱼ) / sdⱼ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoModel {
    pub feature_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub scaling: Vec<ColumnScaling>,
    #[serde(default)]
    pub sweeps: usize,
}

impl LassoModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(&self.scaling)
                .zip(row)
                .map(|((b, s), x)| b * s.apply(*x))
                .sum::<f64>()
    }

    /// Coefficients on the original feature scale.
    pub fn original_coefficients(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(&self.scaling)
            .map(|(b, s)| b / s.sd)
            .collect()
    }

    pub fn original_intercept(&self) -> f64 {
        self.intercept
            - self
                .coefficients
                .iter()
                .zip(&self.scaling)
                .map(|(b, s)| b * s.mean / s.sd)
                .sum::<f64>()
    }
}

pub(crate) fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// Smallest penalty at which every coefficient is zero: `max_j |zⱼᵀ(y − ȳ)| / n`
/// over standardised columns `zⱼ`.
pub fn lambda_max(ds: &Dataset) -> Result<f64> {
    let (columns, _, centred) = standardized_design(ds)?;
    let n = ds.n_rows() as f64;
    Ok(columns
        .iter()
        .map(|z| {
            z.iter()
                .zip(&centred)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs()
                / n
        })
        .fold(0.0, f64::max))
}

type Design = (Vec<Vec<f64>>, Vec<ColumnScaling>, Vec<f64>);

fn standardized_design(ds: &Dataset) -> Result<Design> {
    let names = ds.feature_names();
    let mut columns = Vec::with_capacity(names.len());
    let mut scaling = Vec::with_capacity(names.len());
    for name in &names {
        let values = ds.frame().values(name)?;
        let s = ColumnScaling::fit(name, values)?;
        columns.push(values.iter().map(|&v| s.apply(v)).collect());
        scaling.push(s);
    }
    let y = ds.target_values();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    Ok((columns, scaling, y.iter().map(|v| v - mean).collect()))
}

/// Cyclic coordinate descent on `(1/2n)‖y − Xβ‖² + λ‖β‖₁`, stopping once a
/// full sweep moves no coefficient by more than `1e-7`.
pub fn fit_lasso(ds: &Dataset, lambda: f64) -> Result<LassoModel> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda {lambda} < 0")));
    }
    let (columns, scaling, mut residual) = standardized_design(ds)?;
    let y = ds.target_values();
    let n = y.len() as f64;
    let intercept = y.iter().sum::<f64>() / n;
    let curvature: Vec<f64> = columns
        .iter()
        .map(|z| z.iter().map(|v| v * v).sum::<f64>() / n)
        .collect();
    let mut beta = vec![0.0; columns.len()];
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for (j, z) in columns.iter().enumerate() {
            let old = beta[j];
            let rho =
                z.iter().zip(&residual).map(|(a, r)| a * r).sum::<f64>() / n + curvature[j] * old;
            let new = soft_threshold(rho, lambda) / curvature[j];
            let delta = new - old;
            if delta != 0.0 {
                for (r, a) in residual.iter_mut().zip(z) {
                    *r -= a * delta;
                }
                beta[j] = new;
            }
            max_change = max_change.max(delta.abs());
        }
        if max_change < COEFFICIENT_TOLERANCE {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::FailedConvergence { iterations: sweeps });
        }
    }
    Ok(LassoModel {
        feature_names: ds.feature_names(),
        coefficients: beta,
        intercept,
        lambda,
        scaling,
        sweeps,
    })
}

/// Largest KKT violation of a fitted model on its training data:
/// `|zⱼᵀr/n − λ·sign(βⱼ)|` for active coordinates and
/// `max(0, |zⱼᵀr/n| − λ)` for inactive ones.
pub fn kkt_violation(model: &LassoModel, ds: &Dataset) -> Result<f64> {
    let (columns, _, centred) = standardized_design(ds)?;
    let n = ds.n_rows() as f64;
    let mut residual = centred;
    for (z, b) in columns.iter().zip(&model.coefficients) {
        for (r, a) in residual.iter_mut().zip(z) {
            *r -= a * b;
        }
    }
    Ok(columns
        .iter()
        .zip(&model.coefficients)
        .map(|(z, &b)| {
            let g = z.iter().zip(&residual).map(|(a, r)| a * r).sum::<f64>() / n;
            if b != 0.0 {
                (g - model.lambda * b.signum()).abs()
            } else {
                (g.abs() - model.lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max))
}
