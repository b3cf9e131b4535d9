use nalgebra::{DMatrix, DVector};

use crate::data::{Column, SelLevel};
use crate::error::{Error, Result};

const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares fit with the intercept first in `coefficients`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub residual_variance: f64,
    pub fitted: Vec<f64>,
}

impl LinearFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.coefficients[1..]
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        if x.ncols() + 1 != self.coefficients.len() {
            return Err(Error::LengthMismatch(
                x.ncols() + 1,
                self.coefficients.len(),
            ));
        }
        Ok((0..x.nrows())
            .map(|i| {
                self.coefficients[0]
                    + self
                        .slopes()
                        .iter()
                        .enumerate()
                        .map(|(j, b)| b * x[(i, j)])
                        .sum::<f64>()
            })
            .collect())
    }
}

/// Ordinary least squares of `y` on `[1 | x]` via Householder QR.
///
/// Fails with `RankDeficient` when a diagonal entry of R falls below
/// `1e-10` times the largest one.
pub fn ols(x: &DMatrix<f64>, y: &[f64]) -> Result<LinearFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::LengthMismatch(y.len(), n));
    }
    if n <= p + 1 {
        return Err(Error::TooFewRows {
            required: p + 2,
            actual: n,
        });
    }
    let design = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let qr = design.clone().qr();
    let r = qr.r();
    let max_diag = r.diagonal().amax();
    if !(max_diag > 0.0)
        || r.diagonal()
            .iter()
            .any(|d| d.abs() <= RANK_TOLERANCE * max_diag)
    {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * DVector::from_column_slice(y);
    let beta = r.solve_upper_triangular(&qty).ok_or(Error::RankDeficient)?;
    let fitted = &design * &beta;
    let rss: f64 = fitted.iter().zip(y).map(|(f, y)| (y - f).powi(2)).sum();
    Ok(LinearFit {
        coefficients: beta.iter().copied().collect(),
        residual_variance: rss / (n - p - 1) as f64,
        fitted: fitted.iter().copied().collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageFit {
    /// `z` regressed on the instruments.
    pub first_stage: LinearFit,
    /// `y` regressed on `[x, ẑ]`; the last slope is the coefficient of `ẑ`.
    pub second_stage: LinearFit,
    /// First-stage fitted values, tagged as an estimated covariate.
    pub instrumented: Column,
}

/// Two-stage least squares: regress `z` on `w`, then `y` on `[x, ẑ]`.
pub fn two_stage_least_squares(
    y: &[f64],
    x: &DMatrix<f64>,
    z: &[f64],
    w: &DMatrix<f64>,
) -> Result<TwoStageFit> {
    if x.nrows() != y.len() || w.nrows() != y.len() || z.len() != y.len() {
        return Err(Error::LengthMismatch(x.nrows(), y.len()));
    }
    let first_stage = ols(w, z)?;
    let z_hat = first_stage.fitted.clone();
    let augmented = DMatrix::from_fn(x.nrows(), x.ncols() + 1, |i, j| {
        if j < x.ncols() {
            x[(i, j)]
        } else {
            z_hat[i]
        }
    });
    let second_stage = ols(&augmented, y)?;
    Ok(TwoStageFit {
        first_stage,
        second_stage,
        instrumented: Column::new("z_hat", z_hat, SelLevel::Estimated),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn exact_line() {
        let x = DMatrix::from_column_slice(5, 1, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let y: Vec<f64> = (0..5).map(|i| 2.0 * i as f64 + 1.0).collect();
        let fit = ols(&x, &y).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-10);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-10);
        assert!(fit.residual_variance < 1e-20);
    }

    #[test]
    fn duplicated_column_is_rank_deficient() {
        let col = [0.3, 1.2, -0.7, 2.2, 0.1, 0.9];
        let x = DMatrix::from_fn(6, 2, |i, _| col[i]);
        assert!(matches!(ols(&x, &[1.0; 6]), Err(Error::RankDeficient)));
    }

    #[test]
    fn residuals_orthogonal_to_columns() {
        let mut rng = RngStream::new(21, 0);
        let (n, p) = (60, 3);
        let x = DMatrix::from_fn(n, p, |_, _| rng.standard_normal());
        let y: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let fit = ols(&x, &y).unwrap();
        let resid: Vec<f64> = y.iter().zip(&fit.fitted).map(|(y, f)| y - f).collect();
        assert!(resid.iter().sum::<f64>().abs() < 1e-8);
        for j in 0..p {
            let dot: f64 = (0..n).map(|i| x[(i, j)] * resid[i]).sum();
            assert!(dot.abs() < 1e-8);
        }
    }

    #[test]
    fn perfect_instrument_reduces_to_ols() {
        let mut rng = RngStream::new(4, 0);
        let n = 50;
        let x = DMatrix::from_fn(n, 2, |_, _| rng.standard_normal());
        let z: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 1.0 + x[(i, 0)] - 2.0 * x[(i, 1)] + 0.5 * z[i] + rng.standard_normal())
            .collect();
        let w = DMatrix::from_column_slice(n, 1, &z);
        let tsls = two_stage_least_squares(&y, &x, &z, &w).unwrap();
        let full = DMatrix::from_fn(n, 3, |i, j| if j < 2 { x[(i, j)] } else { z[i] });
        let direct = ols(&full, &y).unwrap();
        for (a, b) in tsls
            .second_stage
            .coefficients
            .iter()
            .zip(&direct.coefficients)
        {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(tsls.instrumented.sel_level, SelLevel::Estimated);
    }

    #[test]
    fn noiseless_exact_recovery() {
        let mut rng = RngStream::new(8, 0);
        let n = 40;
        let x = DMatrix::from_fn(n, 1, |_, _| rng.standard_normal());
        let w = DMatrix::from_fn(n, 2, |_, _| rng.standard_normal());
        let z: Vec<f64> = (0..n).map(|i| 0.5 + 2.0 * w[(i, 0)] - w[(i, 1)]).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| -1.0 + 3.0 * x[(i, 0)] + 1.5 * z[i])
            .collect();
        let fit = two_stage_least_squares(&y, &x, &z, &w).unwrap();
        let expected = [-1.0, 3.0, 1.5];
        for (a, b) in fit.second_stage.coefficients.iter().zip(expected) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
