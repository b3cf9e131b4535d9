use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::extract::quantiles;

const GRADIENT_TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 200;
const MAX_HALVINGS: usize = 60;

/// Joint maximum-likelihood estimate of a Cauchy location and scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyFit {
    pub location: f64,
    pub scale: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Euclidean norm of the score with respect to `(location, ln scale)`.
    pub gradient_norm: f64,
}

impl CauchyFit {
    /// `FailedConvergence` unless the fit converged.
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::FailedConvergence {
                iterations: self.iterations,
            })
        }
    }
}

pub fn cauchy_log_likelihood(zs: &[f64], location: f64, scale: f64) -> f64 {
    let n = zs.len() as f64;
    -n * (PI * scale).ln()
        - zs.iter()
            .map(|&z| {
                let u = (z - location) / scale;
                u.mul_add(u, 1.0).ln()
            })
            .sum::<f64>()
}

/// Score of the log-likelihood with respect to `(location, ln scale)`.
pub fn cauchy_score(zs: &[f64], location: f64, scale: f64) -> [f64; 2] {
    let mut g = [0.0, -(zs.len() as f64)];
    for &z in zs {
        let u = (z - location) / scale;
        let d = u.mul_add(u, 1.0);
        g[0] += 2.0 * u / (scale * d);
        g[1] += 2.0 * u * u / d;
    }
    g
}

/// Score and Hessian with respect to `(location, ln scale)`.
fn score_and_hessian(zs: &[f64], location: f64, scale: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut g = [0.0, -(zs.len() as f64)];
    let (mut h_mm, mut h_ms, mut h_ss) = (0.0, 0.0, 0.0);
    for &z in zs {
        let u = (z - location) / scale;
        let d = u.mul_add(u, 1.0);
        let d2 = d * d;
        g[0] += 2.0 * u / d;
        g[1] += 2.0 * u * u / d;
        h_mm += 2.0 * (u * u - 1.0) / d2;
        h_ms -= 4.0 * u / d2;
        h_ss -= 4.0 * u * u / d2;
    }
    g[0] /= scale;
    let h = [[h_mm / (scale * scale), h_ms / scale], [h_ms / scale, h_ss]];
    (g, h)
}

/// Maximum-likelihood Cauchy fit by Newton–Raphson on `(μ, ln γ)`.
///
/// Starts from the median and half the interquartile range. When the Hessian
/// is not negative definite the step falls back to the score direction, and
/// any step that lowers the likelihood is halved until it does not. A fit
/// that exhausts the iteration budget is returned with `converged == false`.
pub fn cauchy_mle(zs: &[f64]) -> Result<CauchyFit> {
    if zs.len() < 3 {
        return Err(Error::TooShort {
            required: 3,
            actual: zs.len(),
        });
    }
    if zs.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidParameter("non-finite observation".into()));
    }
    let q = quantiles(zs, &[0.25, 0.5, 0.75])?;
    let mut location = q[1];
    let mut scale = 0.5 * (q[2] - q[0]);
    if !(scale > 0.0) {
        scale = zs.iter().map(|z| (z - location).abs()).sum::<f64>() / zs.len() as f64;
        if !(scale > 0.0) {
            return Err(Error::DegenerateVariance("process".into()));
        }
    }

    let mut log_lik = cauchy_log_likelihood(zs, location, scale);
    let mut iterations = 0;
    loop {
        let (g, h) = score_and_hessian(zs, location, scale);
        let gradient_norm = g[0].hypot(g[1]);
        if gradient_norm < GRADIENT_TOLERANCE || iterations >= MAX_ITERATIONS {
            return Ok(CauchyFit {
                location,
                scale,
                log_likelihood: log_lik,
                iterations,
                converged: gradient_norm < GRADIENT_TOLERANCE,
                gradient_norm,
            });
        }
        iterations += 1;

        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let mut step = if h[0][0] < 0.0 && det > 0.0 {
            // −H⁻¹g
            [
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
            ]
        } else {
            let n = zs.len() as f64;
            [g[0] * scale * scale / n, g[1] / n]
        };

        // Near the optimum the change in log-likelihood drops below its
        // rounding error; allow that much slack so Newton can finish.
        let slack = 1e-12 * (1.0 + log_lik.abs());
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand_location = location + step[0];
            let cand_scale = scale * step[1].exp();
            let cand = cauchy_log_likelihood(zs, cand_location, cand_scale);
            if cand_scale > 0.0 && cand >= log_lik - slack {
                location = cand_location;
                scale = cand_scale;
                log_lik = cand;
                accepted = true;
                break;
            }
            step = [0.5 * step[0], 0.5 * step[1]];
        }
        if !accepted {
            // No ascent possible at working precision.
            return Ok(CauchyFit {
                location,
                scale,
                log_likelihood: log_lik,
                iterations,
                converged: gradient_norm < GRADIENT_TOLERANCE,
                gradient_norm,
            });
        }
    }
}

/// Arithmetic mean of the whole process.
pub fn empirical_mean_feature(zs: &[f64]) -> Result<f64> {
    if zs.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(zs.iter().sum::<f64>() / zs.len() as f64)
}
