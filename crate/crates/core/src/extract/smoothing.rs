use crate::error::{Error, Result};

/// Exponentially weighted moving average path, seeded with the first value:
/// `s₀ = x₀`, `s_t = α·x_t + (1 − α)·s_{t−1}`.
pub fn ewma(xs: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let (&first, rest) = xs.split_first().ok_or(Error::EmptyInput)?;
    let mut out = Vec::with_capacity(xs.len());
    out.push(first);
    let mut state = first;
    for &x in rest {
        state = alpha * x + (1.0 - alpha) * state;
        out.push(state);
    }
    Ok(out)
}

/// Span convention: a window of `w` observations maps to `α = 2 / (w + 1)`.
pub fn window_to_alpha(window: usize) -> Result<f64> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    Ok(2.0 / (window as f64 + 1.0))
}
