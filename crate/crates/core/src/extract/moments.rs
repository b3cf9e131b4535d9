use crate::error::{Error, Result};

/// Mean, sample variance and the population shape coefficients of a sample.
///
/// Variance uses the `n − 1` denominator. Skewness is `g₁ = m₃ / m₂^{3/2}` and
/// kurtosis is the excess `g₂ = m₄ / m₂² − 3`, both from population central
/// moments `m_k = Σ (x − x̄)^k / n`. The shape pair is absent when the sample
/// is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    shape: Option<(f64, f64)>,
}

impl MomentSummary {
    pub fn skewness(&self) -> Result<f64> {
        self.shape
            .map(|s| s.0)
            .ok_or_else(|| Error::DegenerateVariance("sample".into()))
    }

    pub fn excess_kurtosis(&self) -> Result<f64> {
        self.shape
            .map(|s| s.1)
            .ok_or_else(|| Error::DegenerateVariance("sample".into()))
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Builds a summary from `(value, weight)` pairs, each weight being a
    /// repetition count.
    pub(crate) fn from_weighted<I>(points: I) -> Result<Self>
    where
        I: Iterator<Item = (f64, f64)> + Clone,
    {
        let (count, sum) = points
            .clone()
            .fold((0.0, 0.0), |(c, s), (x, w)| (c + w, s + w * x));
        if count < 2.0 {
            return Err(Error::TooShort {
                required: 2,
                actual: count as usize,
            });
        }
        let mean = sum / count;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        let mut first = None;
        let mut constant = true;
        for (x, w) in points {
            if w == 0.0 {
                continue;
            }
            match first {
                None => first = Some(x),
                Some(f) if f != x => constant = false,
                _ => {}
            }
            let d = x - mean;
            let d2 = d * d;
            m2 += w * d2;
            m3 += w * d2 * d;
            m4 += w * d2 * d2;
        }
        let variance = m2 / (count - 1.0);
        let shape = if constant || m2 == 0.0 {
            None
        } else {
            let (m2, m3, m4) = (m2 / count, m3 / count, m4 / count);
            Some((m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0))
        };
        Ok(Self {
            mean,
            variance: if constant { 0.0 } else { variance },
            shape,
        })
    }
}

/// First four moments of a sample of length ≥ 2.
///
/// A constant sample yields its mean and a zero variance; asking it for
/// skewness or kurtosis returns `DegenerateVariance`.
pub fn moments(xs: &[f64]) -> Result<MomentSummary> {
    if xs.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            actual: xs.len(),
        });
    }
    MomentSummary::from_weighted(xs.iter().map(|&x| (x, 1.0)))
}

/// Linearly interpolated quantiles: position `h = (n − 1)p` between the
/// surrounding order statistics.
pub fn quantiles(xs: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut previous = 0.0;
    for &p in probs {
        if !(0.0..=1.0).contains(&p) || p < previous {
            return Err(Error::InvalidProbability(p));
        }
        previous = p;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(probs.iter().map(|&p| sorted_quantile(&sorted, p)).collect())
}

pub(crate) fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}
