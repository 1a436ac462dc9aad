//! Order-independent reductions and small empirical-distribution helpers.

use crate::error::{Error, Result};

/// Compensated sum of a sorted copy, so the result does not depend on input order.
pub fn stable_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for x in v {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Order-independent mean. Errors on an empty slice.
pub fn stable_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::statistics("mean of an empty sample"));
    }
    Ok(stable_sum(values) / values.len() as f64)
}

/// Unbiased sample variance (n − 1 denominator).
pub fn sample_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::statistics("variance needs at least two samples"));
    }
    let m = stable_mean(values)?;
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    Ok(stable_sum(&sq) / (values.len() - 1) as f64)
}

/// Pearson correlation from the unbiased sample covariance.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::dimension(format!("{} vs {} samples", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::statistics("correlation needs at least two samples"));
    }
    let (ma, mb) = (stable_mean(a)?, stable_mean(b)?);
    let cross: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let n1 = (a.len() - 1) as f64;
    let cov = stable_sum(&cross) / n1;
    let (va, vb) = (sample_variance(a)?, sample_variance(b)?);
    if va == 0.0 || vb == 0.0 {
        return Err(Error::statistics("correlation of a constant sample"));
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::statistics("KS distance of an empty sample"));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0_f64;
    for (idx, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((idx + 1) as f64 / n - f).abs()).max((f - idx as f64 / n).abs());
    }
    Ok(d)
}
