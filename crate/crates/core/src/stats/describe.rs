use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
    pub p99: f64,
    pub max: f64,
    pub skew: Option<f64>,
}

/// Percentile of sorted data with linear interpolation between order
/// statistics: position `q * (n - 1)`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Summary statistics. Skew is the adjusted Fisher-Pearson G1, absent for
/// fewer than three values or zero variance.
pub fn describe(values: &[f64]) -> Result<Description> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("describe needs at least one value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    let m = mean(values);
    let m2 = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
    let m3 = values.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n as f64;
    let skew = (n >= 3 && m2 > 0.0).then(|| {
        let g1 = m3 / m2.powf(1.5);
        let nf = n as f64;
        (nf * (nf - 1.0)).sqrt() / (nf - 2.0) * g1
    });
    Ok(Description {
        n,
        mean: m,
        std: std_dev(values),
        min: sorted[0],
        p25: percentile_sorted(&sorted, 0.25),
        p50: percentile_sorted(&sorted, 0.50),
        p75: percentile_sorted(&sorted, 0.75),
        p95: percentile_sorted(&sorted, 0.95),
        p99: percentile_sorted(&sorted, 0.99),
        max: sorted[n - 1],
        skew,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceShares {
    pub between_g1: f64,
    pub g1_by_g2: f64,
    pub residual: f64,
}

fn ss_between<K: Hash + Eq>(values: &[f64], labels: impl Iterator<Item = K>, grand: f64) -> f64 {
    let mut groups: HashMap<K, (f64, usize)> = HashMap::new();
    for (v, k) in values.iter().zip(labels) {
        let e = groups.entry(k).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    let mut parts: Vec<f64> = groups
        .values()
        .map(|&(s, c)| c as f64 * (s / c as f64 - grand).powi(2))
        .collect();
    parts.sort_unstable_by(f64::total_cmp);
    parts.iter().sum()
}

/// Shares of total sum of squares explained by `g1`, added by `g1 x g2`
/// cells beyond `g1`, and left over. Absent when all values are equal.
pub fn variance_decomposition<A, B>(values: &[f64], g1: &[A], g2: &[B]) -> Result<Option<VarianceShares>>
where
    A: Hash + Eq + Clone,
    B: Hash + Eq + Clone,
{
    if g1.len() != values.len() || g2.len() != values.len() {
        return Err(Error::InvalidArgument("group labels must match values in length".into()));
    }
    if values.is_empty() {
        return Ok(None);
    }
    let grand = mean(values);
    let total: f64 = values.iter().map(|v| (v - grand).powi(2)).sum();
    if total == 0.0 {
        return Ok(None);
    }
    let b1 = ss_between(values, g1.iter().cloned(), grand);
    let b12 = ss_between(values, g1.iter().cloned().zip(g2.iter().cloned()), grand);
    let between_g1 = b1 / total;
    let g1_by_g2 = (b12 - b1) / total;
    Ok(Some(VarianceShares {
        between_g1,
        g1_by_g2,
        residual: 1.0 - between_g1 - g1_by_g2,
    }))
}

/// `ln(1 + x)` for non-negative counts.
pub fn transform_log1p(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&v| {
            if v < 0.0 || v.is_nan() {
                Err(Error::InvalidArgument(format!("log1p transform needs non-negative values, got {v}")))
            } else {
                Ok(v.ln_1p())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn describe_examples() {
        let d = describe(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((d.mean, d.p50, d.skew), (2.0, 2.0, Some(0.0)));
        assert!(describe(&[0.0, 0.0, 0.0, 10.0]).unwrap().skew.unwrap() > 0.0);
        let c = describe(&[4.0; 5]).unwrap();
        assert_eq!((c.std, c.skew), (0.0, None));
        assert_eq!(describe(&[1.0, 2.0]).unwrap().skew, None);
    }

    #[test]
    fn decomposition_extremes() {
        let g1 = ["a", "a", "b", "b"];
        let g2 = [1, 2, 1, 2];
        let within = variance_decomposition(&[1.0, 3.0, 3.0, 1.0], &g1, &[1, 1, 1, 1]).unwrap().unwrap();
        assert_eq!((within.between_g1, within.g1_by_g2, within.residual), (0.0, 0.0, 1.0));
        let by_g1 = variance_decomposition(&[1.0, 1.0, 5.0, 5.0], &g1, &g2).unwrap().unwrap();
        assert_eq!((by_g1.between_g1, by_g1.g1_by_g2, by_g1.residual), (1.0, 0.0, 0.0));
        assert_eq!(variance_decomposition(&[2.0; 4], &g1, &g2).unwrap(), None);
    }

    #[test]
    fn log1p_values() {
        assert_eq!(transform_log1p(&[0.0]).unwrap(), [0.0]);
        assert!((transform_log1p(&[std::f64::consts::E - 1.0]).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!(transform_log1p(&[-1.0]).is_err());
    }
}
