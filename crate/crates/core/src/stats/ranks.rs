use serde::{Deserialize, Serialize};

/// 1-based ranks with ties given their average rank, plus the tie group
/// sizes.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    pub u_x: f64,
    pub u_y: f64,
    pub z: Option<f64>,
    pub p_two_sided: Option<f64>,
}

/// Two-sample rank-sum test. `U_x` counts pairs with `x > y` plus half the
/// ties. The p-value uses the tie-corrected normal approximation with a
/// continuity correction; both `z` and `p` are absent when every value is
/// equal.
pub fn mann_whitney(x: &[f64], y: &[f64]) -> Option<MannWhitney> {
    if x.is_empty() || y.is_empty() {
        return None;
    }
    let (n, m) = (x.len() as f64, y.len() as f64);
    let all: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = midranks(&all);
    let r_x: f64 = ranks[..x.len()].iter().sum();
    let u_x = r_x - n * (n + 1.0) / 2.0;
    let u_y = n * m - u_x;
    let total = n + m;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let var = n * m / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if var <= 0.0 {
        return Some(MannWhitney {
            u_x,
            u_y,
            z: None,
            p_two_sided: None,
        });
    }
    let diff = u_x - n * m / 2.0;
    let corrected = (diff.abs() - 0.5).max(0.0) * diff.signum();
    let z = corrected / var.sqrt();
    let p = libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0);
    Some(MannWhitney {
        u_x,
        u_y,
        z: Some(z),
        p_two_sided: Some(p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub auc: Option<f64>,
}

/// Precision and recall of `score >= threshold`, and the tie-adjusted AUC.
pub fn classification_metrics(scores: &[f64], labels: &[bool], threshold: f64) -> ClassificationMetrics {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut pos = 0usize;
    for (&s, &l) in scores.iter().zip(labels) {
        let predicted = s >= threshold;
        tp += (predicted && l) as usize;
        fp += (predicted && !l) as usize;
        pos += l as usize;
    }
    ClassificationMetrics {
        precision: (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64),
        recall: (pos > 0).then(|| tp as f64 / pos as f64),
        auc: auc(scores, labels),
    }
}

/// Share of positive/negative pairs ordered correctly, ties counting half.
/// Absent when a class is missing.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let (ranks, _) = midranks(scores);
    let r_pos: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let (p, q) = (n_pos as f64, n_neg as f64);
    Some((r_pos - p * (p + 1.0) / 2.0) / (p * q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_with_ties() {
        let (r, t) = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, [3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, [1, 1, 2]);
    }

    #[test]
    fn mann_whitney_examples() {
        let r = mann_whitney(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!((r.u_x, r.u_y), (0.0, 4.0));
        let s = mann_whitney(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.z, Some(0.0));
        assert_eq!(s.p_two_sided, Some(1.0));
        let c = mann_whitney(&[5.0, 5.0], &[5.0]).unwrap();
        assert_eq!(c.p_two_sided, None);
    }

    #[test]
    fn auc_fixture() {
        let m = classification_metrics(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true], 0.5);
        assert_eq!(m.auc, Some(0.75));
        assert_eq!((m.precision, m.recall), (Some(1.0), Some(0.5)));
        let perfect = classification_metrics(&[0.1, 0.2, 0.9, 0.95], &[false, false, true, true], 0.5);
        assert_eq!((perfect.precision, perfect.recall, perfect.auc), (Some(1.0), Some(1.0), Some(1.0)));
        assert_eq!(auc(&[0.1, 0.2], &[true, true]), None);
    }
}
