use std::collections::HashMap;
use std::hash::Hash;

use super::describe::percentile_sorted;

/// Bucket labels: the reference below p90, then five 2-percentile ranges.
pub const BUCKET_LABELS: [&str; 6] = ["p0_90", "p90_92", "p92_94", "p94_96", "p96_98", "p98_100"];

const EDGES: [f64; 5] = [0.90, 0.92, 0.94, 0.96, 0.98];

fn group_rows<K: Hash + Eq>(groups: &[K]) -> HashMap<&K, Vec<usize>> {
    let mut out: HashMap<&K, Vec<usize>> = HashMap::new();
    for (i, g) in groups.iter().enumerate() {
        out.entry(g).or_default().push(i);
    }
    out
}

/// Bucket for one value against the group's five edges. A value above the
/// p90 edge goes to the bucket counting the edges below it, unless it sits
/// on one or more edges: then it takes the middle of the buckets those
/// edges span, the lower one when the span is even.
pub fn bucket_of(v: f64, edges: &[f64; 5]) -> u8 {
    if v <= edges[0] {
        return 0;
    }
    let below = edges.iter().filter(|&&e| e < v).count();
    let equal = edges.iter().filter(|&&e| e == v).count();
    if equal == 0 {
        return below as u8;
    }
    ((below + below + equal) / 2) as u8
}

/// Assigns each value a bucket in `0..=5` within its group. With `invert`
/// the values are negated first, so low scores land in the top buckets.
pub fn percentile_buckets<K: Hash + Eq>(values: &[f64], groups: &[K], invert: bool) -> Vec<u8> {
    let mut out = vec![0u8; values.len()];
    let sign = if invert { -1.0 } else { 1.0 };
    for rows in group_rows(groups).into_values() {
        let mut sorted: Vec<f64> = rows.iter().map(|&i| sign * values[i]).collect();
        sorted.sort_unstable_by(f64::total_cmp);
        let edges = EDGES.map(|q| percentile_sorted(&sorted, q));
        for &i in &rows {
            out[i] = bucket_of(sign * values[i], &edges);
        }
    }
    out
}

/// One 0/1 column per bucket, reference first.
pub fn bucket_indicators(buckets: &[u8]) -> [Vec<u8>; 6] {
    std::array::from_fn(|b| buckets.iter().map(|&x| (x as usize == b) as u8).collect())
}

/// Flags values strictly above the group's `pct` percentile, with `pct`
/// in percent (95 for the top 5%).
pub fn top_cited_indicator<K: Hash + Eq>(citations: &[f64], groups: &[K], pct: f64) -> Vec<bool> {
    let mut out = vec![false; citations.len()];
    for rows in group_rows(groups).into_values() {
        let mut sorted: Vec<f64> = rows.iter().map(|&i| citations[i]).collect();
        sorted.sort_unstable_by(f64::total_cmp);
        let cut = percentile_sorted(&sorted, pct / 100.0);
        for &i in &rows {
            out[i] = citations[i] > cut;
        }
    }
    out
}
