//! Top-percentile buckets of a metric within groups, and the share of
//! highly cited papers in each.
//!
//! `cargo run --example percentile_buckets`

use rand::{Rng, SeedableRng};
use scinovelty::stats::{percentile_buckets, top_cited_indicator, BUCKET_LABELS};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let n = 5000;
    let groups: Vec<u32> = (0..n).map(|i| i % 5).collect();
    let metric: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    // citations rise with the metric, plus noise
    let cites: Vec<f64> = metric.iter().map(|m| (m * 20.0 + rng.gen_range(0.0..10.0)).floor()).collect();

    let buckets = percentile_buckets(&metric, &groups, false);
    let top = top_cited_indicator(&cites, &groups, 95.0);
    let mut n_in = [0usize; 6];
    let mut hits = [0usize; 6];
    for (b, t) in buckets.iter().zip(&top) {
        n_in[*b as usize] += 1;
        hits[*b as usize] += *t as usize;
    }
    for (i, label) in BUCKET_LABELS.iter().enumerate() {
        println!("{label:8} n={:5} top5%={:.1}%", n_in[i], 100.0 * hits[i] as f64 / n_in[i].max(1) as f64);
    }
}
