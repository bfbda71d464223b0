//! Naive reference implementations and fixtures shared by the integration
//! tests. Everything here favours obviousness over speed.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scinovelty::corpus::{BaselineDictionary, PaperRecord};
use scinovelty::novelty::PaperTerms;

pub fn day(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Per-paper result of the chronological scan.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleRow {
    pub paper_id: String,
    pub new: [u64; 4],
    pub reuse: [u64; 4],
    pub word_count: u64,
    pub phrase_count: u64,
    /// `(kind, term, occ)` of every credited term, sorted.
    pub credited: Vec<(usize, String, u32)>,
}

fn paper_terms(p: &PaperTerms) -> [BTreeSet<String>; 4] {
    let t = &p.terms;
    let words: BTreeSet<String> = t
        .vocab
        .iter()
        .zip(&t.partner_only)
        .filter(|(_, &partner)| !partner)
        .map(|(w, _)| w.clone())
        .collect();
    let phrases: BTreeSet<String> = t.phrases.iter().cloned().collect();
    let mut word_pairs = BTreeSet::new();
    for (i, a) in t.vocab.iter().enumerate() {
        for (j, b) in t.vocab.iter().enumerate() {
            if a < b && !(t.partner_only[i] && t.partner_only[j]) {
                word_pairs.insert(format!("{a}|{b}"));
            }
        }
    }
    let mut phrase_pairs = BTreeSet::new();
    for a in &t.phrases {
        for b in &t.phrases {
            if a < b {
                phrase_pairs.insert(format!("{a}|{b}"));
            }
        }
    }
    [words, phrases, word_pairs, phrase_pairs]
}

fn in_baseline(b: &BaselineDictionary, kind: usize, term: &str) -> bool {
    let pair = |set: &Option<BTreeSet<(String, String)>>| {
        let (x, y) = term.split_once('|').unwrap();
        set.as_ref().is_some_and(|s| s.contains(&(x.to_string(), y.to_string())))
    };
    match kind {
        0 => b.words.contains(term),
        1 => b.phrases.contains(term),
        2 => pair(&b.word_pairs),
        _ => pair(&b.phrase_pairs),
    }
}

/// Materializes every term set, sorts papers by (date, id) and credits each
/// term seen in two or more papers to its first paper.
pub fn novelty_oracle(papers: &[PaperTerms], baseline: &BaselineDictionary) -> Vec<OracleRow> {
    let mut order: Vec<&PaperTerms> = papers.iter().collect();
    order.sort_by(|a, b| (a.date, &a.paper_id).cmp(&(b.date, &b.paper_id)));
    let sets: Vec<[BTreeSet<String>; 4]> = order.iter().map(|p| paper_terms(p)).collect();
    let mut occ: BTreeMap<(usize, &str), (u32, usize)> = BTreeMap::new();
    for (i, s) in sets.iter().enumerate() {
        for (k, terms) in s.iter().enumerate() {
            for t in terms {
                occ.entry((k, t.as_str())).or_insert((0, i)).0 += 1;
            }
        }
    }
    let mut rows: Vec<OracleRow> = order
        .iter()
        .map(|p| OracleRow {
            paper_id: p.paper_id.clone(),
            word_count: p.terms.vocab.len() as u64,
            phrase_count: p.terms.phrases.len() as u64,
            ..Default::default()
        })
        .collect();
    for (&(k, t), &(n, first)) in &occ {
        if n >= 2 && !in_baseline(baseline, k, t) {
            let row = &mut rows[first];
            row.new[k] += 1;
            row.reuse[k] += n as u64;
            row.credited.push((k, t.to_string(), n));
        }
    }
    for r in &mut rows {
        r.credited.sort();
    }
    rows
}

/// Random baseline entries drawn from the synthetic vocabularies.
pub fn random_baseline(rng: &mut ChaCha8Rng, vocab: usize, phrase_vocab: usize) -> BaselineDictionary {
    let mut b = BaselineDictionary::empty(true);
    for _ in 0..rng.gen_range(0..6) {
        b.words.insert(format!("w{}", rng.gen_range(0..vocab)));
    }
    for _ in 0..rng.gen_range(0..3) {
        let k = rng.gen_range(0..phrase_vocab);
        b.phrases.insert(format!("p{}_q{}", k / 9, k % 9));
    }
    for _ in 0..rng.gen_range(0..6) {
        let (x, y) = (format!("w{}", rng.gen_range(0..12)), format!("w{}", rng.gen_range(0..12)));
        if x < y {
            b.word_pairs.as_mut().unwrap().insert((x, y));
        }
    }
    b
}

/// Disruption counts by classifying every later paper from raw records.
pub fn cd_oracle(records: &[PaperRecord], focal: &str) -> (u32, u32, u32) {
    let by_id: BTreeMap<&str, &PaperRecord> = records.iter().map(|r| (r.paper_id.as_str(), r)).collect();
    let f = by_id[focal];
    let refs: HashSet<&str> = f
        .references
        .iter()
        .map(String::as_str)
        .filter(|r| by_id.contains_key(r) && *r != focal)
        .collect();
    let (mut n_f, mut n_b, mut n_r) = (0, 0, 0);
    for r in records {
        if (r.pub_date, &r.paper_id) <= (f.pub_date, &f.paper_id) {
            continue;
        }
        let cited: HashSet<&str> = r.references.iter().map(String::as_str).collect();
        let a = cited.contains(focal);
        let b = refs.iter().any(|x| cited.contains(x));
        match (a, b) {
            (true, false) => n_f += 1,
            (true, true) => n_b += 1,
            (false, true) => n_r += 1,
            _ => {}
        }
    }
    (n_f, n_b, n_r)
}

/// A random citation DAG: each paper cites earlier papers only.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize) -> Vec<PaperRecord> {
    let mut recs: Vec<PaperRecord> = Vec::with_capacity(n);
    for i in 0..n {
        let date = day(2000, 1, 1) + Duration::days(rng.gen_range(0..3000));
        recs.push(PaperRecord::new(format!("N{i:03}"), date, "t", None).with_venue(format!("J{}", rng.gen_range(0..5))));
    }
    recs.sort_by_key(|r| r.order_key());
    let p = rng.gen_range(0.05..0.4);
    for i in 1..n {
        let refs: Vec<String> = (0..i).filter(|_| rng.gen_bool(p)).map(|j| recs[j].paper_id.clone()).collect();
        recs[i].references = refs;
    }
    recs
}

/// `1 - max cos` over candidates with plain loops.
pub fn brute_distance(focal: &[f64], candidates: &[&[f64]]) -> Option<f64> {
    let norm = |v: &[f64]| {
        let mut s = 0.0;
        for x in v {
            s += x * x;
        }
        s.sqrt()
    };
    let nf = norm(focal);
    let mut best = f64::NEG_INFINITY;
    for c in candidates {
        let mut d = 0.0;
        for (x, y) in focal.iter().zip(c.iter()) {
            d += x * y;
        }
        best = best.max(d / (nf * norm(c)));
    }
    (!candidates.is_empty()).then(|| (1.0 - best).clamp(0.0, 2.0))
}

/// `U_x` counted over all pairs, ties as one half.
pub fn u_by_pairs(x: &[f64], y: &[f64]) -> f64 {
    let mut u = 0.0;
    for a in x {
        for b in y {
            if a > b {
                u += 1.0;
            } else if a == b {
                u += 0.5;
            }
        }
    }
    u
}

/// Exact two-sided permutation p of `U_x` over every split of the pooled
/// values into groups of the observed sizes.
pub fn exact_mw_p(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (n, m) = (x.len(), y.len());
    let centre = (n * m) as f64 / 2.0;
    let observed = (u_by_pairs(x, y) - centre).abs();
    let total = pooled.len();
    let (mut hits, mut all) = (0u64, 0u64);
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (i, &v) in pooled.iter().enumerate() {
            if mask >> i & 1 == 1 {
                a.push(v)
            } else {
                b.push(v)
            }
        }
        all += 1;
        if (u_by_pairs(&a, &b) - centre).abs() >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / all as f64
}

/// Pairwise concordance over every positive-negative pair.
pub fn auc_by_pairs(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| !l).map(|(s, _)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    Some(u_by_pairs(&pos, &neg) / (pos.len() * neg.len()) as f64)
}

/// Least squares by Gaussian elimination on the normal equations with
/// partial pivoting.
pub fn ols(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = x[0].len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += row[i] * row[j];
            }
            a[i][k] += row[i] * yi;
        }
    }
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for r in 0..k {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..=k {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    (0..k).map(|i| a[i][k] / a[i][i]).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every regular file under `dir` except the run manifest, keyed by
/// relative path.
pub fn artifact_bytes(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &std::path::Path, d: &std::path::Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().to_string();
                if rel != "run_manifest.json" {
                    out.insert(rel, std::fs::read(&p).unwrap());
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
