use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{pairs_of, CitationGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct UzziConfig {
    pub n_rewirings: u32,
    pub seed: u64,
    /// Endpoint swaps per citation edge in each null sample.
    pub swaps_per_edge: u32,
}

impl Default for UzziConfig {
    fn default() -> Self {
        UzziConfig {
            n_rewirings: 10,
            seed: 42,
            swaps_per_edge: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JournalPairStats {
    pub pair: (u32, u32),
    pub observed: u32,
    pub null_mean: f64,
    pub null_std: f64,
    pub z: Option<f64>,
}

/// The paper→journal citation multigraph of one year, one entry per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewiring {
    /// Citing paper of each edge; edges of a paper are contiguous.
    pub papers: Vec<u32>,
    pub journals: Vec<u32>,
}

impl Rewiring {
    pub fn for_year(graph: &CitationGraph, nodes: std::ops::Range<u32>) -> Self {
        let mut r = Rewiring {
            papers: Vec::new(),
            journals: Vec::new(),
        };
        for n in nodes {
            for j in graph.ref_journals(n) {
                r.papers.push(n);
                r.journals.push(j);
            }
        }
        r
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    /// Exchanges the journal endpoints of two uniformly drawn edges. Every
    /// paper keeps its reference count and every journal its citation count.
    pub fn swap_step<R: Rng>(&mut self, rng: &mut R) {
        let e = self.journals.len() as u64;
        let i = rng.gen_range(0..e) as usize;
        let j = rng.gen_range(0..e) as usize;
        self.journals.swap(i, j);
    }

    /// Citation counts per paper and per journal.
    pub fn degrees(&self) -> (BTreeMap<u32, u32>, BTreeMap<u32, u32>) {
        let mut p = BTreeMap::new();
        let mut j = BTreeMap::new();
        for (&a, &b) in self.papers.iter().zip(&self.journals) {
            *p.entry(a).or_insert(0) += 1;
            *j.entry(b).or_insert(0) += 1;
        }
        (p, j)
    }

    /// Calls `f` with each paper's sorted distinct journals.
    fn for_each_paper(&self, mut f: impl FnMut(u32, &[u32])) {
        let mut buf = Vec::new();
        let mut start = 0;
        while start < self.papers.len() {
            let p = self.papers[start];
            let mut end = start;
            while end < self.papers.len() && self.papers[end] == p {
                end += 1;
            }
            buf.clear();
            buf.extend_from_slice(&self.journals[start..end]);
            buf.sort_unstable();
            buf.dedup();
            f(p, &buf);
            start = end;
        }
    }
}

/// Observed and null statistics for every journal pair co-cited in a year.
#[derive(Debug, Clone, Default)]
pub struct YearNull {
    pub pairs: HashMap<(u32, u32), JournalPairStats>,
}

/// The generator for one year: ChaCha8 seeded with `seed`, stream set to the
/// year. Samples draw from it in order, each starting from the observed graph.
pub fn year_rng(seed: u64, year: i32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(year as i64 as u64);
    rng
}

pub fn year_null(graph: &CitationGraph, nodes: std::ops::Range<u32>, year: i32, cfg: &UzziConfig) -> YearNull {
    let observed = Rewiring::for_year(graph, nodes);
    let mut index: HashMap<(u32, u32), usize> = HashMap::new();
    let mut obs_counts: Vec<u32> = Vec::new();
    let mut keys: Vec<(u32, u32)> = Vec::new();
    observed.for_each_paper(|_, js| {
        for pair in pairs_of(js) {
            let slot = *index.entry(pair).or_insert_with(|| {
                keys.push(pair);
                obs_counts.push(0);
                keys.len() - 1
            });
            obs_counts[slot] += 1;
        }
    });

    // Welford accumulators per pair.
    let mut mean = vec![0.0f64; keys.len()];
    let mut m2 = vec![0.0f64; keys.len()];
    let mut sample = vec![0u32; keys.len()];
    let mut rng = year_rng(cfg.seed, year);
    let steps = cfg.swaps_per_edge as u64 * observed.len() as u64;
    for s in 0..cfg.n_rewirings {
        let mut rw = observed.clone();
        if !rw.is_empty() {
            for _ in 0..steps {
                rw.swap_step(&mut rng);
            }
        }
        debug_assert_eq!(rw.degrees(), observed.degrees());
        sample.iter_mut().for_each(|c| *c = 0);
        rw.for_each_paper(|_, js| {
            for pair in pairs_of(js) {
                if let Some(&slot) = index.get(&pair) {
                    sample[slot] += 1;
                }
            }
        });
        let n = (s + 1) as f64;
        for k in 0..keys.len() {
            let x = sample[k] as f64;
            let d = x - mean[k];
            mean[k] += d / n;
            m2[k] += d * (x - mean[k]);
        }
    }

    let denom = (cfg.n_rewirings.max(2) - 1) as f64;
    let pairs = keys
        .iter()
        .enumerate()
        .map(|(k, &pair)| {
            let null_std = (m2[k] / denom).sqrt();
            let observed = obs_counts[k];
            let z = (null_std > 0.0).then(|| (observed as f64 - mean[k]) / null_std);
            (
                pair,
                JournalPairStats {
                    pair,
                    observed,
                    null_mean: mean[k],
                    null_std,
                    z,
                },
            )
        })
        .collect();
    YearNull { pairs }
}

/// Lower-interpolated percentile: the element at `floor(q * (n - 1))` of the
/// sorted values.
pub fn lower_percentile(values: &mut [f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    let idx = (q * (values.len() - 1) as f64).floor() as usize;
    Some(values[idx])
}

/// Uzzi scores with one lazily built null per publication year.
pub struct UzziModel<'g> {
    graph: &'g CitationGraph,
    cfg: UzziConfig,
    years: BTreeMap<i32, (std::ops::Range<u32>, OnceLock<YearNull>)>,
}

impl<'g> UzziModel<'g> {
    pub fn new(graph: &'g CitationGraph, cfg: UzziConfig) -> Result<Self> {
        if cfg.n_rewirings < 2 {
            return Err(Error::InvalidArgument(format!(
                "n_rewirings must be at least 2, got {}",
                cfg.n_rewirings
            )));
        }
        let mut years = BTreeMap::new();
        let mut start = 0u32;
        while (start as usize) < graph.len() {
            let year = graph.year(start);
            let mut end = start;
            while (end as usize) < graph.len() && graph.year(end) == year {
                end += 1;
            }
            years.insert(year, (start..end, OnceLock::new()));
            start = end;
        }
        Ok(UzziModel { graph, cfg, years })
    }

    pub fn null_for(&self, year: i32) -> Option<&YearNull> {
        let (range, cell) = self.years.get(&year)?;
        Some(cell.get_or_init(|| year_null(self.graph, range.clone(), year, &self.cfg)))
    }

    /// 10th percentile of the paper's journal-pair z-scores. Absent with
    /// fewer than two distinct cited journals or no defined z.
    pub fn score(&self, node: u32) -> Option<f64> {
        let js = self.graph.distinct_ref_journals(node);
        if js.len() < 2 {
            return None;
        }
        let null = self.null_for(self.graph.year(node))?;
        let mut zs: Vec<f64> = pairs_of(&js).filter_map(|p| null.pairs.get(&p)?.z).collect();
        lower_percentile(&mut zs, 0.1)
    }

    /// Scores for every paper in graph order, years built in parallel.
    pub fn scores(&self) -> Vec<Option<f64>> {
        self.years.par_iter().for_each(|(&y, _)| {
            self.null_for(y);
        });
        (0..self.graph.len() as u32).into_par_iter().map(|n| self.score(n)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PaperRecord;
    use chrono::NaiveDate;

    fn rec(id: &str, year: i32, venue: &str, refs: &[&str]) -> PaperRecord {
        PaperRecord::new(id, NaiveDate::from_ymd_opt(year, 1, 1).unwrap(), "t", None)
            .with_venue(venue)
            .with_references(refs.iter().copied())
    }

    fn sources() -> Vec<PaperRecord> {
        ["A", "B", "C", "D"]
            .iter()
            .flat_map(|j| (0..3).map(move |k| rec(&format!("s{j}{k}"), 1990, j, &[])))
            .collect()
    }

    #[test]
    fn too_few_rewirings() {
        let g = CitationGraph::build(&sources());
        let cfg = UzziConfig { n_rewirings: 1, ..UzziConfig::default() };
        assert!(UzziModel::new(&g, cfg).is_err());
    }

    #[test]
    fn single_journal_and_degenerate_year() {
        let mut r = sources();
        r.push(rec("one", 2000, "X", &["sA0", "sA1"]));
        r.push(rec("solo", 2001, "X", &["sA0", "sB0"]));
        let g = CitationGraph::build(&r);
        let m = UzziModel::new(&g, UzziConfig::default()).unwrap();
        assert_eq!(m.score(g.position("one").unwrap()), None);
        assert_eq!(m.score(g.position("solo").unwrap()), None);
    }

    #[test]
    fn reproducible() {
        let mut r = sources();
        let refs = [
            vec!["sA0", "sB0", "sC0"],
            vec!["sA1", "sB1"],
            vec!["sC1", "sD0", "sA2"],
            vec!["sD1", "sB2"],
            vec!["sC2", "sD2", "sA0"],
        ];
        for (i, rf) in refs.iter().enumerate() {
            r.push(rec(&format!("p{i}"), 2000, "X", rf));
        }
        let g = CitationGraph::build(&r);
        let cfg = UzziConfig { n_rewirings: 50, ..UzziConfig::default() };
        let a = UzziModel::new(&g, cfg).unwrap().scores();
        let b = UzziModel::new(&g, cfg).unwrap().scores();
        let bits = |v: &[Option<f64>]| v.iter().map(|x| x.map(f64::to_bits)).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert!(a.iter().any(Option::is_some));
    }

    #[test]
    fn percentile_lower() {
        let mut v = vec![5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(lower_percentile(&mut v, 0.1), Some(1.0));
        let mut v: Vec<f64> = (0..11).map(f64::from).collect();
        assert_eq!(lower_percentile(&mut v, 0.1), Some(1.0));
    }
}
