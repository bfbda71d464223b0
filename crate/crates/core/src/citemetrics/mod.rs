//! Citation baselines: journal-pair atypicality, first-pair distance and
//! the CD disruption index.

mod cd;
mod graph;
mod uzzi;
mod wang;

pub use cd::{cd_index, disruption_counts, DisruptionCounts};
pub use graph::{pairs_of, CitationGraph, GraphTally};
pub use uzzi::{lower_percentile, year_null, year_rng, JournalPairStats, Rewiring, UzziConfig, UzziModel, YearNull};
pub use wang::wang_scores;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CiteConfig {
    pub uzzi: UzziConfig,
    /// Years after the focal paper counted for CD; all when unset.
    pub cd_window: Option<i32>,
}

/// Per-paper citation controls and scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationMetrics {
    pub paper_id: String,
    pub n_refs: u32,
    pub n_ref_journals: u32,
    pub uzzi: Option<f64>,
    pub wang: Option<f64>,
    pub cd: Option<f64>,
}

/// Every metric for every paper, in graph order.
pub fn compute_all(graph: &CitationGraph, cfg: &CiteConfig) -> Result<Vec<CitationMetrics>> {
    let uzzi = UzziModel::new(graph, cfg.uzzi)?.scores();
    let wang = wang_scores(graph);
    let cd: Vec<Option<f64>> = (0..graph.len() as u32)
        .into_par_iter()
        .map(|n| cd_index(graph, n, cfg.cd_window))
        .collect();
    Ok((0..graph.len())
        .map(|i| CitationMetrics {
            paper_id: graph.keys[i].id.clone(),
            n_refs: graph.n_refs[i],
            n_ref_journals: graph.n_ref_journals(i as u32) as u32,
            uzzi: uzzi[i],
            wang: wang[i],
            cd: cd[i],
        })
        .collect())
}
