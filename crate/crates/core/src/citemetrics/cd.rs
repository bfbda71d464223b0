use serde::{Deserialize, Serialize};

use super::graph::CitationGraph;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisruptionCounts {
    pub n_f: u32,
    pub n_b: u32,
    pub n_r: u32,
}

impl DisruptionCounts {
    /// `(n_f - n_b) / (n_f + n_b + n_r)`, absent on a zero denominator.
    pub fn cd(&self) -> Option<f64> {
        let den = self.n_f + self.n_b + self.n_r;
        (den > 0).then(|| (self.n_f as f64 - self.n_b as f64) / den as f64)
    }
}

/// Classifies later papers citing the focal paper or any of its references.
/// `window` limits citers to at most that many calendar years after the
/// focal year; `None` uses every later paper.
pub fn disruption_counts(graph: &CitationGraph, focal: u32, window: Option<i32>) -> DisruptionCounts {
    let refs = &graph.cites[focal as usize];
    let focal_year = graph.year(focal);
    let mut candidates: Vec<u32> = graph.cited_by[focal as usize].clone();
    for &r in refs {
        candidates.extend(&graph.cited_by[r as usize]);
    }
    candidates.sort_unstable();
    candidates.dedup();
    let mut counts = DisruptionCounts::default();
    for c in candidates {
        if c <= focal || window.is_some_and(|w| graph.year(c) - focal_year > w) {
            continue;
        }
        let cites_focal = graph.cites_node(c, focal);
        let cites_ref = refs.iter().any(|&r| graph.cites_node(c, r));
        match (cites_focal, cites_ref) {
            (true, false) => counts.n_f += 1,
            (true, true) => counts.n_b += 1,
            (false, true) => counts.n_r += 1,
            (false, false) => {}
        }
    }
    counts
}

pub fn cd_index(graph: &CitationGraph, focal: u32, window: Option<i32>) -> Option<f64> {
    disruption_counts(graph, focal, window).cd()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PaperRecord;
    use chrono::NaiveDate;

    fn rec(id: &str, day: u32, refs: &[&str]) -> PaperRecord {
        PaperRecord::new(id, NaiveDate::from_ymd_opt(2000, 1, day).unwrap(), "t", None)
            .with_venue("J")
            .with_references(refs.iter().copied())
    }

    fn cd_of(records: &[PaperRecord]) -> Option<f64> {
        let g = CitationGraph::build(records);
        cd_index(&g, g.position("F").unwrap(), None)
    }

    #[test]
    fn hand_cases() {
        let base = [rec("R", 1, &[]), rec("F", 2, &["R"])];
        let mut mixed = base.to_vec();
        mixed.extend([rec("X", 3, &["F"]), rec("Y", 4, &["F", "R"]), rec("Z", 5, &["R"])]);
        assert_eq!(cd_of(&mixed), Some(0.0));

        let mut disrupt = base.to_vec();
        disrupt.extend([rec("X", 3, &["F"]), rec("Y", 4, &["F"])]);
        assert_eq!(cd_of(&disrupt), Some(1.0));

        let mut consolidate = base.to_vec();
        consolidate.extend([rec("X", 3, &["F", "R"]), rec("Y", 4, &["F", "R"])]);
        assert_eq!(cd_of(&consolidate), Some(-1.0));

        assert_eq!(cd_of(&base), None);
    }

    #[test]
    fn earlier_citers_of_refs_ignored() {
        let recs = [rec("R", 1, &[]), rec("E", 2, &["R"]), rec("F", 3, &["R"]), rec("X", 4, &["F"])];
        assert_eq!(cd_of(&recs), Some(1.0));
    }
}
