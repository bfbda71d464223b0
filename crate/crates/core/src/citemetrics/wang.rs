use std::collections::{HashMap, HashSet};

use super::graph::{pairs_of, CitationGraph};

type Profile = HashMap<u32, f64>;

/// Journal co-citation profiles plus the set of pairs ever co-cited.
#[derive(Debug, Default)]
struct History {
    profiles: HashMap<u32, Profile>,
    seen: HashSet<(u32, u32)>,
}

impl History {
    fn add_profile_pairs(&mut self, pairs: &[(u32, u32)]) {
        for &(a, b) in pairs {
            *self.profiles.entry(a).or_default().entry(b).or_insert(0.0) += 1.0;
            *self.profiles.entry(b).or_default().entry(a).or_insert(0.0) += 1.0;
        }
    }

    /// `1 - cos(c_a, c_b)`; 1 when either profile is empty.
    fn distance(&self, a: u32, b: u32) -> f64 {
        let (Some(pa), Some(pb)) = (self.profiles.get(&a), self.profiles.get(&b)) else {
            return 1.0;
        };
        // Iterate in key order so the sum is reproducible.
        let mut keys: Vec<&u32> = pa.keys().collect();
        keys.sort_unstable();
        let dot: f64 = keys.iter().filter_map(|k| pb.get(k).map(|y| pa[k] * y)).sum();
        let norm = |p: &Profile| {
            let mut v: Vec<(&u32, &f64)> = p.iter().collect();
            v.sort_unstable_by_key(|e| *e.0);
            v.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
        };
        let (na, nb) = (norm(pa), norm(pb));
        if na == 0.0 || nb == 0.0 {
            return 1.0;
        }
        1.0 - dot / (na * nb)
    }
}

/// Scores every paper, in graph order.
///
/// New pairs are journal pairs no earlier paper (by order key) co-cited.
/// Profiles count, for each journal, the papers from earlier years that
/// co-cited it with each other journal. Absent when the paper cites fewer
/// than two distinct journals.
pub fn wang_scores(graph: &CitationGraph) -> Vec<Option<f64>> {
    let mut history = History::default();
    let mut out = Vec::with_capacity(graph.len());
    let mut pending: Vec<(u32, u32)> = Vec::new();
    let mut current_year = None;
    for node in 0..graph.len() as u32 {
        let year = graph.year(node);
        if current_year != Some(year) {
            history.add_profile_pairs(&pending);
            pending.clear();
            current_year = Some(year);
        }
        let js = graph.distinct_ref_journals(node);
        let pairs: Vec<(u32, u32)> = pairs_of(&js).collect();
        if js.len() < 2 {
            out.push(None);
        } else {
            let score = pairs
                .iter()
                .filter(|p| !history.seen.contains(p))
                .map(|&(a, b)| history.distance(a, b))
                .sum();
            out.push(Some(score));
        }
        history.seen.extend(pairs.iter().copied());
        pending.extend(pairs);
    }
    out
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

    fn score(records: &[PaperRecord], id: &str) -> Option<f64> {
        let g = CitationGraph::build(records);
        wang_scores(&g)[g.position(id).unwrap() as usize]
    }

    fn sources() -> Vec<PaperRecord> {
        ["A", "B", "C", "D"]
            .iter()
            .map(|j| rec(&format!("s{j}"), 1990, j, &[]))
            .collect()
    }

    #[test]
    fn no_new_pairs_is_zero() {
        let mut r = sources();
        r.push(rec("p", 2000, "X", &["sA", "sB"]));
        r.push(rec("f", 2001, "X", &["sA", "sB"]));
        assert_eq!(score(&r, "f"), Some(0.0));
    }

    #[test]
    fn zero_profiles_give_one() {
        let mut r = sources();
        r.push(rec("f", 2001, "X", &["sA", "sB"]));
        assert_eq!(score(&r, "f"), Some(1.0));
        r.push(rec("g", 2001, "X", &["sA"]));
        assert_eq!(score(&r, "g"), None);
    }

    #[test]
    fn hand_cosine() {
        // 2000: A-C twice, B-C once, B-D once. Profiles: A={C:2}, B={C:1,D:1}.
        // cos = 2 / (2 * sqrt 2).
        let mut r = sources();
        r.push(rec("p1", 2000, "X", &["sA", "sC"]));
        r.push(rec("p2", 2000, "X", &["sA", "sC"]));
        r.push(rec("p3", 2000, "X", &["sB", "sC"]));
        r.push(rec("p4", 2000, "X", &["sB", "sD"]));
        r.push(rec("f", 2001, "X", &["sA", "sB"]));
        let expected = 1.0 - 2.0 / (2.0 * 2f64.sqrt());
        assert!((score(&r, "f").unwrap() - expected).abs() < 1e-12);
    }
}
