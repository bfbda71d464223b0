use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{OrderKey, PaperRecord};

/// Reference problems found while building the graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphTally {
    pub unresolved: u64,
    pub self_citations: u64,
    pub duplicate_references: u64,
}

/// Papers in order-key order with resolved citation edges. Node `i` is the
/// i-th paper by order key, so a smaller index always means an earlier paper.
#[derive(Debug, Clone, Default)]
pub struct CitationGraph {
    pub keys: Vec<OrderKey>,
    index: HashMap<String, u32>,
    /// Interned venue ids.
    pub journals: Vec<String>,
    /// Journal of each paper; `None` for an empty venue id.
    pub venue: Vec<Option<u32>>,
    /// Resolved references, sorted and deduplicated.
    pub cites: Vec<Vec<u32>>,
    /// Exact inverse of `cites`, sorted.
    pub cited_by: Vec<Vec<u32>>,
    /// Distinct references including unresolved ones, excluding self.
    pub n_refs: Vec<u32>,
    pub tally: GraphTally,
}

impl CitationGraph {
    pub fn build(records: &[PaperRecord]) -> Self {
        let mut order: Vec<(OrderKey, &PaperRecord)> = records.iter().map(|r| (r.order_key(), r)).collect();
        order.sort_by(|a, b| a.0.cmp(&b.0));
        let mut g = CitationGraph::default();
        let mut journal_ix: HashMap<&str, u32> = HashMap::new();
        for (i, (key, rec)) in order.iter().enumerate() {
            g.index.insert(key.id.clone(), i as u32);
            let venue = (!rec.venue_id.is_empty()).then(|| {
                let next = journal_ix.len() as u32;
                *journal_ix.entry(rec.venue_id.as_str()).or_insert_with(|| {
                    g.journals.push(rec.venue_id.clone());
                    next
                })
            });
            g.venue.push(venue);
        }
        g.cites = vec![Vec::new(); order.len()];
        g.cited_by = vec![Vec::new(); order.len()];
        g.n_refs = vec![0; order.len()];
        for (i, (_, rec)) in order.iter().enumerate() {
            let mut refs: Vec<&str> = rec.references.iter().map(String::as_str).collect();
            refs.sort_unstable();
            let before = refs.len();
            refs.dedup();
            g.tally.duplicate_references += (before - refs.len()) as u64;
            for r in refs {
                if r == rec.paper_id {
                    g.tally.self_citations += 1;
                    continue;
                }
                g.n_refs[i] += 1;
                match g.index.get(r) {
                    Some(&j) => g.cites[i].push(j),
                    None => g.tally.unresolved += 1,
                }
            }
            g.cites[i].sort_unstable();
        }
        for i in 0..order.len() {
            for k in 0..g.cites[i].len() {
                let j = g.cites[i][k];
                g.cited_by[j as usize].push(i as u32);
            }
        }
        g.keys = order.into_iter().map(|(k, _)| k).collect();
        g
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn position(&self, paper_id: &str) -> Option<u32> {
        self.index.get(paper_id).copied()
    }

    pub fn id(&self, node: u32) -> &str {
        &self.keys[node as usize].id
    }

    pub fn year(&self, node: u32) -> i32 {
        use chrono::Datelike;
        self.keys[node as usize].date.year()
    }

    pub fn cites_node(&self, from: u32, to: u32) -> bool {
        self.cites[from as usize].binary_search(&to).is_ok()
    }

    /// Journals of resolved references, one entry per reference.
    pub fn ref_journals(&self, node: u32) -> impl Iterator<Item = u32> + '_ {
        self.cites[node as usize].iter().filter_map(|&r| self.venue[r as usize])
    }

    /// Sorted distinct journals of resolved references.
    pub fn distinct_ref_journals(&self, node: u32) -> Vec<u32> {
        let mut js: Vec<u32> = self.ref_journals(node).collect();
        js.sort_unstable();
        js.dedup();
        js
    }

    pub fn n_ref_journals(&self, node: u32) -> usize {
        self.distinct_ref_journals(node).len()
    }
}

/// All unordered pairs `(a, b)`, `a < b`, of a sorted distinct list.
pub fn pairs_of(sorted: &[u32]) -> impl Iterator<Item = (u32, u32)> + '_ {
    sorted
        .iter()
        .enumerate()
        .flat_map(move |(i, &a)| sorted[i + 1..].iter().map(move |&b| (a, b)))
}
