use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::PaperRecord;

/// The attributes matching looks at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchKey {
    pub id: String,
    pub venue: String,
    pub year: i32,
    pub subfield: Option<i64>,
    pub field: Option<i64>,
}

impl MatchKey {
    pub fn of(rec: &PaperRecord) -> Self {
        MatchKey {
            id: rec.paper_id.clone(),
            venue: rec.venue_id.clone(),
            year: rec.year(),
            subfield: rec.subfield_id,
            field: rec.field_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchLevel {
    Subfield,
    Field,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub case_id: String,
    pub control_id: String,
    pub level: MatchLevel,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub unmatched: Vec<String>,
}

type Cell = (String, i32, i64);

fn index<'a>(pool: &'a [MatchKey], part: impl Fn(&MatchKey) -> Option<i64>) -> HashMap<Cell, Vec<usize>> {
    let mut out: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (i, k) in pool.iter().enumerate() {
        if let Some(p) = part(k) {
            out.entry((k.venue.clone(), k.year, p)).or_default().push(i);
        }
    }
    for v in out.values_mut() {
        v.sort_by(|&a, &b| pool[a].id.cmp(&pool[b].id));
    }
    out
}

/// Draws one unused control per case sharing venue, year and subfield,
/// falling back to field. Cases are handled in id order with one ChaCha8
/// stream seeded by `seed`, so the result depends only on the inputs.
pub fn match_case_control(cases: &[MatchKey], pool: &[MatchKey], seed: u64) -> MatchResult {
    let by_subfield = index(pool, |k| k.subfield);
    let by_field = index(pool, |k| k.field);
    let mut used = vec![false; pool.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<&MatchKey> = cases.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut result = MatchResult::default();
    for case in order {
        let attempts = [
            (MatchLevel::Subfield, case.subfield, &by_subfield),
            (MatchLevel::Field, case.field, &by_field),
        ];
        let mut matched = false;
        for (level, part, idx) in attempts {
            let Some(part) = part else { continue };
            let Some(cands) = idx.get(&(case.venue.clone(), case.year, part)) else {
                continue;
            };
            let free: Vec<usize> = cands
                .iter()
                .copied()
                .filter(|&i| !used[i] && pool[i].id != case.id)
                .collect();
            if free.is_empty() {
                continue;
            }
            let pick = free[rng.gen_range(0..free.len() as u64) as usize];
            used[pick] = true;
            result.pairs.push(MatchedPair {
                case_id: case.id.clone(),
                control_id: pool[pick].id.clone(),
                level,
            });
            matched = true;
            break;
        }
        if !matched {
            result.unmatched.push(case.id.clone());
        }
    }
    result
}
