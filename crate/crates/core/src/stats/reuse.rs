use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::glm::{fit_glm, DesignMatrix, Family, GlmFit, GlmOptions};
use super::matching::{match_case_control, MatchKey};
use crate::citemetrics::CitationGraph;
use crate::error::Result;
use crate::novelty::{TermKind, TermStats};

/// One sampled new term with the later papers that used it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermReuseSample {
    pub kind: TermKind,
    pub term: String,
    pub pioneer_id: String,
    pub reuser_ids: Vec<String>,
}

/// Draws up to `n` credited terms with `reuse >= min_reuse`, returned in
/// their input order.
pub fn sample_terms(stats: &[TermStats], n: usize, min_reuse: u32, seed: u64) -> Vec<&TermStats> {
    let eligible: Vec<&TermStats> = stats.iter().filter(|t| t.reuse >= min_reuse).collect();
    if eligible.len() <= n {
        return eligible;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, eligible.len(), n).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| eligible[i]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReuseCitationConfig {
    pub seed: u64,
    /// Year gaps at or above this are pooled.
    pub max_gap: i32,
}

impl Default for ReuseCitationConfig {
    fn default() -> Self {
        ReuseCitationConfig { seed: 7, max_gap: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEffect {
    pub gap: i32,
    pub effect: f64,
    pub se_robust: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReuseCitationResult {
    pub terms_used: usize,
    pub terms_excluded: usize,
    pub reusers: usize,
    pub controls: usize,
    pub unmatched_reusers: usize,
    pub reuser_cites: usize,
    pub control_cites: usize,
    pub rate_reusing: Option<f64>,
    pub rate_control: Option<f64>,
    /// Absent when no control cites the pioneer.
    pub ratio: Option<f64>,
    pub gap_profile: Vec<GapEffect>,
    pub fit: Option<GlmFit>,
}

struct Obs {
    cites: bool,
    reuser: bool,
    gap: i32,
}

/// Compares how often reusers of a new term cite its pioneer with how often
/// matched non-reusers do, overall and by publication-year gap. Matched
/// controls come from the same venue, year and subfield as their reuser.
pub fn reuse_citation_analysis(
    samples: &[TermReuseSample],
    graph: &CitationGraph,
    keys: &[MatchKey],
    cfg: &ReuseCitationConfig,
) -> Result<ReuseCitationResult> {
    let by_id: HashMap<&str, &MatchKey> = keys.iter().map(|k| (k.id.as_str(), k)).collect();
    let mut res = ReuseCitationResult::default();
    let mut obs: Vec<Obs> = Vec::new();
    let cites = |from: &str, to: u32| graph.position(from).is_some_and(|f| graph.cites_node(f, to));
    for (t, sample) in samples.iter().enumerate() {
        let Some(pioneer) = graph.position(&sample.pioneer_id) else {
            res.terms_excluded += 1;
            continue;
        };
        let pioneer_year = graph.year(pioneer);
        let exclude: HashSet<&str> = sample
            .reuser_ids
            .iter()
            .map(String::as_str)
            .chain([sample.pioneer_id.as_str()])
            .collect();
        let cases: Vec<MatchKey> = sample
            .reuser_ids
            .iter()
            .filter_map(|id| by_id.get(id.as_str()).map(|k| (*k).clone()))
            .collect();
        let pool: Vec<MatchKey> = keys.iter().filter(|k| !exclude.contains(k.id.as_str())).cloned().collect();
        let matched = match_case_control(&cases, &pool, cfg.seed.wrapping_add(t as u64));
        if matched.pairs.is_empty() {
            res.terms_excluded += 1;
            continue;
        }
        res.terms_used += 1;
        res.unmatched_reusers += matched.unmatched.len();
        for pair in &matched.pairs {
            let gap = (by_id[pair.case_id.as_str()].year - pioneer_year).clamp(0, cfg.max_gap);
            let rc = cites(&pair.case_id, pioneer);
            let cc = cites(&pair.control_id, pioneer);
            res.reusers += 1;
            res.controls += 1;
            res.reuser_cites += rc as usize;
            res.control_cites += cc as usize;
            obs.push(Obs { cites: rc, reuser: true, gap });
            obs.push(Obs { cites: cc, reuser: false, gap });
        }
    }
    let rate = |hits: usize, n: usize| (n > 0).then(|| hits as f64 / n as f64);
    res.rate_reusing = rate(res.reuser_cites, res.reusers);
    res.rate_control = rate(res.control_cites, res.controls);
    res.ratio = match (res.rate_reusing, res.rate_control) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    if !obs.is_empty() {
        let gaps: BTreeSet<i32> = obs.iter().map(|o| o.gap).collect();
        let mut columns = Vec::new();
        for &g in gaps.iter().skip(1) {
            columns.push((format!("gap_{g}"), obs.iter().map(|o| (o.gap == g) as u8 as f64).collect()));
        }
        for &g in &gaps {
            columns.push((
                format!("reuser_gap_{g}"),
                obs.iter().map(|o| (o.reuser && o.gap == g) as u8 as f64).collect(),
            ));
        }
        let y = obs.iter().map(|o| o.cites as u8 as f64).collect();
        let design = DesignMatrix::from_columns(y, columns, true)?;
        let fit = fit_glm(&design, Family::Identity, &GlmOptions::default())?;
        res.gap_profile = gaps
            .iter()
            .filter_map(|&g| {
                let name = format!("reuser_gap_{g}");
                let k = fit.names.iter().position(|n| *n == name)?;
                Some(GapEffect {
                    gap: g,
                    effect: fit.coefficients[k],
                    se_robust: fit.se_robust[k],
                })
            })
            .collect();
        res.fit = Some(fit);
    }
    Ok(res)
}
