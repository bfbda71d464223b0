use std::collections::HashSet;
use std::path::PathBuf;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tempfile::TempDir;

use super::kind::{kind_of, Fingerprint, KindSet, PaperPrints, TermKind};
use super::shard::{CountShard, ShardSummary};
use super::spill::{Merge, Rec, RecIter, RunOrder};
use crate::corpus::{BaselineDictionary, OrderKey};
use crate::error::{Error, Result};
use crate::textproc::TermSets;

/// Sizing of the counting engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub shards: usize,
    /// Memory the engine may account for, in bytes.
    pub memory_budget: u64,
    pub kinds: KindSet,
    /// Upper bound on papers fingerprinted together.
    pub chunk_papers: usize,
    /// Where run files go. Defaults to the system temp directory.
    pub spill_dir: Option<PathBuf>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            shards: 8,
            memory_budget: 4 << 30,
            kinds: KindSet::all(),
            chunk_papers: 4096,
            spill_dir: None,
        }
    }
}

impl EngineConfig {
    fn shard_limit(&self) -> usize {
        let share = self.memory_budget as f64 * 0.6 / self.shards.max(1) as f64;
        (share / 2.0) as usize
    }

    fn chunk_fp_limit(&self) -> usize {
        ((self.memory_budget as f64 * 0.15) / 96.0).max(1024.0) as usize
    }
}

/// One paper as seen by the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperTerms {
    pub paper_id: String,
    pub date: NaiveDate,
    pub terms: TermSets,
}

impl PaperTerms {
    pub fn order_key(&self) -> OrderKey {
        OrderKey {
            date: self.date,
            id: self.paper_id.clone(),
        }
    }
}

pub type PaperIter<'a> = Box<dyn Iterator<Item = Result<PaperTerms>> + Send + 'a>;

/// A re-readable stream of papers in order-key order. Both passes open it
/// once.
pub trait PaperSource: Sync {
    fn open(&self) -> Result<PaperIter<'_>>;
}

impl PaperSource for [PaperTerms] {
    fn open(&self) -> Result<PaperIter<'_>> {
        Ok(Box::new(self.iter().cloned().map(Ok)))
    }
}

impl PaperSource for Vec<PaperTerms> {
    fn open(&self) -> Result<PaperIter<'_>> {
        self.as_slice().open()
    }
}

/// Counters reported after the first pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineStats {
    pub papers: u64,
    /// Distinct terms per kind, in [`TermKind::ALL`] order.
    pub distinct: [u64; 4],
    /// Terms with at least two papers, before baseline blocking.
    pub candidates: [u64; 4],
    pub spills: u64,
    pub spilled_bytes: u64,
    pub peak_accounted_bytes: u64,
    pub memory_budget: u64,
}

/// Output of the first pass: per-paper identity and the sorted credit
/// candidates of every shard.
pub struct TermStore {
    pub ids: Vec<String>,
    pub dates: Vec<NaiveDate>,
    digests: Vec<u64>,
    shards: Vec<ShardSummary>,
    kinds: KindSet,
    pub stats: EngineStats,
    _dir: TempDir,
}

impl std::fmt::Debug for TermStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TermStore")
            .field("papers", &self.ids.len())
            .field("stats", &self.stats)
            .finish()
    }
}

impl TermStore {
    fn credits(&self) -> Result<Merge<'_>> {
        let mut inputs: Vec<RecIter<'_>> = Vec::with_capacity(self.shards.len());
        for s in &self.shards {
            inputs.push(s.credits.iter()?);
        }
        Ok(Merge::new(inputs, RunOrder::FieldA))
    }
}

fn shard_of(fp: Fingerprint, n: usize) -> usize {
    ((fp >> 96) as u64 % n as u64) as usize
}

fn selected_terms(t: &TermSets, kinds: KindSet) -> usize {
    let mut n = 0;
    if kinds.contains(TermKind::Word) {
        n += t.vocab.len();
    }
    if kinds.contains(TermKind::Phrase) {
        n += t.phrases.len();
    }
    if kinds.contains(TermKind::WordPair) {
        n += t.word_pairs.len();
    }
    if kinds.contains(TermKind::PhrasePair) {
        n += t.phrase_pairs.len();
    }
    n
}

fn approx_bytes(t: &TermSets) -> usize {
    let strings: usize = t.vocab.iter().chain(&t.phrases).map(|s| s.len() + 24).sum();
    strings + t.partner_only.len() + 8 * (t.word_pairs.len() + t.phrase_pairs.len()) + 128
}

/// Checks that papers arrive in strictly increasing order-key order.
struct OrderGuard(Option<OrderKey>);

impl OrderGuard {
    fn check(&mut self, p: &PaperTerms) -> Result<()> {
        let key = p.order_key();
        if let Some(prev) = &self.0 {
            if *prev >= key {
                return Err(Error::UnsortedStream {
                    prev: prev.to_string(),
                    next: key.to_string(),
                });
            }
        }
        self.0 = Some(key);
        Ok(())
    }
}

/// Reads papers into chunks bounded by paper count and fingerprint count.
struct Chunker<'a> {
    iter: PaperIter<'a>,
    guard: OrderGuard,
    max_papers: usize,
    max_terms: usize,
    kinds: KindSet,
}

impl Chunker<'_> {
    fn next_chunk(&mut self) -> Result<Vec<PaperTerms>> {
        let mut chunk = Vec::new();
        let mut terms = 0;
        while chunk.len() < self.max_papers.max(1) && terms < self.max_terms {
            let Some(p) = self.iter.next() else { break };
            let p = p?;
            self.guard.check(&p)?;
            terms += selected_terms(&p.terms, self.kinds);
            chunk.push(p);
        }
        Ok(chunk)
    }
}

/// Counts, for every term, the number of papers containing it and the two
/// earliest of them.
///
/// Memory stays within the configured budget: shards spill sorted runs to
/// disk and are merged when the stream ends. The result does not depend on
/// the number of shards or threads.
pub fn pass1_count(source: &(impl PaperSource + ?Sized), config: &EngineConfig) -> Result<TermStore> {
    let n_shards = config.shards.max(1);
    let dir = match &config.spill_dir {
        Some(d) => tempfile::Builder::new().prefix("novelty-").tempdir_in(d),
        None => tempfile::Builder::new().prefix("novelty-").tempdir(),
    }
    .map_err(|e| Error::io(config.spill_dir.clone().unwrap_or_else(std::env::temp_dir), e))?;

    let limit = config.shard_limit();
    let mut shards: Vec<CountShard> = (0..n_shards).map(|i| CountShard::new(i, limit, dir.path())).collect();
    let mut ids = Vec::new();
    let mut dates = Vec::new();
    let mut digests = Vec::new();
    let mut meta_bytes = 0usize;
    let mut peak = 0usize;

    let mut chunker = Chunker {
        iter: source.open()?,
        guard: OrderGuard(None),
        max_papers: config.chunk_papers,
        max_terms: config.chunk_fp_limit(),
        kinds: config.kinds,
    };
    loop {
        let chunk = chunker.next_chunk()?;
        if chunk.is_empty() {
            break;
        }
        let base = ids.len();
        if base + chunk.len() >= u32::MAX as usize {
            return Err(Error::InvalidArgument("more than 2^32 - 1 papers".into()));
        }
        let chunk_bytes: usize = chunk.iter().map(|p| approx_bytes(&p.terms)).sum();
        let prints: Vec<PaperPrints> = chunk
            .par_iter()
            .map(|p| PaperPrints::compute(&p.terms, config.kinds))
            .collect();
        let mut routed: Vec<Vec<(Fingerprint, u32)>> = vec![Vec::new(); n_shards];
        for (offset, pp) in prints.iter().enumerate() {
            let seq = (base + offset) as u32;
            for fp in pp.iter() {
                routed[shard_of(fp, n_shards)].push((fp, seq));
            }
        }
        for (p, pp) in chunk.into_iter().zip(&prints) {
            meta_bytes += p.paper_id.len() + 24 + 4 + 8;
            digests.push(pp.digest());
            ids.push(p.paper_id);
            dates.push(p.date);
        }
        let prints_bytes: usize = prints.iter().map(|p| p.len() * 16 + 96).sum();
        let routed_bytes: usize = routed.iter().map(|r| r.capacity() * 32).sum();
        drop(prints);

        shards
            .par_iter_mut()
            .zip(routed.par_iter())
            .try_for_each(|(shard, items)| shard.absorb(items))?;

        let shard_bytes: usize = shards.iter().map(CountShard::bytes).sum();
        peak = peak.max(meta_bytes + chunk_bytes + prints_bytes + routed_bytes + shard_bytes);
    }

    // Finishing holds a shard's map, its sorted copy and the candidate
    // buffer, each bounded by the shard limit.
    let finish_bytes: usize = shards
        .iter()
        .map(|s| s.bytes() + 2 * s.len().min(limit / 32) * 32)
        .sum();
    peak = peak.max(meta_bytes + finish_bytes);

    let summaries: Vec<ShardSummary> = shards
        .into_par_iter()
        .map(CountShard::finish)
        .collect::<Result<_>>()?;

    let mut stats = EngineStats {
        papers: ids.len() as u64,
        memory_budget: config.memory_budget,
        ..EngineStats::default()
    };
    for s in &summaries {
        for k in 0..4 {
            stats.distinct[k] += s.distinct[k];
            stats.candidates[k] += s.candidates[k];
        }
        stats.spills += s.spills;
        stats.spilled_bytes += s.spilled_bytes;
    }
    let credit_bytes: usize = summaries.iter().map(|s| s.credits.mem_bytes()).sum();
    stats.peak_accounted_bytes = peak.max(meta_bytes + credit_bytes) as u64;

    Ok(TermStore {
        ids,
        dates,
        digests,
        shards: summaries,
        kinds: config.kinds,
        stats,
        _dir: dir,
    })
}

/// A term credited to the paper that used it first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewTerm {
    pub kind: TermKind,
    /// Words and phrases as is; pairs as `a|b` with `a < b`.
    pub term: String,
    /// Papers containing the term, pioneer included. Reuse is `occ - 1`.
    pub occ: u32,
    /// Sequence number of the next paper when it shares the pioneer's date.
    pub tie_with: Option<u32>,
}

impl NewTerm {
    pub fn reuse(&self) -> u32 {
        self.occ - 1
    }
}

/// Everything pass 2 learns about one paper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperNovelty {
    pub seq: u32,
    pub paper_id: String,
    pub date: NaiveDate,
    pub word_count: u64,
    pub phrase_count: u64,
    /// Sorted by kind, then term.
    pub new_terms: Vec<NewTerm>,
}

fn blocked(baseline: &BaselineDictionary, kind: TermKind, a: &str, b: Option<&str>) -> bool {
    match (kind, b) {
        (TermKind::Word, _) => baseline.contains_word(a),
        (TermKind::Phrase, _) => baseline.contains_phrase(a),
        (TermKind::WordPair, Some(b)) => baseline.contains_word_pair(a, b),
        (TermKind::PhrasePair, Some(b)) => baseline.contains_phrase_pair(a, b),
        _ => false,
    }
}

/// Finds the strings behind this paper's credit candidates.
fn resolve(
    terms: &TermSets,
    prints: &PaperPrints,
    wanted: &HashSet<Fingerprint>,
) -> Vec<(Fingerprint, TermKind, String, Option<String>)> {
    let mut out = Vec::new();
    for (fp, w) in prints.words.iter().zip(terms.words()) {
        if wanted.contains(fp) {
            out.push((*fp, TermKind::Word, w.to_string(), None));
        }
    }
    for (fp, p) in prints.phrases.iter().zip(&terms.phrases) {
        if wanted.contains(fp) {
            out.push((*fp, TermKind::Phrase, p.clone(), None));
        }
    }
    for (fp, (a, b)) in prints.word_pairs.iter().zip(terms.word_pair_strs()) {
        if wanted.contains(fp) {
            out.push((*fp, TermKind::WordPair, a.to_string(), Some(b.to_string())));
        }
    }
    for (fp, (a, b)) in prints.phrase_pairs.iter().zip(terms.phrase_pair_strs()) {
        if wanted.contains(fp) {
            out.push((*fp, TermKind::PhrasePair, a.to_string(), Some(b.to_string())));
        }
    }
    out
}

/// Replays the stream and credits every term with `occ >= 2` that is not in
/// the baseline to its first paper. Calls `sink` once per paper, in order.
pub fn pass2_first_occurrence<F>(
    source: &(impl PaperSource + ?Sized),
    store: &TermStore,
    baseline: &BaselineDictionary,
    config: &EngineConfig,
    mut sink: F,
) -> Result<()>
where
    F: FnMut(PaperNovelty) -> Result<()>,
{
    let mut credits = store.credits()?.peekable();
    let mut chunker = Chunker {
        iter: source.open()?,
        guard: OrderGuard(None),
        max_papers: config.chunk_papers,
        max_terms: config.chunk_fp_limit(),
        kinds: store.kinds,
    };
    let mut seq: usize = 0;
    loop {
        let chunk = chunker.next_chunk()?;
        if chunk.is_empty() {
            break;
        }
        let prints: Vec<PaperPrints> = chunk
            .par_iter()
            .map(|p| PaperPrints::compute(&p.terms, store.kinds))
            .collect();
        for (paper, pp) in chunk.into_iter().zip(prints) {
            if seq >= store.ids.len() {
                return Err(Error::StreamMismatch(format!(
                    "paper {} was not seen in the first pass",
                    paper.paper_id
                )));
            }
            if store.ids[seq] != paper.paper_id {
                return Err(Error::StreamMismatch(format!(
                    "expected paper {} at position {seq}, found {}",
                    store.ids[seq], paper.paper_id
                )));
            }
            if store.digests[seq] != pp.digest() {
                return Err(Error::StreamMismatch(format!(
                    "terms of paper {} differ from the first pass",
                    paper.paper_id
                )));
            }

            let mut mine: Vec<Rec> = Vec::new();
            while let Some(Ok(r)) = credits.peek() {
                if r.a as usize != seq {
                    break;
                }
                mine.push(*r);
                credits.next();
            }
            if let Some(Err(_)) = credits.peek() {
                return Err(credits.next().unwrap().unwrap_err());
            }

            let mut new_terms = Vec::with_capacity(mine.len());
            if !mine.is_empty() {
                let wanted: HashSet<Fingerprint> = mine.iter().map(|r| r.key).collect();
                let found = resolve(&paper.terms, &pp, &wanted);
                if found.len() != mine.len() {
                    return Err(Error::StreamMismatch(format!(
                        "paper {} lacks {} counted term(s)",
                        paper.paper_id,
                        mine.len() - found.len()
                    )));
                }
                for (fp, kind, a, b) in found {
                    debug_assert_eq!(kind_of(fp), kind);
                    if blocked(baseline, kind, &a, b.as_deref()) {
                        continue;
                    }
                    let rec = mine.iter().find(|r| r.key == fp).expect("resolved from wanted");
                    let tie_with = (store.dates[rec.c as usize] == paper.date).then_some(rec.c);
                    let term = match b {
                        Some(b) => format!("{a}|{b}"),
                        None => a,
                    };
                    new_terms.push(NewTerm {
                        kind,
                        term,
                        occ: rec.b,
                        tie_with,
                    });
                }
                new_terms.sort_by(|x, y| (x.kind, &x.term).cmp(&(y.kind, &y.term)));
            }

            sink(PaperNovelty {
                seq: seq as u32,
                paper_id: paper.paper_id,
                date: paper.date,
                word_count: paper.terms.word_count() as u64,
                phrase_count: paper.terms.phrase_count() as u64,
                new_terms,
            })?;
            seq += 1;
        }
    }
    if seq != store.ids.len() {
        return Err(Error::StreamMismatch(format!(
            "second pass saw {seq} papers, first pass {}",
            store.ids.len()
        )));
    }
    if let Some(r) = credits.next() {
        let r = r?;
        return Err(Error::StreamMismatch(format!("unclaimed credit for paper position {}", r.a)));
    }
    Ok(())
}

/// Runs both passes and collects the per-paper results.
pub fn run_novelty(
    source: &(impl PaperSource + ?Sized),
    baseline: &BaselineDictionary,
    config: &EngineConfig,
) -> Result<(TermStore, Vec<PaperNovelty>)> {
    let store = pass1_count(source, config)?;
    let mut out = Vec::with_capacity(store.ids.len());
    pass2_first_occurrence(source, &store, baseline, config, |p| {
        out.push(p);
        Ok(())
    })?;
    Ok((store, out))
}
