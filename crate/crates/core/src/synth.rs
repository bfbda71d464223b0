//! Seeded synthetic corpora for tests, examples and benchmarks.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::PaperRecord;
use crate::error::{Error, Result};
use crate::novelty::{PaperIter, PaperSource, PaperTerms};
use crate::pipeline::PipelineConfig;
use crate::textproc::{TermSets, VocabThreshold};

fn date_at(start_year: i32, day: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(start_year, 1, 1).unwrap() + Duration::days(day)
}

/// Builds term sets from `(word, partner_only)` pairs and phrases.
fn term_sets(mut words: Vec<(String, bool)>, mut phrases: Vec<String>) -> TermSets {
    words.sort();
    words.dedup_by(|a, b| a.0 == b.0);
    phrases.sort();
    phrases.dedup();
    let (vocab, partner): (Vec<String>, Vec<bool>) = words.into_iter().unzip();
    TermSets::from_parts(vocab, partner, phrases)
}

/// Small term-level corpora for exact checks against a naive scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermCorpusConfig {
    pub papers: usize,
    pub vocab: usize,
    pub phrase_vocab: usize,
    pub max_words: usize,
    pub max_phrases: usize,
    /// Every n-th vocabulary word is partner-only; 0 disables.
    pub partner_every: usize,
    pub start_year: i32,
    pub years: i32,
    pub seed: u64,
}

impl Default for TermCorpusConfig {
    fn default() -> Self {
        TermCorpusConfig {
            papers: 300,
            vocab: 150,
            phrase_vocab: 80,
            max_words: 8,
            max_phrases: 3,
            partner_every: 7,
            start_year: 1990,
            years: 30,
            seed: 1,
        }
    }
}

/// Papers sorted by order key. Draws are skewed toward low indices so that
/// some terms recur often and many appear once. Dates repeat on purpose.
pub fn term_corpus(cfg: &TermCorpusConfig) -> Vec<PaperTerms> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let span = (cfg.years as i64 * 365).max(1);
    let mut papers: Vec<PaperTerms> = (0..cfg.papers)
        .map(|i| {
            let day = rng.gen_range(0..span) / 7 * 7;
            let nw = rng.gen_range(0..=cfg.max_words);
            let words = (0..nw)
                .map(|_| {
                    let k = skewed(&mut rng, cfg.vocab);
                    let partner = cfg.partner_every > 0 && k % cfg.partner_every == 0;
                    (format!("w{k}"), partner)
                })
                .collect();
            let np = rng.gen_range(0..=cfg.max_phrases);
            let phrases = (0..np)
                .map(|_| {
                    let k = skewed(&mut rng, cfg.phrase_vocab);
                    format!("p{}_q{}", k / 9, k % 9)
                })
                .collect();
            PaperTerms {
                paper_id: format!("S{i:05}"),
                date: date_at(cfg.start_year, day),
                terms: term_sets(words, phrases),
            }
        })
        .collect();
    papers.sort_by_key(PaperTerms::order_key);
    papers
}

fn skewed<R: Rng>(rng: &mut R, n: usize) -> usize {
    let u: f64 = rng.gen();
    ((u * u * n as f64) as usize).min(n.saturating_sub(1))
}

/// A large corpus generated on the fly, identical on every `open`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamingTermSource {
    pub papers: u64,
    pub vocab: u64,
    pub words_per_paper: usize,
    pub phrases_per_paper: usize,
    pub papers_per_day: u64,
    pub seed: u64,
}

impl StreamingTermSource {
    pub fn new(papers: u64, seed: u64) -> Self {
        StreamingTermSource {
            papers,
            vocab: 4_000_000,
            words_per_paper: 30,
            phrases_per_paper: 4,
            papers_per_day: 100,
            seed,
        }
    }

    pub fn paper(&self, i: u64) -> PaperTerms {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i);
        let draw = |rng: &mut ChaCha8Rng| {
            let u: f64 = rng.gen();
            ((u * u * u * self.vocab as f64) as u64).min(self.vocab - 1)
        };
        let words = (0..self.words_per_paper)
            .map(|_| (format!("w{:x}", draw(&mut rng)), false))
            .collect();
        let phrases = (0..self.phrases_per_paper)
            .map(|_| format!("p{:x}_{:x}", draw(&mut rng) % 50_000, draw(&mut rng) % 97))
            .collect();
        PaperTerms {
            paper_id: format!("Z{i:09}"),
            date: date_at(1950, (i / self.papers_per_day) as i64),
            terms: term_sets(words, phrases),
        }
    }
}

impl PaperSource for StreamingTermSource {
    fn open(&self) -> Result<PaperIter<'_>> {
        Ok(Box::new((0..self.papers).map(|i| Ok(self.paper(i)))))
    }
}

const SYLLABLES: [&str; 18] = [
    "bor", "cal", "den", "fer", "gan", "hol", "ker", "lum", "mor", "nex", "pol", "quar", "rin", "sol", "tam", "ver",
    "zen", "dra",
];
const ENDINGS: [&str; 5] = ["on", "ase", "ite", "ium", "ene"];
const NOUNS: [&str; 24] = [
    "protein", "cell", "model", "theory", "network", "energy", "structure", "system", "membrane", "crystal", "field",
    "gene", "enzyme", "particle", "surface", "signal", "tissue", "lattice", "molecule", "spectrum", "reactor",
    "channel", "receptor", "catalyst",
];
const ADJECTIVES: [&str; 12] = [
    "thermal", "magnetic", "cellular", "optical", "linear", "chemical", "electric", "genetic", "stable", "dynamic",
    "nuclear", "organic",
];
const VERBS: [&str; 10] = [
    "improves", "reveals", "controls", "explains", "enables", "contains", "describes", "affects", "determines",
    "examines",
];
const OLD_NOUNS: [&str; 10] = [
    "heat", "light", "motion", "water", "metal", "salt", "air", "blood", "plant", "force",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextCorpusConfig {
    pub papers: usize,
    pub baseline_papers: usize,
    pub start_year: i32,
    pub years: i32,
    pub journals: usize,
    pub fields: i64,
    pub subfields_per_field: i64,
    pub concepts: usize,
    pub prize: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Default for TextCorpusConfig {
    fn default() -> Self {
        TextCorpusConfig {
            papers: 200,
            baseline_papers: 20,
            start_year: 1990,
            years: 30,
            journals: 6,
            fields: 3,
            subfields_per_field: 3,
            concepts: 40,
            prize: 10,
            dim: 8,
            seed: 2024,
        }
    }
}

/// Text records with references, embeddings and case labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TextCorpus {
    pub records: Vec<PaperRecord>,
    pub baseline: Vec<PaperRecord>,
    pub embeddings: Vec<(String, Vec<f64>)>,
    pub prize_ids: Vec<String>,
}

struct Concept {
    word: String,
    field: i64,
    birth: i64,
    vector: Vec<f64>,
}

fn unit_noise<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * scale).collect()
}

/// Generates a small scholarly corpus. Invented concept words appear at a
/// birth date and spread afterward, papers cite earlier papers sharing
/// their concepts, and vectors cluster by field and concept. The earliest
/// users of popular concepts are labeled as cases.
pub fn text_corpus(cfg: &TextCorpusConfig) -> TextCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let span = cfg.years as i64 * 365;
    let field_vectors: Vec<Vec<f64>> = (0..cfg.fields).map(|_| unit_noise(&mut rng, cfg.dim, 1.0)).collect();
    let mut concepts: Vec<Concept> = (0..cfg.concepts)
        .map(|i| {
            let a = SYLLABLES[i % SYLLABLES.len()];
            let b = SYLLABLES[(i * 7 + 3) % SYLLABLES.len()];
            let e = ENDINGS[(i / SYLLABLES.len() + i) % ENDINGS.len()];
            Concept {
                word: format!("{a}{b}{e}"),
                field: rng.gen_range(0..cfg.fields),
                birth: rng.gen_range(0..span * 4 / 5),
                vector: unit_noise(&mut rng, cfg.dim, 0.8),
            }
        })
        .collect();
    concepts.sort_by(|a, b| a.word.cmp(&b.word));
    concepts.dedup_by(|a, b| a.word == b.word);

    let mut days: Vec<i64> = (0..cfg.papers).map(|_| rng.gen_range(0..span)).collect();
    days.sort_unstable();
    let mut records: Vec<PaperRecord> = Vec::with_capacity(cfg.papers);
    let mut uses: Vec<Vec<usize>> = Vec::new();
    let mut embeddings = Vec::new();
    for (i, &day) in days.iter().enumerate() {
        let field = rng.gen_range(0..cfg.fields);
        let subfield = field * 10 + rng.gen_range(0..cfg.subfields_per_field);
        let venue = format!("J{}", (field as usize * 2 + rng.gen_range(0..2)) % cfg.journals);
        let alive: Vec<usize> = (0..concepts.len())
            .filter(|&c| concepts[c].birth <= day && (concepts[c].field == field || rng.gen_bool(0.15)))
            .collect();
        let take = rng.gen_range(1..=3usize).min(alive.len());
        let mut mine: Vec<usize> = alive
            .choose_multiple(&mut rng, take)
            .copied()
            .collect();
        mine.sort_unstable();
        let pick = |rng: &mut ChaCha8Rng, list: &[&'static str]| *list.choose(rng).unwrap();
        let concept_word = |k: usize| concepts[mine[k % mine.len().max(1)]].word.as_str();
        let title = if mine.is_empty() {
            format!(
                "{} {} of the {} {}",
                capitalize(pick(&mut rng, &ADJECTIVES)),
                pick(&mut rng, &NOUNS),
                pick(&mut rng, &ADJECTIVES),
                pick(&mut rng, &NOUNS)
            )
        } else {
            format!(
                "{} {} {} in {} {}",
                capitalize(pick(&mut rng, &ADJECTIVES)),
                concept_word(0),
                pick(&mut rng, &NOUNS),
                pick(&mut rng, &ADJECTIVES),
                pick(&mut rng, &NOUNS)
            )
        };
        let abstract_text = (i % 9 != 4).then(|| {
            let n = rng.gen_range(2..=4);
            (0..n)
                .map(|s| {
                    let subject = if mine.is_empty() || s % 2 == 1 {
                        pick(&mut rng, &NOUNS).to_string()
                    } else {
                        format!("{} {}", concept_word(s / 2), pick(&mut rng, &NOUNS))
                    };
                    format!(
                        "The {} {} {} the {} {}.",
                        pick(&mut rng, &ADJECTIVES),
                        subject,
                        pick(&mut rng, &VERBS),
                        pick(&mut rng, &ADJECTIVES),
                        pick(&mut rng, &NOUNS)
                    )
                })
                .collect::<Vec<_>>()
                .join(" ")
        });
        let id = format!("W{:04}", i + 1);

        let mut refs: Vec<String> = Vec::new();
        for (j, earlier) in uses.iter().enumerate() {
            let shared = earlier.iter().any(|c| mine.contains(c));
            let p = if shared { 0.25 } else { 0.02 };
            if rng.gen_bool(p) && refs.len() < 8 {
                refs.push(records[j].paper_id.clone());
            }
        }
        if rng.gen_bool(0.3) {
            refs.push(format!("X{}", rng.gen_range(0..50)));
        }

        if i % 17 != 5 {
            let mut v: Vec<f64> = field_vectors[field as usize].clone();
            for &c in &mine {
                for (x, y) in v.iter_mut().zip(&concepts[c].vector) {
                    *x += y;
                }
            }
            for (x, n) in v.iter_mut().zip(unit_noise(&mut rng, cfg.dim, 0.3)) {
                *x = ((*x + n) * 1e4).round() / 1e4;
            }
            embeddings.push((id.clone(), v));
        }

        records.push(
            PaperRecord::new(id, date_at(cfg.start_year, day), title, abstract_text)
                .with_venue(venue)
                .with_fields(Some(subfield), Some(field))
                .with_references(refs),
        );
        uses.push(mine);
    }

    // Cases: the first user of each of the most used concepts.
    let mut popularity: Vec<(usize, usize)> = (0..concepts.len())
        .map(|c| (uses.iter().filter(|u| u.contains(&c)).count(), c))
        .collect();
    popularity.sort_by(|a, b| b.cmp(a));
    let mut prize_ids: Vec<String> = Vec::new();
    for &(_, c) in &popularity {
        if prize_ids.len() >= cfg.prize {
            break;
        }
        if let Some(p) = uses.iter().position(|u| u.contains(&c)) {
            let id = records[p].paper_id.clone();
            if !prize_ids.contains(&id) {
                prize_ids.push(id);
            }
        }
    }
    prize_ids.sort();

    let baseline = (0..cfg.baseline_papers)
        .map(|i| {
            let title = format!(
                "On the {} of {} and {}",
                OLD_NOUNS[i % OLD_NOUNS.len()],
                NOUNS[(i * 5) % NOUNS.len()],
                OLD_NOUNS[(i * 3 + 1) % OLD_NOUNS.len()]
            );
            PaperRecord::new(format!("B{:03}", i + 1), date_at(1850 + i as i32 * 2, 0), title, None)
        })
        .collect();

    TextCorpus {
        records,
        baseline,
        embeddings,
        prize_ids,
    }
}

/// Writes a text corpus as pipeline inputs under `dir`: `shards` corpus
/// files dealt round-robin, baseline records, embeddings, case ids and a
/// `config.toml` with paths relative to `dir`. Returns the loaded config.
pub fn write_fixture(dir: &Path, corpus: &TextCorpus, shards: usize) -> Result<PipelineConfig> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let shards = shards.max(1);
    let mut lines = vec![String::new(); shards];
    for (i, r) in corpus.records.iter().enumerate() {
        lines[i % shards].push_str(&r.to_json_line());
        lines[i % shards].push('\n');
    }
    let mut cfg = PipelineConfig::default();
    for (k, text) in lines.iter().enumerate() {
        let name = format!("corpus_{k}.jsonl");
        let path = dir.join(&name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        cfg.corpus.push(PathBuf::from(name));
    }
    let baseline: String = corpus.baseline.iter().map(|r| r.to_json_line() + "\n").collect();
    let path = dir.join("baseline.jsonl");
    fs::write(&path, baseline).map_err(|e| Error::io(&path, e))?;
    let dim = corpus.embeddings.first().map_or(0, |e| e.1.len());
    crate::semdist::write_tsv(&dir.join("embeddings.tsv"), dim, &corpus.embeddings)?;
    let cases: String = corpus.prize_ids.iter().map(|id| format!("{id}\n")).collect();
    let path = dir.join("cases.txt");
    fs::write(&path, cases).map_err(|e| Error::io(&path, e))?;

    cfg.baseline = Some("baseline.jsonl".into());
    cfg.embeddings = Some("embeddings.tsv".into());
    cfg.cases = Some("cases.txt".into());
    cfg.output = "out".into();
    cfg.common_words = VocabThreshold::PerMillion(50_000.0);
    cfg.reuse.sample_terms = 20;
    let text = toml::to_string(&cfg).map_err(|e| Error::Internal(e.to_string()))?;
    let path = dir.join("config.toml");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    PipelineConfig::load(&path)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
