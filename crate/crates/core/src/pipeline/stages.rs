use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::artifacts::*;
use super::config::PipelineConfig;
use crate::citemetrics::{compute_all, CitationGraph, GraphTally};
use crate::corpus::{
    build_baseline, clean_corpus, load_all, load_stream, BaselineDictionary, CorpusManifest, IngestOptions,
    PaperRecord, MALFORMED_LINE,
};
use crate::error::{Error, Result};
use crate::novelty::{
    pass1_count, pass2_first_occurrence, EngineStats, MetricsRow, PaperIter, PaperSource, PaperTerms,
    TermTableWriter, METRICS_COLUMNS,
};
use crate::semdist::{load_embeddings, EmbeddingStore, LoadTally, SemanticIndex};
use crate::textproc::{
    bundled_natural_stopwords, expand_filter_lists, FilterLists, Lemmatizer, LexiconTagger, Mode, NoveltyLexicon,
    TermSets, TextProcessor,
};

const CHUNK: usize = 4096;

/// One line of `terms.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermLine {
    pub id: String,
    pub date: NaiveDate,
    pub has_abstract: bool,
    pub terms: TermSets,
}

/// `terms.jsonl` as a re-readable paper stream.
pub struct TermsFile {
    pub path: PathBuf,
}

impl TermsFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        TermsFile { path: path.into() }
    }

    pub fn lines(&self) -> Result<impl Iterator<Item = Result<TermLine>> + Send + '_> {
        let file = File::open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        Ok(BufReader::new(file).lines().enumerate().map(move |(n, line)| {
            let line = line.map_err(|e| Error::io(&self.path, e))?;
            serde_json::from_str::<TermLine>(&line).map_err(|e| Error::Malformed {
                line: n + 1,
                message: e.to_string(),
            })
        }))
    }
}

impl PaperSource for TermsFile {
    fn open(&self) -> Result<PaperIter<'_>> {
        Ok(Box::new(self.lines()?.map(|l| {
            l.map(|l| PaperTerms {
                paper_id: l.id,
                date: l.date,
                terms: l.terms,
            })
        })))
    }
}

pub fn artifact(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

/// Reads the cleaned corpus written by the ingest stage.
pub fn read_corpus(out: &Path) -> Result<Vec<PaperRecord>> {
    Ok(load_all(&[artifact(out, CORPUS)], IngestOptions { strict: true })?.records)
}

/// Tagger and lemmatizer from the configured lexicons, with seed lists
/// plus natural stop words.
pub fn base_processor(cfg: &PipelineConfig) -> Result<TextProcessor> {
    let tagger = match &cfg.tag_lexicon {
        Some(p) => LexiconTagger::from_file(p)?,
        None => LexiconTagger::bundled(),
    };
    let lemmatizer = match &cfg.lemma_lexicon {
        Some(p) => Lemmatizer::from_file(p)?,
        None => Lemmatizer::bundled(),
    };
    let lists = seed_lists(cfg)?;
    Ok(TextProcessor::new(Arc::new(tagger), lemmatizer, lists))
}

fn seed_lists(cfg: &PipelineConfig) -> Result<FilterLists> {
    let mut lists = match &cfg.filter_seeds {
        Some(dir) => FilterLists::read_dir(dir, true)?,
        None => FilterLists::bundled_seeds(),
    };
    lists.add_stop_words(bundled_natural_stopwords());
    Ok(lists)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestReport {
    pub records_read: usize,
    pub corpus: CorpusManifest,
}

pub fn ingest(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let loaded = load_all(&cfg.corpus, IngestOptions { strict: cfg.strict })?;
    let records_read = loaded.records.len();
    let (records, mut manifest) = clean_corpus(loaded.records, &cfg.cleaning);
    manifest
        .exclusion_tallies
        .insert(MALFORMED_LINE.to_string(), loaded.malformed as u64);
    manifest
        .warnings
        .insert("inverted_index_gaps".to_string(), loaded.position_gaps as u64);
    let path = artifact(out, CORPUS);
    ensure_parent(&path)?;
    let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
    for r in &records {
        writeln!(w, "{}", r.to_json_line()).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    write_json(
        &artifact(out, INGEST_MANIFEST),
        &IngestReport {
            records_read,
            corpus: manifest,
        },
    )
}

pub fn baseline(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let dict = match &cfg.baseline {
        Some(p) => {
            let recs = load_all(&[p], IngestOptions { strict: cfg.strict })?.records;
            build_baseline(&recs, &base_processor(cfg)?, cfg.pair_baseline)?
        }
        None => BaselineDictionary::empty(cfg.pair_baseline),
    };
    let path = artifact(out, BASELINE);
    ensure_parent(&path)?;
    dict.write_tsv(&path)
}

fn text_of(rec: &PaperRecord, mode: Mode) -> String {
    match mode {
        Mode::Full => rec.full_text(),
        Mode::TitleOnly => rec.title.clone(),
    }
}

/// Runs `f` over the corpus in chunks, in parallel within a chunk, and
/// hands each chunk's results to `sink` in corpus order.
fn map_corpus<T, F, S>(out: &Path, f: F, mut sink: S) -> Result<()>
where
    T: Send,
    F: Fn(&PaperRecord) -> T + Sync,
    S: FnMut(&PaperRecord, T) -> Result<()>,
{
    let mut stream = load_stream(&artifact(out, CORPUS), IngestOptions { strict: true })?;
    loop {
        let chunk: Vec<PaperRecord> = stream.by_ref().take(CHUNK).collect::<Result<_>>()?;
        if chunk.is_empty() {
            return Ok(());
        }
        let results: Vec<T> = chunk.par_iter().map(&f).collect();
        for (rec, r) in chunk.iter().zip(results) {
            sink(rec, r)?;
        }
    }
}

pub fn preprocess(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let base = base_processor(cfg)?;
    let mut vocab: HashMap<String, u64> = HashMap::new();
    let mut papers = 0u64;
    map_corpus(
        out,
        |rec| {
            let mut words: Vec<String> = base.raw_terms(&text_of(rec, cfg.mode)).words;
            words.sort_unstable();
            words.dedup();
            words
        },
        |_, words| {
            papers += 1;
            for w in words {
                *vocab.entry(w).or_insert(0) += 1;
            }
            Ok(())
        },
    )?;
    let lists = expand_filter_lists(&seed_lists(cfg)?, &vocab, papers, cfg.common_words, &[]);
    drop(vocab);
    let stop = artifact(out, STOP_WORDS);
    ensure_parent(&stop)?;
    lists.write_dir(stop.parent().expect("filters dir"))?;

    let processor = base.with_lists(lists);
    let lexicon = match &cfg.novelty_lexicon {
        Some(p) => NoveltyLexicon::from_file(p)?,
        None => NoveltyLexicon::bundled().clone(),
    };
    let terms_path = artifact(out, TERMS);
    let mut terms = BufWriter::new(File::create(&terms_path).map_err(|e| Error::io(&terms_path, e))?);
    let mut flags = TsvWriter::create(&artifact(out, NOVELTY_LANGUAGE), &["paper_id", "novelty_language"])?;
    map_corpus(
        out,
        |rec| {
            let line = TermLine {
                id: rec.paper_id.clone(),
                date: rec.pub_date,
                has_abstract: rec.has_abstract,
                terms: processor.process_paper(rec, cfg.mode),
            };
            let abs = match cfg.mode {
                Mode::Full => rec.abstract_text.as_deref(),
                Mode::TitleOnly => None,
            };
            (serde_json::to_string(&line).expect("terms serialize"), lexicon.detect(&rec.title, abs))
        },
        |rec, (json, flag)| {
            writeln!(terms, "{json}").map_err(|e| Error::io(&terms_path, e))?;
            flags.row(&[rec.paper_id.as_str(), if flag { "1" } else { "0" }])
        },
    )?;
    terms.flush().map_err(|e| Error::io(&terms_path, e))?;
    flags.finish()
}

pub fn novelty(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let baseline = BaselineDictionary::read_tsv(&artifact(out, BASELINE))?;
    let source = TermsFile::new(artifact(out, TERMS));
    let has_abstract: Vec<bool> = source.lines()?.map(|l| l.map(|l| l.has_abstract)).collect::<Result<_>>()?;
    let store = pass1_count(&source, &cfg.engine)?;
    let mut metrics = TsvWriter::create(&artifact(out, METRICS), &METRICS_COLUMNS)?;
    let mut tables = TermTableWriter::create(&artifact(out, TERM_STATS), &artifact(out, TIES))?;
    pass2_first_occurrence(&source, &store, &baseline, &cfg.engine, |paper| {
        let row = MetricsRow::from_novelty(&paper, has_abstract[paper.seq as usize]);
        metrics.row(&[row.to_tsv_line()])?;
        tables.write(&paper, &store.ids)
    })?;
    metrics.finish()?;
    tables.finish()?;
    write_json(&artifact(out, ENGINE_STATS), &store.stats)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SemdistReport {
    pub dimension: usize,
    pub vectors: usize,
    pub tally: LoadTally,
    pub papers: usize,
    pub with_distance: usize,
}

pub fn semdist(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let records = read_corpus(out)?;
    let ids: HashSet<String> = records.iter().map(|r| r.paper_id.clone()).collect();
    let store = match &cfg.embeddings {
        Some(p) => load_embeddings(p, Some(&ids))?,
        None => EmbeddingStore::default(),
    };
    let keys: Vec<_> = records.iter().map(PaperRecord::order_key).collect();
    let index = SemanticIndex::new(keys, &store);
    let distances = index.all(cfg.window);
    let mut w = TsvWriter::create(&artifact(out, SEMDIST), &["paper_id", "semantic_distance"])?;
    for (k, d) in index.keys().iter().zip(&distances) {
        w.row(&[k.id.clone(), cell(*d)])?;
    }
    w.finish()?;
    write_json(
        &artifact(out, SEMDIST_STATS),
        &SemdistReport {
            dimension: store.dimension(),
            vectors: store.len(),
            tally: store.tally.clone(),
            papers: records.len(),
            with_distance: distances.iter().filter(|d| d.is_some()).count(),
        },
    )
}

pub const CITATION_COLUMNS: [&str; 7] = ["paper_id", "n_refs", "n_ref_journals", "citations", "uzzi", "wang", "cd"];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CiteReport {
    pub papers: usize,
    pub edges: usize,
    pub tally: GraphTally,
    pub uzzi_defined: usize,
    pub wang_defined: usize,
    pub cd_defined: usize,
}

pub fn cite(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let records = read_corpus(out)?;
    let graph = CitationGraph::build(&records);
    let metrics = compute_all(&graph, &cfg.cite)?;
    let mut w = TsvWriter::create(&artifact(out, CITATIONS), &CITATION_COLUMNS)?;
    for (i, m) in metrics.iter().enumerate() {
        w.row(&[
            m.paper_id.clone(),
            m.n_refs.to_string(),
            m.n_ref_journals.to_string(),
            graph.cited_by[i].len().to_string(),
            cell(m.uzzi),
            cell(m.wang),
            cell(m.cd),
        ])?;
    }
    w.finish()?;
    write_json(
        &artifact(out, CITE_STATS),
        &CiteReport {
            papers: graph.len(),
            edges: graph.cites.iter().map(Vec::len).sum(),
            tally: graph.tally.clone(),
            uzzi_defined: metrics.iter().filter(|m| m.uzzi.is_some()).count(),
            wang_defined: metrics.iter().filter(|m| m.wang.is_some()).count(),
            cd_defined: metrics.iter().filter(|m| m.cd.is_some()).count(),
        },
    )
}

/// Reads a TSV with a header into rows of cells.
pub fn read_tsv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(h) => h.map_err(|e| Error::io(path, e))?.split('\t').map(String::from).collect(),
        None => Vec::new(),
    };
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let row: Vec<String> = line.split('\t').map(String::from).collect();
        if row.len() != header.len() {
            return Err(Error::Malformed {
                line: n + 2,
                message: format!("{}: expected {} columns, found {}", path.display(), header.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn parse_opt(s: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Malformed {
        line,
        message: format!("not a number: {s:?}"),
    })
}

pub fn engine_stats(out: &Path) -> Result<EngineStats> {
    let path = artifact(out, ENGINE_STATS);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}
