use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use super::record::PaperRecord;
use crate::error::{Error, Result};
use crate::textproc::{Mode, TermSets, TextProcessor};

/// First and last year a record may have to enter the baseline.
pub const BASELINE_YEARS: (i32, i32) = (1666, 1900);

/// Terms seen before the analysis period. Lookups are exact string
/// membership.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaselineDictionary {
    pub words: BTreeSet<String>,
    pub phrases: BTreeSet<String>,
    /// Present when pair seeding is enabled. Pairs are stored `(a, b)` with
    /// `a < b`.
    pub word_pairs: Option<BTreeSet<(String, String)>>,
    pub phrase_pairs: Option<BTreeSet<(String, String)>>,
}

impl BaselineDictionary {
    pub fn empty(with_pairs: bool) -> Self {
        BaselineDictionary {
            words: BTreeSet::new(),
            phrases: BTreeSet::new(),
            word_pairs: with_pairs.then(BTreeSet::new),
            phrase_pairs: with_pairs.then(BTreeSet::new),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
            && self.phrases.is_empty()
            && self.word_pairs.as_ref().is_none_or(|s| s.is_empty())
            && self.phrase_pairs.as_ref().is_none_or(|s| s.is_empty())
    }

    pub fn contains_word(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    pub fn contains_phrase(&self, p: &str) -> bool {
        self.phrases.contains(p)
    }

    pub fn contains_word_pair(&self, a: &str, b: &str) -> bool {
        pair_member(self.word_pairs.as_ref(), a, b)
    }

    pub fn contains_phrase_pair(&self, a: &str, b: &str) -> bool {
        pair_member(self.phrase_pairs.as_ref(), a, b)
    }

    /// Adds every term of one processed baseline paper.
    pub fn absorb(&mut self, terms: &TermSets) {
        self.words.extend(terms.vocab.iter().cloned());
        self.phrases.extend(terms.phrases.iter().cloned());
        if let Some(set) = self.word_pairs.as_mut() {
            set.extend(
                terms
                    .word_pairs
                    .iter()
                    .map(|&(i, j)| (terms.vocab[i as usize].clone(), terms.vocab[j as usize].clone())),
            );
        }
        if let Some(set) = self.phrase_pairs.as_mut() {
            set.extend(terms.phrase_pairs.iter().map(|&(i, j)| {
                (terms.phrases[i as usize].clone(), terms.phrases[j as usize].clone())
            }));
        }
    }

    /// Writes `kind<TAB>term` lines sorted by kind then term. Pairs use `a|b`.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let emit = |out: &mut BufWriter<File>| -> std::io::Result<()> {
            writeln!(out, "# pairs={}", self.word_pairs.is_some())?;
            for w in &self.words {
                writeln!(out, "word\t{w}")?;
            }
            for p in &self.phrases {
                writeln!(out, "phrase\t{p}")?;
            }
            for (a, b) in self.word_pairs.iter().flatten() {
                writeln!(out, "word_pair\t{a}|{b}")?;
            }
            for (a, b) in self.phrase_pairs.iter().flatten() {
                writeln!(out, "phrase_pair\t{a}|{b}")?;
            }
            out.flush()
        };
        emit(&mut out).map_err(|e| Error::io(path, e))
    }

    pub fn read_tsv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut dict = BaselineDictionary::empty(false);
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let malformed = |message: String| Error::Malformed { line: n + 1, message };
            if let Some(flag) = line.strip_prefix("# pairs=") {
                if flag.trim() == "true" {
                    dict.word_pairs = Some(BTreeSet::new());
                    dict.phrase_pairs = Some(BTreeSet::new());
                }
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (kind, term) = line
                .split_once('\t')
                .ok_or_else(|| malformed(format!("expected kind<TAB>term, got {line:?}")))?;
            let split_pair = || {
                term.split_once('|')
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .ok_or_else(|| malformed(format!("pair without '|': {term:?}")))
            };
            match kind {
                "word" => {
                    dict.words.insert(term.to_string());
                }
                "phrase" => {
                    dict.phrases.insert(term.to_string());
                }
                "word_pair" => {
                    let pair = split_pair()?;
                    dict.word_pairs.get_or_insert_with(BTreeSet::new).insert(pair);
                }
                "phrase_pair" => {
                    let pair = split_pair()?;
                    dict.phrase_pairs.get_or_insert_with(BTreeSet::new).insert(pair);
                }
                other => return Err(malformed(format!("unknown kind {other:?}"))),
            }
        }
        Ok(dict)
    }
}

fn pair_member(set: Option<&BTreeSet<(String, String)>>, a: &str, b: &str) -> bool {
    let Some(set) = set else { return false };
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    // BTreeSet<(String, String)> cannot be probed with borrowed halves.
    set.contains(&(a.to_string(), b.to_string()))
}

pub fn in_baseline_period(date: NaiveDate) -> bool {
    (BASELINE_YEARS.0..=BASELINE_YEARS.1).contains(&date.year())
}

/// Processes every baseline record and collects its terms.
///
/// Fails on the first record dated outside the baseline years.
pub fn build_baseline<'a, I>(
    records: I,
    processor: &TextProcessor,
    with_pairs: bool,
) -> Result<BaselineDictionary>
where
    I: IntoIterator<Item = &'a PaperRecord>,
{
    let mut dict = BaselineDictionary::empty(with_pairs);
    for rec in records {
        if !in_baseline_period(rec.pub_date) {
            return Err(Error::BaselineDate {
                paper_id: rec.paper_id.clone(),
                date: rec.pub_date.to_string(),
            });
        }
        let terms = processor.process_paper(rec, Mode::Full);
        dict.absorb(&terms);
    }
    Ok(dict)
}
