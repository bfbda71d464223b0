use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STOP_SEED: &str = include_str!("../../data/stop_seed.txt");
const REMOVAL_SEED: &str = include_str!("../../data/removal_seed.txt");
const NATURAL_STOPWORDS: &str = include_str!("../../data/natural_stopwords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordClass {
    Stop,
    Removal,
    Keep,
}

/// Stop and removal word sets.
///
/// Besides set membership, [`FilterLists::classify`] applies the
/// word-shape rules to every word: number-only and malformed tokens are
/// stop words, a hyphenated word with any stop constituent is a stop word,
/// and one made only of removal constituents is a removal word.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterLists {
    pub stop_words: HashSet<String>,
    pub removal_words: HashSet<String>,
    /// Treat words with non-ASCII characters as malformed.
    pub ascii_only: bool,
}

/// Reads a word list: one term per line, `#` comments, blank lines ignored.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

pub fn write_word_list<'a, I>(path: &Path, words: I) -> Result<()>
where
    I: IntoIterator<Item = &'a String>,
{
    let sorted: BTreeSet<&String> = words.into_iter().collect();
    let mut text = String::new();
    for w in sorted {
        text.push_str(w);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl FilterLists {
    /// Builds lists from seed files. Seeds must be disjoint.
    pub fn from_seeds<S, R>(stop: S, removal: R) -> Result<Self>
    where
        S: IntoIterator<Item = String>,
        R: IntoIterator<Item = String>,
    {
        let stop_words: HashSet<String> = stop.into_iter().collect();
        let removal_words: HashSet<String> = removal.into_iter().collect();
        let mut overlap: Vec<String> = stop_words.intersection(&removal_words).cloned().collect();
        if !overlap.is_empty() {
            overlap.sort();
            return Err(Error::OverlappingSeeds(overlap));
        }
        Ok(FilterLists {
            stop_words,
            removal_words,
            ascii_only: true,
        })
    }

    /// The bundled seed lists, without natural stop words.
    pub fn bundled_seeds() -> Self {
        Self::from_seeds(parse_word_list(STOP_SEED), parse_word_list(REMOVAL_SEED))
            .expect("bundled seeds are disjoint")
    }

    /// The bundled seeds plus the bundled natural stop words. Good enough to
    /// process text without a corpus-specific expansion step.
    pub fn bundled() -> Self {
        let mut lists = Self::bundled_seeds();
        lists.add_stop_words(bundled_natural_stopwords());
        lists
    }

    /// Adds stop words, removing them from the removal set if present.
    pub fn add_stop_words<I: IntoIterator<Item = String>>(&mut self, words: I) {
        for w in words {
            self.removal_words.remove(&w);
            self.stop_words.insert(w);
        }
    }

    pub fn classify(&self, word: &str) -> WordClass {
        if self.stop_words.contains(word) {
            return WordClass::Stop;
        }
        if self.removal_words.contains(word) {
            return WordClass::Removal;
        }
        if is_number_only(word) || self.is_malformed(word) {
            return WordClass::Stop;
        }
        if word.contains('-') {
            let parts = word.split('-');
            let mut all_removal = true;
            for part in parts {
                if self.stop_words.contains(part) || is_number_only(part) {
                    return WordClass::Stop;
                }
                all_removal &= self.removal_words.contains(part);
            }
            if all_removal {
                return WordClass::Removal;
            }
        }
        WordClass::Keep
    }

    pub fn is_stop(&self, word: &str) -> bool {
        self.classify(word) == WordClass::Stop
    }

    pub fn is_removal(&self, word: &str) -> bool {
        self.classify(word) == WordClass::Removal
    }

    fn is_malformed(&self, word: &str) -> bool {
        word.is_empty()
            || word.starts_with('-')
            || word.ends_with('-')
            || word.contains("--")
            || (self.ascii_only && !word.is_ascii())
    }

    /// Writes `stop_words.txt` and `removal_words.txt` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        write_word_list(&dir.join("stop_words.txt"), &self.stop_words)?;
        write_word_list(&dir.join("removal_words.txt"), &self.removal_words)
    }

    pub fn read_dir(dir: &Path, ascii_only: bool) -> Result<Self> {
        let stop = read_word_list(&dir.join("stop_words.txt"))?;
        let removal = read_word_list(&dir.join("removal_words.txt"))?;
        let mut lists = Self::from_seeds(stop, removal)?;
        lists.ascii_only = ascii_only;
        Ok(lists)
    }
}

pub fn bundled_natural_stopwords() -> Vec<String> {
    parse_word_list(NATURAL_STOPWORDS)
}

fn is_number_only(word: &str) -> bool {
    !word.is_empty() && !word.chars().any(char::is_alphabetic)
}

/// Minimum document frequency for a word to enter list expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabThreshold {
    /// Absolute number of papers.
    Papers(u64),
    /// Papers per million papers in the corpus, for small corpora.
    PerMillion(f64),
}

impl Default for VocabThreshold {
    fn default() -> Self {
        VocabThreshold::Papers(1000)
    }
}

impl VocabThreshold {
    pub fn min_papers(self, corpus_papers: u64) -> u64 {
        match self {
            VocabThreshold::Papers(n) => n,
            VocabThreshold::PerMillion(r) => ((r * corpus_papers as f64) / 1e6).ceil().max(1.0) as u64,
        }
    }
}

/// Expands seed lists over the common corpus vocabulary.
///
/// `vocab` maps each word to the number of papers containing it. Words at
/// or above the threshold are classified with the hyphen, number and
/// malformed-token rules and added to the matching set. Natural stop words
/// join the stop set. Stop wins whenever a word qualifies for both.
pub fn expand_filter_lists(
    seed: &FilterLists,
    vocab: &HashMap<String, u64>,
    corpus_papers: u64,
    threshold: VocabThreshold,
    natural: &[String],
) -> FilterLists {
    let mut out = seed.clone();
    out.add_stop_words(natural.iter().cloned());
    let min = threshold.min_papers(corpus_papers);
    let mut common: Vec<&String> = vocab
        .iter()
        .filter(|(_, &n)| n >= min)
        .map(|(w, _)| w)
        .collect();
    common.sort();
    let mut new_stop = Vec::new();
    let mut new_removal = Vec::new();
    for w in common {
        match out.classify(w) {
            WordClass::Stop if !out.stop_words.contains(w) => new_stop.push(w.clone()),
            WordClass::Removal if !out.removal_words.contains(w) => new_removal.push(w.clone()),
            _ => {}
        }
    }
    out.add_stop_words(new_stop);
    out.removal_words.extend(new_removal);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lists(stop: &[&str], removal: &[&str]) -> FilterLists {
        FilterLists::from_seeds(
            stop.iter().map(|s| s.to_string()),
            removal.iter().map(|s| s.to_string()),
        )
        .unwrap()
    }

    fn vocab(words: &[&str]) -> HashMap<String, u64> {
        words.iter().map(|w| (w.to_string(), 5000)).collect()
    }

    #[test]
    fn hyphenated_with_stop_constituent_becomes_stop() {
        let seed = lists(&["journal"], &[]);
        let out = expand_filter_lists(&seed, &vocab(&["journal-based"]), 1, VocabThreshold::default(), &[]);
        assert!(out.stop_words.contains("journal-based"));
    }

    #[test]
    fn all_removal_hyphenated_becomes_removal() {
        let seed = lists(&[], &["autonomous", "movement"]);
        let out = expand_filter_lists(
            &seed,
            &vocab(&["autonomous-movement", "autonomous-robot"]),
            1,
            VocabThreshold::default(),
            &[],
        );
        assert!(out.removal_words.contains("autonomous-movement"));
        assert!(!out.removal_words.contains("autonomous-robot"));
        assert!(!out.stop_words.contains("autonomous-robot"));
    }

    #[test]
    fn numbers_and_malformed_are_stop() {
        let seed = lists(&[], &[]);
        let out = expand_filter_lists(
            &seed,
            &vocab(&["2024", "-x", "a--b", "café", "graphene"]),
            1,
            VocabThreshold::default(),
            &[],
        );
        for w in ["2024", "-x", "a--b", "café"] {
            assert!(out.stop_words.contains(w), "{w}");
        }
        assert_eq!(out.classify("graphene"), WordClass::Keep);
        assert_eq!(out.classify("1999"), WordClass::Stop);
    }

    #[test]
    fn rare_words_not_materialized_but_still_classified() {
        let seed = lists(&["journal"], &[]);
        let mut v = vocab(&[]);
        v.insert("journal-club".into(), 3);
        let out = expand_filter_lists(&seed, &v, 10_000, VocabThreshold::default(), &[]);
        assert!(!out.stop_words.contains("journal-club"));
        assert_eq!(out.classify("journal-club"), WordClass::Stop);
    }

    #[test]
    fn overlapping_seeds_fail() {
        let err = FilterLists::from_seeds(vec!["x".to_string()], vec!["x".to_string()]).unwrap_err();
        assert!(matches!(err, Error::OverlappingSeeds(v) if v == ["x"]));
    }

    #[test]
    fn natural_stop_words_win_over_removal() {
        let seed = lists(&[], &["may"]);
        let out = expand_filter_lists(&seed, &vocab(&[]), 1, VocabThreshold::default(), &["may".into()]);
        assert!(out.stop_words.contains("may"));
        assert!(out.stop_words.is_disjoint(&out.removal_words));
    }

    #[test]
    fn per_million_threshold() {
        assert_eq!(VocabThreshold::PerMillion(1000.0).min_papers(2_000_000), 2000);
        assert_eq!(VocabThreshold::PerMillion(1000.0).min_papers(200), 1);
    }

    #[test]
    fn bundled_lists_are_disjoint() {
        let b = FilterLists::bundled();
        assert!(b.stop_words.is_disjoint(&b.removal_words));
        assert!(b.is_stop("the"));
        assert!(b.is_removal("movement"));
        assert_eq!(b.classify("x-ray"), WordClass::Keep);
    }

    #[test]
    fn dir_roundtrip() {
        let b = FilterLists::bundled();
        let dir = tempfile::tempdir().unwrap();
        b.write_dir(dir.path()).unwrap();
        assert_eq!(FilterLists::read_dir(dir.path(), true).unwrap(), b);
    }
}
