use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::chunk::extract_noun_phrases;
use super::filters::{FilterLists, WordClass};
use super::lemma::Lemmatizer;
use super::tagger::{LexiconTagger, Tagger};
use super::token::{tokenize, Token};
use crate::corpus::PaperRecord;

/// Lemmatized words and phrases of one text before filtering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawTerms {
    pub words: Vec<String>,
    /// Each phrase as its lemma sequence.
    pub phrases: Vec<Vec<String>>,
}

/// Deduplicated terms of one paper.
///
/// `vocab` holds every retained word in sorted order. Words flagged in
/// `partner_only` are removal words: they never count as words themselves
/// but pair with other words. Pairs are index pairs `(i, j)` with `i < j`,
/// so the first element always sorts first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "StoredTerms", into = "StoredTerms")]
pub struct TermSets {
    pub vocab: Vec<String>,
    pub partner_only: Vec<bool>,
    pub phrases: Vec<String>,
    pub word_pairs: Vec<(u32, u32)>,
    pub phrase_pairs: Vec<(u32, u32)>,
}

#[derive(Serialize, Deserialize)]
struct StoredTerms {
    #[serde(rename = "w")]
    vocab: Vec<String>,
    #[serde(rename = "r", default, skip_serializing_if = "Vec::is_empty")]
    partners: Vec<u32>,
    #[serde(rename = "p")]
    phrases: Vec<String>,
}

impl From<StoredTerms> for TermSets {
    fn from(s: StoredTerms) -> Self {
        let mut partner_only = vec![false; s.vocab.len()];
        for i in s.partners {
            if let Some(flag) = partner_only.get_mut(i as usize) {
                *flag = true;
            }
        }
        TermSets::from_parts(s.vocab, partner_only, s.phrases)
    }
}

impl From<TermSets> for StoredTerms {
    fn from(t: TermSets) -> Self {
        let partners = (0..t.vocab.len() as u32)
            .filter(|&i| t.partner_only[i as usize])
            .collect();
        StoredTerms {
            vocab: t.vocab,
            partners,
            phrases: t.phrases,
        }
    }
}

impl TermSets {
    /// Builds the pair sets from sorted, deduplicated words and phrases.
    pub fn from_parts(vocab: Vec<String>, partner_only: Vec<bool>, phrases: Vec<String>) -> Self {
        debug_assert!(vocab.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(phrases.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(vocab.len(), partner_only.len());
        let n = vocab.len() as u32;
        let mut word_pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !(partner_only[i as usize] && partner_only[j as usize]) {
                    word_pairs.push((i, j));
                }
            }
        }
        let m = phrases.len() as u32;
        let mut phrase_pairs = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                if !acronym_of(&phrases[i as usize], &phrases[j as usize]) {
                    phrase_pairs.push((i, j));
                }
            }
        }
        TermSets {
            vocab,
            partner_only,
            phrases,
            word_pairs,
            phrase_pairs,
        }
    }

    /// Words that can be credited as new.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vocab
            .iter()
            .zip(&self.partner_only)
            .filter(|(_, &p)| !p)
            .map(|(w, _)| w.as_str())
    }

    /// Number of retained distinct words, removal words included.
    pub fn word_count(&self) -> usize {
        self.vocab.len()
    }

    pub fn phrase_count(&self) -> usize {
        self.phrases.len()
    }

    pub fn word_pair_strs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.word_pairs
            .iter()
            .map(|&(i, j)| (self.vocab[i as usize].as_str(), self.vocab[j as usize].as_str()))
    }

    pub fn phrase_pair_strs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.phrase_pairs
            .iter()
            .map(|&(i, j)| (self.phrases[i as usize].as_str(), self.phrases[j as usize].as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty() && self.phrases.is_empty()
    }
}

/// True when one phrase is a single token spelled by the first letters of
/// the other phrase's tokens. Underscores and hyphens both separate tokens.
pub fn acronym_of(a: &str, b: &str) -> bool {
    if a == b {
        return false;
    }
    is_acronym(a, b) || is_acronym(b, a)
}

fn is_acronym(short: &str, long: &str) -> bool {
    if short.contains(['_', '-']) {
        return false;
    }
    let parts: Vec<&str> = long.split(['_', '-']).filter(|p| !p.is_empty()).collect();
    if parts.len() < 2 || parts.len() != short.chars().count() {
        return false;
    }
    parts
        .iter()
        .zip(short.chars())
        .all(|(p, c)| p.chars().next().is_some_and(|f| f.to_lowercase().eq(c.to_lowercase())))
}

/// Applies the stop/removal rules to raw terms.
pub fn filter_terms(raw: &RawTerms, lists: &FilterLists) -> TermSets {
    let mut kept: BTreeSet<(&str, bool)> = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for w in &raw.words {
        if !seen.insert(w.as_str()) {
            continue;
        }
        match lists.classify(w) {
            WordClass::Stop => {}
            WordClass::Removal => {
                kept.insert((w, true));
            }
            WordClass::Keep => {
                kept.insert((w, false));
            }
        }
    }
    let (vocab, partner_only): (Vec<String>, Vec<bool>) =
        kept.into_iter().map(|(w, p)| (w.to_string(), p)).unzip();

    let mut phrases = BTreeSet::new();
    for phrase in &raw.phrases {
        if let Some(p) = filter_phrase(phrase, lists) {
            phrases.insert(p);
        }
    }
    TermSets::from_parts(vocab, partner_only, phrases.into_iter().collect())
}

/// Strips leading stop words, then rejects phrases that still contain a
/// stop word or consist only of removal words.
pub fn filter_phrase(lemmas: &[String], lists: &FilterLists) -> Option<String> {
    let start = lemmas
        .iter()
        .position(|w| lists.classify(w) != WordClass::Stop)?;
    let rest = &lemmas[start..];
    let mut all_removal = true;
    for w in rest {
        match lists.classify(w) {
            WordClass::Stop => return None,
            WordClass::Removal => {}
            WordClass::Keep => all_removal = false,
        }
    }
    if all_removal {
        return None;
    }
    Some(rest.join("_"))
}

/// Which parts of a record are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Full,
    TitleOnly,
}

/// Tagger, lemmatizer and filter lists bundled into one reusable handle.
#[derive(Clone)]
pub struct TextProcessor {
    pub tagger: Arc<dyn Tagger>,
    pub lemmatizer: Lemmatizer,
    pub lists: FilterLists,
}

impl std::fmt::Debug for TextProcessor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TextProcessor")
            .field("lemmatizer", &self.lemmatizer)
            .field("stop_words", &self.lists.stop_words.len())
            .field("removal_words", &self.lists.removal_words.len())
            .finish()
    }
}

impl TextProcessor {
    pub fn new(tagger: Arc<dyn Tagger>, lemmatizer: Lemmatizer, lists: FilterLists) -> Self {
        TextProcessor {
            tagger,
            lemmatizer,
            lists,
        }
    }

    /// Bundled lexicons with seed plus natural stop lists.
    pub fn bundled() -> Self {
        Self::new(
            Arc::new(LexiconTagger::bundled()),
            Lemmatizer::bundled(),
            FilterLists::bundled(),
        )
    }

    pub fn with_lists(&self, lists: FilterLists) -> Self {
        TextProcessor {
            lists,
            ..self.clone()
        }
    }

    /// Tokenized, tagged and lemmatized tokens.
    pub fn analyze(&self, text: &str) -> Vec<Token> {
        let mut tokens = tokenize(text);
        self.tagger.tag(&mut tokens);
        self.lemmatizer.lemmatize(&mut tokens);
        tokens
    }

    pub fn raw_terms(&self, text: &str) -> RawTerms {
        let tokens = self.analyze(text);
        let phrases = extract_noun_phrases(&tokens)
            .into_iter()
            .map(|span| tokens[span].iter().map(|t| t.lemma.clone()).collect())
            .collect();
        RawTerms {
            words: tokens.into_iter().map(|t| t.lemma).collect(),
            phrases,
        }
    }

    pub fn process_text(&self, text: &str) -> TermSets {
        filter_terms(&self.raw_terms(text), &self.lists)
    }

    pub fn process_paper(&self, record: &PaperRecord, mode: Mode) -> TermSets {
        let text = match mode {
            Mode::Full => record.full_text(),
            Mode::TitleOnly => record.title.clone(),
        };
        self.process_text(&text)
    }
}
