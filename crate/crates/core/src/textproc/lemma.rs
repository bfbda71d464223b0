use std::collections::HashMap;
use std::path::Path;

use super::tagger::Pos;
use super::token::Token;
use crate::error::{Error, Result};

const BUNDLED_LEXICON: &str = include_str!("../../data/lemma_lexicon.tsv");

/// Lexicon-first lemmatizer with plural and inflection rules as fallback.
#[derive(Debug, Clone, Default)]
pub struct Lemmatizer {
    by_pos: HashMap<(String, Pos), String>,
    any_pos: HashMap<String, String>,
}

impl Lemmatizer {
    pub fn bundled() -> Self {
        Self::from_tsv(BUNDLED_LEXICON).expect("bundled lemma lexicon parses")
    }

    /// Parses `surface<TAB>POS<TAB>lemma` lines. A POS of `*` applies to
    /// every tag.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lem = Lemmatizer::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |message: String| Error::Malformed { line: n + 1, message };
            let cols: Vec<&str> = line.split('\t').collect();
            let [surface, tag, lemma] = cols[..] else {
                return Err(malformed(format!("expected 3 columns, got {}", cols.len())));
            };
            let surface = surface.to_lowercase();
            let lemma = lemma.to_lowercase();
            if tag == "*" {
                lem.any_pos.insert(surface, lemma);
            } else {
                let pos = tag.parse().map_err(malformed)?;
                lem.by_pos.insert((surface, pos), lemma);
            }
        }
        Ok(lem)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }

    /// Lemma of one surface form. Hyphenated forms are lemmatized part by
    /// part and rejoined.
    pub fn lemma(&self, surface: &str, pos: Pos) -> String {
        if let Some(l) = self.lookup(surface, pos) {
            return l.to_string();
        }
        if surface.contains('-') {
            return surface
                .split('-')
                .map(|part| self.lemma_simple(part, pos))
                .collect::<Vec<_>>()
                .join("-");
        }
        self.lemma_simple(surface, pos)
    }

    fn lookup(&self, surface: &str, pos: Pos) -> Option<&str> {
        self.by_pos
            .get(&(surface.to_string(), pos))
            .or_else(|| self.any_pos.get(surface))
            .map(String::as_str)
    }

    fn lemma_simple(&self, word: &str, pos: Pos) -> String {
        if word.is_empty() {
            return String::new();
        }
        if let Some(l) = self.lookup(word, pos) {
            return l.to_string();
        }
        match pos {
            Pos::Noun | Pos::Propn => singular(word),
            Pos::Verb => verb_base(word),
            _ => word.to_string(),
        }
    }

    pub fn lemmatize(&self, tokens: &mut [Token]) {
        for tok in tokens {
            tok.lemma = self.lemma(&tok.surface, tok.pos);
        }
    }
}

fn singular(w: &str) -> String {
    let keep = w.len() <= 3
        || !w.ends_with('s')
        || ["ss", "us", "is", "ous", "ics"].iter().any(|s| w.ends_with(s));
    if keep || !w.is_ascii() {
        return w.to_string();
    }
    if w.len() > 4 && w.ends_with("ies") {
        return format!("{}y", &w[..w.len() - 3]);
    }
    if ["sses", "xes", "ches", "shes", "zzes"].iter().any(|s| w.ends_with(s)) {
        return w[..w.len() - 2].to_string();
    }
    w[..w.len() - 1].to_string()
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

const E_RESTORING: &[&str] = &[
    "at", "iz", "yz", "is", "uc", "ac", "ic", "iv", "ev", "ov", "av", "rv", "ur", "ir", "ang",
    "arg", "erg", "dg", "bl", "pl", "gl", "tl", "cl", "rc", "ut", "ot", "ud", "id", "ol",
];

fn verb_base(w: &str) -> String {
    if !w.is_ascii() {
        return w.to_string();
    }
    let stem = if let Some(s) = w.strip_suffix("ing").filter(|s| s.len() >= 3) {
        s
    } else if let Some(s) = w.strip_suffix("ied").filter(|s| s.len() >= 2) {
        return format!("{s}y");
    } else if let Some(s) = w.strip_suffix("ed").filter(|s| s.len() >= 2) {
        s
    } else if let Some(s) = w.strip_suffix("es").filter(|s| {
        ["ss", "x", "ch", "sh", "zz"].iter().any(|e| s.ends_with(e))
    }) {
        return s.to_string();
    } else {
        return singular(w);
    };
    if !stem.bytes().any(is_vowel) {
        return w.to_string();
    }
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z' | b'f') {
        return stem[..n - 1].to_string();
    }
    if n <= 2 || E_RESTORING.iter().any(|e| stem.ends_with(e)) {
        return format!("{stem}e");
    }
    stem.to_string()
}
