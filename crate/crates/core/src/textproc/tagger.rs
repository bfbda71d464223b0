use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::token::Token;
use crate::error::{Error, Result};

/// Coarse part-of-speech tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pos {
    Noun,
    Propn,
    Adj,
    Verb,
    Adv,
    Det,
    Adp,
    Num,
    Punct,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 10] = [
        Pos::Noun,
        Pos::Propn,
        Pos::Adj,
        Pos::Verb,
        Pos::Adv,
        Pos::Det,
        Pos::Adp,
        Pos::Num,
        Pos::Punct,
        Pos::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Propn => "PROPN",
            Pos::Adj => "ADJ",
            Pos::Verb => "VERB",
            Pos::Adv => "ADV",
            Pos::Det => "DET",
            Pos::Adp => "ADP",
            Pos::Num => "NUM",
            Pos::Punct => "PUNCT",
            Pos::Other => "OTHER",
        }
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Pos::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown tag {s:?}"))
    }
}

/// Assigns one tag to every token. Implement this to plug in an external
/// tagger or pre-tagged input.
pub trait Tagger: Send + Sync {
    fn tag(&self, tokens: &mut [Token]);
}

const SUFFIXES: &[(&str, Pos)] = &[
    ("tion", Pos::Noun),
    ("ment", Pos::Noun),
    ("ity", Pos::Noun),
    ("ness", Pos::Noun),
    ("ize", Pos::Verb),
    ("ify", Pos::Verb),
    ("ous", Pos::Adj),
    ("ive", Pos::Adj),
    ("al", Pos::Adj),
    ("ic", Pos::Adj),
    ("ly", Pos::Adv),
];

/// Lexicon lookup with a suffix-rule fallback.
#[derive(Debug, Clone, Default)]
pub struct LexiconTagger {
    lexicon: HashMap<String, Pos>,
}

const BUNDLED_LEXICON: &str = include_str!("../../data/tag_lexicon.tsv");

impl LexiconTagger {
    pub fn bundled() -> Self {
        Self::from_tsv(BUNDLED_LEXICON).expect("bundled tag lexicon parses")
    }

    /// Parses `surface<TAB>POS` lines; `#` starts a comment line.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lexicon = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |message: String| Error::Malformed { line: n + 1, message };
            let (surface, tag) = line
                .split_once('\t')
                .ok_or_else(|| malformed(format!("expected surface<TAB>POS, got {line:?}")))?;
            let pos = tag.trim().parse().map_err(malformed)?;
            lexicon.insert(surface.to_lowercase(), pos);
        }
        Ok(LexiconTagger { lexicon })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }

    pub fn insert(&mut self, surface: &str, pos: Pos) {
        self.lexicon.insert(surface.to_lowercase(), pos);
    }

    pub fn tag_word(&self, word: &str) -> Pos {
        if let Some(&pos) = self.lexicon.get(word) {
            return pos;
        }
        // A hyphenated compound takes the tag of its head.
        let head = word.rsplit('-').next().unwrap_or(word);
        if head != word {
            if let Some(&pos) = self.lexicon.get(head) {
                return pos;
            }
        }
        suffix_tag(head)
    }
}

pub fn suffix_tag(word: &str) -> Pos {
    if !word.chars().any(char::is_alphabetic) {
        return Pos::Num;
    }
    let len = word.chars().count();
    SUFFIXES
        .iter()
        .find(|(suffix, _)| word.ends_with(suffix) && len > suffix.len() + 1)
        .map(|&(_, pos)| pos)
        .unwrap_or(Pos::Noun)
}

impl Tagger for LexiconTagger {
    fn tag(&self, tokens: &mut [Token]) {
        for tok in tokens {
            tok.pos = self.tag_word(&tok.surface);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::tokenize;
    use proptest::prelude::*;

    #[test]
    fn suffix_rules() {
        let t = LexiconTagger::default();
        assert_eq!(t.tag_word("enzymatic"), Pos::Adj);
        assert_eq!(t.tag_word("42"), Pos::Num);
        assert_eq!(t.tag_word("amplification"), Pos::Noun);
        assert_eq!(t.tag_word("polymerize"), Pos::Verb);
        assert_eq!(t.tag_word("rapidly"), Pos::Adv);
        assert_eq!(t.tag_word("graphene"), Pos::Noun);
        // too short for the suffix to count
        assert_eq!(t.tag_word("ly"), Pos::Noun);
    }

    #[test]
    fn lexicon_overrides_suffix() {
        let t = LexiconTagger::bundled();
        assert_eq!(t.tag_word("novel"), Pos::Adj);
        assert_eq!(t.tag_word("the"), Pos::Det);
        assert_eq!(t.tag_word("in"), Pos::Adp);
        let mut custom = LexiconTagger::default();
        custom.insert("topic", Pos::Noun);
        assert_eq!(custom.tag_word("topic"), Pos::Noun);
    }

    #[test]
    fn hyphenated_takes_head_tag() {
        let t = LexiconTagger::bundled();
        assert_eq!(t.tag_word("well-known"), t.tag_word("known"));
        assert_eq!(t.tag_word("x-ray"), Pos::Noun);
    }

    #[test]
    fn bad_lexicon_line_reports_line() {
        let err = LexiconTagger::from_tsv("# c\nfoo\tNOUN\nbar\tWHAT\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 3, .. }));
    }

    proptest! {
        #[test]
        fn every_token_gets_a_tag(text in "[ -~]{0,200}") {
            let t = LexiconTagger::bundled();
            let mut toks = tokenize(&text);
            for tok in toks.iter_mut() {
                tok.pos = Pos::Punct;
            }
            t.tag(&mut toks);
            prop_assert!(toks.iter().all(|tok| tok.pos != Pos::Punct));
        }
    }
}
