use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../data/novelty_words.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StemMatch {
    Prefix,
    Exact,
}

/// Context rules that cancel a stem hit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Guard {
    /// Suppress when the next word is listed.
    FollowedBy { words: Vec<String> },
    /// Suppress when the previous word is listed.
    PrecededBy { words: Vec<String> },
    /// Count only when the next word is listed.
    RequiresFollowedBy { words: Vec<String> },
    /// Suppress a capitalized hit followed by a capitalized word, unless the
    /// whole segment is title case or upper case.
    CapitalizedBigram,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoveltyEntry {
    pub stem: String,
    #[serde(rename = "match")]
    pub match_kind: StemMatch,
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default)]
    pub guards: Vec<Guard>,
}

impl NoveltyEntry {
    fn matches(&self, lower: &str) -> bool {
        let hit = match self.match_kind {
            StemMatch::Exact => lower == self.stem,
            StemMatch::Prefix => lower.starts_with(&self.stem),
        };
        hit && !self.exclude.iter().any(|x| lower.starts_with(x.as_str()))
    }
}

/// Word list with guard rules for spotting self-declared novelty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoveltyLexicon {
    pub entries: Vec<NoveltyEntry>,
}

struct Word<'a> {
    raw: &'a str,
    lower: String,
}

fn words(text: &str) -> Vec<Word<'_>> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '\''))
        .map(|w| w.trim_matches(['-', '\'']))
        .filter(|w| !w.is_empty())
        .map(|raw| Word {
            raw,
            lower: raw.to_lowercase(),
        })
        .collect()
}

fn capitalized(w: &str) -> bool {
    w.chars().next().is_some_and(char::is_uppercase)
}

/// Title case or shouting: most longer words start with a capital.
fn caps_heavy(ws: &[Word<'_>]) -> bool {
    let long: Vec<&Word<'_>> = ws.iter().filter(|w| w.raw.chars().count() > 3).collect();
    if long.is_empty() {
        return ws.iter().all(|w| capitalized(w.raw));
    }
    let caps = long.iter().filter(|w| capitalized(w.raw)).count();
    caps * 5 >= long.len() * 3
}

impl NoveltyLexicon {
    pub fn bundled() -> &'static NoveltyLexicon {
        static LEX: OnceLock<NoveltyLexicon> = OnceLock::new();
        LEX.get_or_init(|| NoveltyLexicon::from_json(BUNDLED).expect("bundled novelty list parses"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut entries: Vec<NoveltyEntry> = serde_json::from_str(text)?;
        for e in entries.iter_mut() {
            e.stem = e.stem.to_lowercase();
        }
        Ok(NoveltyLexicon { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// True when the raw title or abstract contains an unguarded hit.
    pub fn detect(&self, title: &str, abstract_text: Option<&str>) -> bool {
        std::iter::once(title)
            .chain(abstract_text)
            .any(|segment| self.detect_segment(segment))
    }

    fn detect_segment(&self, text: &str) -> bool {
        let ws = words(text);
        let heavy = caps_heavy(&ws);
        (0..ws.len()).any(|i| {
            self.entries
                .iter()
                .any(|e| e.matches(&ws[i].lower) && !guarded(e, &ws, i, heavy))
        })
    }
}

fn guarded(entry: &NoveltyEntry, ws: &[Word<'_>], i: usize, caps_heavy: bool) -> bool {
    let next = ws.get(i + 1);
    let prev = i.checked_sub(1).map(|p| &ws[p]);
    let listed = |w: Option<&Word<'_>>, list: &[String]| w.is_some_and(|w| list.iter().any(|x| *x == w.lower));
    entry.guards.iter().any(|g| match g {
        Guard::FollowedBy { words } => listed(next, words),
        Guard::PrecededBy { words } => listed(prev, words),
        Guard::RequiresFollowedBy { words } => !listed(next, words),
        Guard::CapitalizedBigram => {
            !caps_heavy && capitalized(ws[i].raw) && next.is_some_and(|n| capitalized(n.raw))
        }
    })
}

/// Runs the bundled word list over unprocessed text.
pub fn detect_novelty_language(raw_title: &str, raw_abstract: Option<&str>) -> bool {
    NoveltyLexicon::bundled().detect(raw_title, raw_abstract)
}
