//! Rebuilding abstracts stored as word → positions maps.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Word to list of token positions. A `BTreeMap` keeps error reporting
/// deterministic when an index is corrupt.
pub type InvertedIndex = BTreeMap<String, Vec<usize>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstructed {
    pub text: String,
    /// Positions in `0..=max` that no word claimed. They are skipped.
    pub gaps: usize,
}

/// Lays the words of `index` out by position and joins them with spaces.
///
/// A position claimed by two words is a corrupt index. Missing positions
/// are skipped and counted in [`Reconstructed::gaps`].
pub fn reconstruct_abstract(index: &InvertedIndex) -> Result<Reconstructed> {
    let mut slots: Vec<(usize, &str)> = index
        .iter()
        .flat_map(|(word, positions)| positions.iter().map(move |&p| (p, word.as_str())))
        .collect();
    if slots.is_empty() {
        return Ok(Reconstructed {
            text: String::new(),
            gaps: 0,
        });
    }
    slots.sort_unstable();

    for pair in slots.windows(2) {
        if pair[0].0 == pair[1].0 {
            // A word listing the same position twice is also corrupt.
            return Err(Error::CorruptIndex {
                position: pair[0].0,
                first: pair[0].1.to_string(),
                second: pair[1].1.to_string(),
            });
        }
    }

    let max = slots.last().map(|s| s.0).unwrap_or(0);
    let gaps = max + 1 - slots.len();
    let text = slots
        .iter()
        .map(|(_, w)| *w)
        .collect::<Vec<_>>()
        .join(" ");
    Ok(Reconstructed { text, gaps })
}

/// Builds an index from whitespace-separated text. Used by tests and by
/// fixture generation.
pub fn invert(text: &str) -> InvertedIndex {
    let mut index: InvertedIndex = BTreeMap::new();
    for (pos, word) in text.split_whitespace().enumerate() {
        index.entry(word.to_string()).or_default().push(pos);
    }
    index
}
