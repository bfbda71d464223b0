use std::ops::Range;

use super::tagger::Pos;
use super::token::Token;

/// Finds noun phrases as maximal `(ADJ|NOUN|PROPN)* (NOUN|PROPN)` spans
/// inside one sentence. Returned ranges index into `tokens`.
pub fn extract_noun_phrases(tokens: &[Token]) -> Vec<Range<usize>> {
    let in_phrase = |t: &Token| matches!(t.pos, Pos::Adj | Pos::Noun | Pos::Propn);
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !in_phrase(&tokens[i]) {
            i += 1;
            continue;
        }
        let start = i;
        let sentence = tokens[i].sentence;
        while i < tokens.len() && in_phrase(&tokens[i]) && tokens[i].sentence == sentence {
            i += 1;
        }
        let mut end = i;
        while end > start && !tokens[end - 1].pos.is_nominal() {
            end -= 1;
        }
        if end > start {
            spans.push(start..end);
        }
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::{tokenize, LexiconTagger, Tagger};

    fn phrases(text: &str) -> Vec<String> {
        let mut toks = tokenize(text);
        LexiconTagger::bundled().tag(&mut toks);
        extract_noun_phrases(&toks)
            .into_iter()
            .map(|r| {
                toks[r]
                    .iter()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    }

    #[test]
    fn mullis_title() {
        assert_eq!(
            phrases("Specific Enzymatic Amplification of DNA In Vitro: The Polymerase Chain Reaction"),
            [
                "specific enzymatic amplification",
                "dna",
                "vitro",
                "polymerase chain reaction"
            ]
        );
    }

    #[test]
    fn no_nouns_no_phrases() {
        let mut toks = tokenize("quickly ran away");
        for t in toks.iter_mut() {
            t.pos = Pos::Verb;
        }
        assert!(extract_noun_phrases(&toks).is_empty());
    }

    #[test]
    fn adjective_noun() {
        assert_eq!(phrases("giant magnetoresistance"), ["giant magnetoresistance"]);
    }

    #[test]
    fn trailing_adjectives_trimmed_and_sentences_respected() {
        let mut toks = tokenize("graphene electronic. nanotube");
        LexiconTagger::bundled().tag(&mut toks);
        assert_eq!(toks[1].pos, Pos::Adj);
        let spans = extract_noun_phrases(&toks);
        assert_eq!(spans, [0..1, 2..3]);
    }
}
