//! Title and abstract processing: tokens, tags, noun phrases, lemmas,
//! stop/removal filtering and the per-paper term sets.

mod chunk;
mod filters;
mod lemma;
mod novelty_lang;
mod tagger;
mod terms;
mod token;

pub use chunk::extract_noun_phrases;
pub use filters::{
    bundled_natural_stopwords, expand_filter_lists, parse_word_list, read_word_list,
    write_word_list, FilterLists, VocabThreshold, WordClass,
};
pub use lemma::Lemmatizer;
pub use novelty_lang::{detect_novelty_language, Guard, NoveltyEntry, NoveltyLexicon, StemMatch};
pub use tagger::{suffix_tag, LexiconTagger, Pos, Tagger};
pub use terms::{acronym_of, filter_phrase, filter_terms, Mode, RawTerms, TermSets, TextProcessor};
pub use token::{tokenize, Token};

pub fn pos_tag(tokens: &mut [Token], tagger: &dyn Tagger) {
    tagger.tag(tokens);
}

pub fn lemmatize(tokens: &mut [Token], lemmatizer: &Lemmatizer) {
    lemmatizer.lemmatize(tokens);
}
