use super::tagger::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Equals `surface` until the lemmatizer runs.
    pub lemma: String,
    pub pos: Pos,
    pub index: usize,
    /// Sentence number; chunks never span two sentences.
    pub sentence: usize,
}

fn is_hyphen(c: char) -> bool {
    matches!(c, '-' | '\u{2010}' | '\u{2011}')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

/// Lowercases and splits text into word tokens.
///
/// Internal hyphens keep a token together, leading and trailing hyphens are
/// stripped, and tokens without any letter or digit are dropped. A possessive
/// `'s` is removed; any other apostrophe separates tokens. Sentences end at
/// `; : ? !` and at a `.` followed by whitespace or the end of the text.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut sentence = 0;
    let mut current = String::new();
    let mut pending_break = false;

    let flush = |current: &mut String, tokens: &mut Vec<Token>, sentence: usize| {
        let trimmed = current.trim_matches('-');
        if trimmed.chars().any(char::is_alphanumeric) {
            tokens.push(Token {
                surface: trimmed.to_string(),
                lemma: trimmed.to_string(),
                pos: Pos::Other,
                index: tokens.len(),
                sentence,
            });
        }
        current.clear();
    };

    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            if pending_break {
                if !tokens.is_empty() || !current.is_empty() {
                    sentence += 1;
                }
                pending_break = false;
            }
            current.extend(c.to_lowercase());
        } else if is_hyphen(c) {
            current.push('-');
        } else if is_apostrophe(c) {
            let possessive = matches!(chars.get(i + 1), Some('s' | 'S'))
                && !chars.get(i + 2).is_some_and(|n| n.is_alphanumeric());
            flush(&mut current, &mut tokens, sentence);
            if possessive {
                i += 1;
            }
        } else {
            flush(&mut current, &mut tokens, sentence);
            let ends_sentence = match c {
                ';' | ':' | '?' | '!' => true,
                '.' => chars.get(i + 1).is_none_or(|n| n.is_whitespace()),
                _ => false,
            };
            pending_break |= ends_sentence;
        }
        i += 1;
    }
    flush(&mut current, &mut tokens, sentence);
    tokens
}
