use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::record::PaperRecord;

pub const MALFORMED_LINE: &str = "malformed_line";
pub const EMPTY_TITLE: &str = "empty_title";
pub const NO_AUTHORS: &str = "no_authors";
pub const VENUE_WITHOUT_PUBLISHER: &str = "venue_without_publisher";
pub const DUPLICATE_ID: &str = "duplicate_id";
pub const DUPLICATE_TITLE: &str = "duplicate_title";
pub const DUPLICATE_ABSTRACT: &str = "duplicate_abstract";
pub const BIBLIOGRAPHIC_ABSTRACT: &str = "bibliographic_abstract";

/// Which cleaning rules run. Removals drop the record; demotions drop only
/// the abstract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningRules {
    pub empty_title: bool,
    pub no_authors: bool,
    pub venue_without_publisher: bool,
    pub duplicate_id: bool,
    pub duplicate_title: bool,
    pub duplicate_abstract: bool,
    pub bibliographic_abstract: bool,
    /// Share of citation-like tokens above which an abstract is demoted.
    pub bibliographic_threshold: f64,
}

impl Default for CleaningRules {
    fn default() -> Self {
        CleaningRules {
            empty_title: true,
            no_authors: true,
            venue_without_publisher: true,
            duplicate_id: true,
            duplicate_title: true,
            duplicate_abstract: true,
            bibliographic_abstract: true,
            bibliographic_threshold: 0.5,
        }
    }
}

impl CleaningRules {
    pub fn enabled(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        for (on, name) in [
            (self.empty_title, EMPTY_TITLE),
            (self.no_authors, NO_AUTHORS),
            (self.venue_without_publisher, VENUE_WITHOUT_PUBLISHER),
            (self.duplicate_id, DUPLICATE_ID),
            (self.duplicate_title, DUPLICATE_TITLE),
            (self.duplicate_abstract, DUPLICATE_ABSTRACT),
            (self.bibliographic_abstract, BIBLIOGRAPHIC_ABSTRACT),
        ] {
            if on {
                names.push(name);
            }
        }
        names
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub record_count: usize,
    pub date_range: Option<(NaiveDate, NaiveDate)>,
    /// One entry per enabled rule plus `malformed_line`, zero when unused.
    pub exclusion_tallies: BTreeMap<String, u64>,
    /// Non-exclusion observations such as inverted-index gaps.
    pub warnings: BTreeMap<String, u64>,
}

impl CorpusManifest {
    pub fn tally(&self, rule: &str) -> u64 {
        self.exclusion_tallies.get(rule).copied().unwrap_or(0)
    }
}

fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Applies the cleaning rules and returns survivors sorted by order key.
///
/// Among records sharing an id or a title only the earliest (by order key)
/// survives. Every record whose abstract is shared with another survivor
/// keeps its title but loses the abstract.
pub fn clean_corpus<I>(records: I, rules: &CleaningRules) -> (Vec<PaperRecord>, CorpusManifest)
where
    I: IntoIterator<Item = PaperRecord>,
{
    let mut tallies: BTreeMap<String, u64> = rules
        .enabled()
        .into_iter()
        .map(|r| (r.to_string(), 0))
        .collect();
    tallies.insert(MALFORMED_LINE.to_string(), 0);
    let mut hit = |rule: &str| *tallies.get_mut(rule).expect("rule registered") += 1;

    let mut recs: Vec<PaperRecord> = records.into_iter().collect();
    recs.sort_by(|a, b| a.order_key().cmp(&b.order_key()));

    let mut seen_ids = HashSet::new();
    let mut seen_titles = HashSet::new();
    let mut kept = Vec::with_capacity(recs.len());
    for rec in recs {
        if rules.empty_title && rec.title.trim().is_empty() {
            hit(EMPTY_TITLE);
            continue;
        }
        if rules.no_authors && rec.flags.no_authors {
            hit(NO_AUTHORS);
            continue;
        }
        if rules.venue_without_publisher && rec.flags.venue_no_publisher {
            hit(VENUE_WITHOUT_PUBLISHER);
            continue;
        }
        if rules.duplicate_id && !seen_ids.insert(rec.paper_id.clone()) {
            hit(DUPLICATE_ID);
            continue;
        }
        if rules.duplicate_title && !seen_titles.insert(normalize(&rec.title)) {
            hit(DUPLICATE_TITLE);
            continue;
        }
        kept.push(rec);
    }

    if rules.duplicate_abstract {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for rec in &kept {
            if let Some(a) = &rec.abstract_text {
                *counts.entry(normalize(a)).or_default() += 1;
            }
        }
        for rec in kept.iter_mut() {
            let shared = rec
                .abstract_text
                .as_ref()
                .is_some_and(|a| counts[&normalize(a)] > 1);
            if shared {
                rec.clear_abstract();
                hit(DUPLICATE_ABSTRACT);
            }
        }
    }

    if rules.bibliographic_abstract {
        for rec in kept.iter_mut() {
            let biblio = rec
                .abstract_text
                .as_ref()
                .is_some_and(|a| bibliographic_share(a) > rules.bibliographic_threshold);
            if biblio {
                rec.clear_abstract();
                hit(BIBLIOGRAPHIC_ABSTRACT);
            }
        }
    }

    let date_range = match (kept.first(), kept.last()) {
        (Some(a), Some(b)) => Some((a.pub_date, b.pub_date)),
        _ => None,
    };
    let manifest = CorpusManifest {
        record_count: kept.len(),
        date_range,
        exclusion_tallies: tallies,
        warnings: BTreeMap::new(),
    };
    (kept, manifest)
}

/// Share of whitespace tokens that look like pieces of a reference list:
/// parenthesized or bare years, page ranges, volume(issue), initials,
/// `Surname,` and the usual abbreviations.
pub fn bibliographic_share(text: &str) -> f64 {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() {
        return 0.0;
    }
    let hits = tokens.iter().filter(|t| is_citation_token(t)).count();
    hits as f64 / tokens.len() as f64
}

fn is_citation_token(tok: &str) -> bool {
    let t = tok.trim_end_matches([',', ';', '.', ':']);
    let lower = tok.to_lowercase();
    if matches!(
        lower.trim_end_matches([',', ';', ':']),
        "pp." | "p." | "vol." | "no." | "ed." | "eds." | "et" | "al." | "&" | "in:"
    ) || lower.starts_with("doi:")
        || lower.starts_with("https://doi")
    {
        return true;
    }
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let is_year = |s: &str| {
        let s = s.trim_end_matches(|c: char| c.is_ascii_lowercase());
        s.len() == 4 && digits(s) && matches!(&s[..2], "15" | "16" | "17" | "18" | "19" | "20")
    };

    // (1999) or (1999a)
    if let Some(inner) = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
        if is_year(inner) {
            return true;
        }
    }
    if is_year(t) {
        return true;
    }
    // 123-145 or 123–145
    if let Some((a, b)) = t.split_once(['-', '–']) {
        if digits(a) && digits(b) {
            return true;
        }
    }
    // 12(3) or 12(3):45-67
    if let Some((vol, rest)) = t.split_once('(') {
        if digits(vol) && rest.split(')').next().is_some_and(digits) {
            return true;
        }
    }
    // J. or A.B. or J.-P.
    let letters: Vec<char> = tok.chars().collect();
    if tok.ends_with('.')
        && letters.len() <= 6
        && letters[0].is_uppercase()
        && letters.iter().filter(|c| c.is_alphabetic()).count() <= 3
    {
        return true;
    }
    // Surname,
    tok.ends_with(',')
        && letters[0].is_uppercase()
        && letters[..letters.len() - 1]
            .iter()
            .all(|c| c.is_alphabetic() || *c == '-' || *c == '\'')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, date: &str, title: &str, abs: Option<&str>) -> PaperRecord {
        PaperRecord::new(
            id,
            NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
            title,
            abs.map(String::from),
        )
    }

    #[test]
    fn duplicate_title_keeps_earliest() {
        let input = vec![
            rec("b", "1960-01-01", "Same Title", None),
            rec("a", "1950-01-01", "same   title", None),
        ];
        let (out, m) = clean_corpus(input, &CleaningRules::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].paper_id, "a");
        assert_eq!(m.tally(DUPLICATE_TITLE), 1);
    }

    #[test]
    fn empty_title_removed() {
        let (out, m) = clean_corpus(vec![rec("a", "1950-01-01", "  ", None)], &CleaningRules::default());
        assert!(out.is_empty());
        assert_eq!(m.tally(EMPTY_TITLE), 1);
        assert_eq!(m.date_range, None);
    }

    #[test]
    fn shared_abstract_demoted_title_kept() {
        let input = vec![
            rec("a", "1950-01-01", "First", Some("identical body text")),
            rec("b", "1951-01-01", "Second", Some("identical body text")),
            rec("c", "1952-01-01", "Third", Some("unique body")),
        ];
        let (out, m) = clean_corpus(input, &CleaningRules::default());
        assert_eq!(out.len(), 3);
        assert!(!out[0].has_abstract && !out[1].has_abstract);
        assert!(out[2].has_abstract);
        assert_eq!(m.tally(DUPLICATE_ABSTRACT), 2);
    }

    #[test]
    fn flags_remove_records() {
        let mut a = rec("a", "1950-01-01", "A", None);
        a.flags.no_authors = true;
        let mut b = rec("b", "1950-01-01", "B", None);
        b.flags.venue_no_publisher = true;
        let (out, m) = clean_corpus(vec![a, b], &CleaningRules::default());
        assert!(out.is_empty());
        assert_eq!(m.tally(NO_AUTHORS), 1);
        assert_eq!(m.tally(VENUE_WITHOUT_PUBLISHER), 1);
    }

    #[test]
    fn reference_list_abstract_demoted() {
        let refs = "Smith, J. (1999) Nature 12(3): 45-67. Jones, A.B. (2001) Science 3, 100-110.";
        assert!(bibliographic_share(refs) > 0.5, "{}", bibliographic_share(refs));
        let prose = "We measured the thermal conductivity of graphene sheets grown in 2004 and found a large anisotropy.";
        assert!(bibliographic_share(prose) < 0.2);
        let (out, m) = clean_corpus(
            vec![rec("a", "1950-01-01", "A", Some(refs))],
            &CleaningRules::default(),
        );
        assert!(!out[0].has_abstract);
        assert_eq!(m.tally(BIBLIOGRAPHIC_ABSTRACT), 1);
    }

    #[test]
    fn tally_keys_match_enabled_rules() {
        let rules = CleaningRules {
            bibliographic_abstract: false,
            ..CleaningRules::default()
        };
        let (_, m) = clean_corpus(Vec::new(), &rules);
        let mut expected: Vec<String> = rules.enabled().iter().map(|s| s.to_string()).collect();
        expected.push(MALFORMED_LINE.into());
        expected.sort();
        assert_eq!(m.exclusion_tallies.keys().cloned().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn cleaning_is_idempotent() {
        let input = vec![
            rec("a", "1950-01-01", "T", Some("x y z")),
            rec("b", "1950-01-01", "T", None),
            rec("c", "1951-01-01", "U", Some("x y z")),
            rec("d", "1952-01-01", "", None),
        ];
        let rules = CleaningRules::default();
        let (once, _) = clean_corpus(input, &rules);
        let (twice, m2) = clean_corpus(once.clone(), &rules);
        assert_eq!(once, twice);
        assert!(m2.exclusion_tallies.values().all(|&v| v == 0));
    }
}
