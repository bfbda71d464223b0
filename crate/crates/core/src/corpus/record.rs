use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::inverted::{reconstruct_abstract, InvertedIndex};
use crate::error::{Error, Result};

/// One publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperRecord {
    pub paper_id: String,
    pub pub_date: NaiveDate,
    pub title: String,
    pub abstract_text: Option<String>,
    pub venue_id: String,
    pub subfield_id: Option<i64>,
    pub field_id: Option<i64>,
    pub references: Vec<String>,
    pub has_abstract: bool,
    pub flags: RecordFlags,
}

/// Upstream exclusion flags carried through ingestion untouched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordFlags {
    pub no_authors: bool,
    pub venue_no_publisher: bool,
}

impl PaperRecord {
    /// Builds a record, normalizing the abstract so that `has_abstract`
    /// holds exactly when a non-blank abstract is present.
    pub fn new(
        paper_id: impl Into<String>,
        pub_date: NaiveDate,
        title: impl Into<String>,
        abstract_text: Option<String>,
    ) -> Self {
        let mut rec = PaperRecord {
            paper_id: paper_id.into(),
            pub_date,
            title: title.into(),
            abstract_text: None,
            venue_id: String::new(),
            subfield_id: None,
            field_id: None,
            references: Vec::new(),
            has_abstract: false,
            flags: RecordFlags::default(),
        };
        rec.set_abstract(abstract_text);
        rec
    }

    pub fn with_venue(mut self, venue: impl Into<String>) -> Self {
        self.venue_id = venue.into();
        self
    }

    pub fn with_fields(mut self, subfield: Option<i64>, field: Option<i64>) -> Self {
        self.subfield_id = subfield;
        self.field_id = field;
        self
    }

    pub fn with_references<I, S>(mut self, refs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.references = refs.into_iter().map(Into::into).collect();
        self
    }

    pub fn set_abstract(&mut self, text: Option<String>) {
        self.abstract_text = text.filter(|t| !t.trim().is_empty());
        self.has_abstract = self.abstract_text.is_some();
    }

    pub fn clear_abstract(&mut self) {
        self.set_abstract(None);
    }

    pub fn year(&self) -> i32 {
        self.pub_date.year()
    }

    pub fn order_key(&self) -> OrderKey {
        order_key(self)
    }

    /// Title and abstract joined with a sentence break.
    pub fn full_text(&self) -> String {
        match &self.abstract_text {
            Some(a) => format!("{}. {}", self.title, a),
            None => self.title.clone(),
        }
    }

    /// Parses one JSONL line in the corpus input schema.
    pub fn from_json_line(line: &str) -> Result<(Self, usize)> {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| Error::Malformed {
            line: 0,
            message: e.to_string(),
        })?;
        raw.into_record()
    }

    /// Serializes back to the input schema (plain `abstract`, no index).
    pub fn to_json_line(&self) -> String {
        let raw = RawRecord {
            id: self.paper_id.clone(),
            date: self.pub_date.format("%Y-%m-%d").to_string(),
            title: self.title.clone(),
            abstract_inverted_index: None,
            abstract_text: self.abstract_text.clone(),
            venue: self.venue_id.clone(),
            subfield: self.subfield_id,
            field: self.field_id,
            references: self.references.clone(),
            no_authors: self.flags.no_authors,
            venue_no_publisher: self.flags.venue_no_publisher,
        };
        serde_json::to_string(&raw).expect("record serializes")
    }
}

/// Total order used by every chronological pass: date, then id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderKey {
    pub date: NaiveDate,
    pub id: String,
}

impl fmt::Display for OrderKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.date, self.id)
    }
}

pub fn order_key(record: &PaperRecord) -> OrderKey {
    OrderKey {
        date: record.pub_date,
        id: record.paper_id.clone(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    id: String,
    date: String,
    #[serde(default)]
    title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    abstract_inverted_index: Option<Map<String, Value>>,
    #[serde(default, rename = "abstract", skip_serializing_if = "Option::is_none")]
    abstract_text: Option<String>,
    #[serde(default)]
    venue: String,
    #[serde(default)]
    subfield: Option<i64>,
    #[serde(default)]
    field: Option<i64>,
    #[serde(default)]
    references: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    no_authors: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    venue_no_publisher: bool,
}

impl RawRecord {
    /// Returns the record and the number of position gaps found while
    /// rebuilding an inverted-index abstract.
    fn into_record(self) -> Result<(PaperRecord, usize)> {
        let malformed = |message: String| Error::Malformed { line: 0, message };
        if self.id.trim().is_empty() {
            return Err(malformed("empty id".into()));
        }
        let pub_date = NaiveDate::parse_from_str(&self.date, "%Y-%m-%d")
            .map_err(|e| malformed(format!("bad date {:?}: {e}", self.date)))?;

        let mut gaps = 0;
        let abstract_text = match (self.abstract_text, self.abstract_inverted_index) {
            (Some(text), _) => Some(text),
            (None, Some(index)) => {
                let index = parse_index(&index).map_err(malformed)?;
                let rebuilt = reconstruct_abstract(&index)?;
                gaps = rebuilt.gaps;
                Some(rebuilt.text)
            }
            (None, None) => None,
        };

        let mut rec = PaperRecord::new(self.id, pub_date, self.title, abstract_text)
            .with_venue(self.venue)
            .with_fields(self.subfield, self.field)
            .with_references(self.references);
        rec.flags = RecordFlags {
            no_authors: self.no_authors,
            venue_no_publisher: self.venue_no_publisher,
        };
        Ok((rec, gaps))
    }
}

fn parse_index(map: &Map<String, Value>) -> std::result::Result<InvertedIndex, String> {
    let mut index = BTreeMap::new();
    for (word, positions) in map {
        let arr = positions
            .as_array()
            .ok_or_else(|| format!("positions of {word:?} are not an array"))?;
        let mut list = Vec::with_capacity(arr.len());
        for p in arr {
            let p = p
                .as_u64()
                .ok_or_else(|| format!("position {p} of {word:?} is not a non-negative integer"))?;
            list.push(p as usize);
        }
        index.insert(word.clone(), list);
    }
    Ok(index)
}
