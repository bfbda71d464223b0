//! Embedding distance to the most similar recent paper.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::OrderKey;
use crate::error::{Error, Result};

/// Why vectors were dropped while loading.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadTally {
    pub loaded: u64,
    pub non_finite: u64,
    pub zero_norm: u64,
    pub not_in_corpus: u64,
    pub duplicate: u64,
}

/// Fixed-dimension vectors keyed by paper id, with precomputed norms.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    dimension: usize,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    norms: Vec<f64>,
    pub tally: LoadTally,
}

impl EmbeddingStore {
    pub fn new(dimension: usize) -> Self {
        EmbeddingStore {
            dimension,
            ..EmbeddingStore::default()
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn vector(&self, id: &str) -> Option<&[f64]> {
        self.index.get(id).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Adds one vector. Non-finite and zero vectors are skipped and tallied;
    /// a wrong length is an error.
    pub fn insert(&mut self, id: &str, v: &[f64], location: &str) -> Result<bool> {
        if v.len() != self.dimension {
            return Err(Error::Dimension {
                location: location.to_string(),
                expected: self.dimension,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            self.tally.non_finite += 1;
            return Ok(false);
        }
        let norm = norm(v);
        if norm == 0.0 || !norm.is_finite() {
            self.tally.zero_norm += 1;
            return Ok(false);
        }
        if self.index.contains_key(id) {
            self.tally.duplicate += 1;
            return Ok(false);
        }
        self.index.insert(id.to_string(), self.norms.len());
        self.data.extend_from_slice(v);
        self.norms.push(norm);
        self.tally.loaded += 1;
        Ok(true)
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (&i, &j) = (self.index.get(a)?, self.index.get(b)?);
        Some(cosine_with_norms(self.row(i), self.row(j), self.norms[i], self.norms[j]))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cosine_with_norms(a: &[f64], b: &[f64], na: f64, nb: f64) -> f64 {
    dot(a, b) / (na * nb)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    cosine_with_norms(a, b, norm(a), norm(b))
}

/// Loads vectors from `path`. Files ending in `.f32` or `.bin` are raw
/// little-endian f32 records described by a sidecar (`<path>.ids`: a
/// `# dim=<d>` line then one id per line); anything else is TSV with a
/// `# dim=<d>` header and `id<TAB>v1,...,vd` lines.
///
/// With `corpus` given, ids outside it are skipped and tallied.
pub fn load_embeddings(path: &Path, corpus: Option<&HashSet<String>>) -> Result<EmbeddingStore> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("f32") | Some("bin") => load_binary(path, corpus),
        _ => load_tsv(path, corpus),
    }
}

fn parse_dim(line: &str, line_no: usize) -> Result<usize> {
    line.trim()
        .strip_prefix("# dim=")
        .and_then(|d| d.trim().parse().ok())
        .filter(|&d: &usize| d > 0)
        .ok_or_else(|| Error::Malformed {
            line: line_no,
            message: format!("expected `# dim=<d>` header, got {line:?}"),
        })
}

fn load_tsv(path: &Path, corpus: Option<&HashSet<String>>) -> Result<EmbeddingStore> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => {
            return Err(Error::Malformed {
                line: 1,
                message: "missing `# dim=<d>` header".into(),
            })
        }
    };
    let mut store = EmbeddingStore::new(parse_dim(&header, 1)?);
    let mut values = Vec::with_capacity(store.dimension);
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, vec) = line.split_once('\t').ok_or_else(|| Error::Malformed {
            line: line_no,
            message: "expected id<TAB>values".into(),
        })?;
        if corpus.is_some_and(|c| !c.contains(id)) {
            store.tally.not_in_corpus += 1;
            continue;
        }
        values.clear();
        for v in vec.split(',') {
            let x: f64 = v.trim().parse().map_err(|_| Error::Malformed {
                line: line_no,
                message: format!("not a number: {v:?}"),
            })?;
            values.push(x);
        }
        store.insert(id, &values, &format!("{}:{line_no}", path.display()))?;
    }
    Ok(store)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".ids");
    PathBuf::from(s)
}

fn load_binary(path: &Path, corpus: Option<&HashSet<String>>) -> Result<EmbeddingStore> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let mut lines = text.lines();
    let dim = parse_dim(lines.next().unwrap_or(""), 1)?;
    let ids: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let record = dim * 4;
    if bytes.len() != ids.len() * record {
        return Err(Error::Dimension {
            location: path.display().to_string(),
            expected: ids.len() * record,
            found: bytes.len(),
        });
    }
    let mut store = EmbeddingStore::new(dim);
    let mut values = vec![0.0; dim];
    for (i, id) in ids.iter().enumerate() {
        if corpus.is_some_and(|c| !c.contains(*id)) {
            store.tally.not_in_corpus += 1;
            continue;
        }
        let rec = &bytes[i * record..(i + 1) * record];
        for (k, v) in values.iter_mut().enumerate() {
            *v = f32::from_le_bytes(rec[k * 4..k * 4 + 4].try_into().unwrap()) as f64;
        }
        store.insert(id, &values, &format!("{} record {i}", path.display()))?;
    }
    Ok(store)
}

/// Writes vectors in the TSV format read by [`load_embeddings`].
pub fn write_tsv(path: &Path, dim: usize, rows: &[(String, Vec<f64>)]) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let io = |e| Error::io(path, e);
    writeln!(out, "# dim={dim}").map_err(io)?;
    for (id, v) in rows {
        let vals: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{id}\t{}", vals.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Writes vectors as raw f32 records plus the id sidecar.
pub fn write_f32(path: &Path, dim: usize, rows: &[(String, Vec<f64>)]) -> Result<()> {
    let mut bytes = Vec::with_capacity(rows.len() * dim * 4);
    let mut ids = format!("# dim={dim}\n");
    for (id, v) in rows {
        for &x in v {
            bytes.extend_from_slice(&(x as f32).to_le_bytes());
        }
        ids.push_str(id);
        ids.push('\n');
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    fs::write(&side, ids).map_err(|e| Error::io(&side, e))
}

/// How far back candidates may lie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Dated no earlier than this many days before the focal paper.
    Days(i64),
    /// From January 1 of `years` years before the focal year.
    CalendarYears(i32),
}

impl Default for Window {
    fn default() -> Self {
        Window::Days(1826)
    }
}

impl Window {
    /// Earliest admissible candidate date.
    pub fn start(self, focal: NaiveDate) -> NaiveDate {
        match self {
            Window::Days(d) => focal - Duration::days(d),
            Window::CalendarYears(y) => NaiveDate::from_ymd_opt(focal.year() - y, 1, 1).unwrap_or(NaiveDate::MIN),
        }
    }
}

/// `1 - max cosine` against candidates, clamped to `[0, 2]`; `None` when
/// there is no candidate.
pub fn distance_from<'a, I>(focal: &[f64], focal_norm: f64, candidates: I) -> Option<f64>
where
    I: IntoIterator<Item = (&'a [f64], f64)>,
{
    let mut best: Option<f64> = None;
    for (v, n) in candidates {
        let c = cosine_with_norms(focal, v, focal_norm, n);
        best = Some(best.map_or(c, |b: f64| b.max(c)));
    }
    best.map(|c| (1.0 - c).clamp(0.0, 2.0))
}

/// Papers sorted by order key, linked to their vectors.
pub struct SemanticIndex<'a> {
    keys: Vec<OrderKey>,
    rows: Vec<Option<usize>>,
    store: &'a EmbeddingStore,
}

impl<'a> SemanticIndex<'a> {
    pub fn new(mut keys: Vec<OrderKey>, store: &'a EmbeddingStore) -> Self {
        keys.sort();
        let rows = keys.iter().map(|k| store.index.get(&k.id).copied()).collect();
        SemanticIndex { keys, rows, store }
    }

    pub fn keys(&self) -> &[OrderKey] {
        &self.keys
    }

    /// Distance for the paper at `pos` in order-key order.
    pub fn distance_at(&self, pos: usize, window: Window) -> Option<f64> {
        let focal = self.rows[pos]?;
        let start = window.start(self.keys[pos].date);
        let lo = self.keys[..pos].partition_point(|k| k.date < start);
        let store = self.store;
        distance_from(
            store.row(focal),
            store.norms[focal],
            self.rows[lo..pos]
                .iter()
                .flatten()
                .map(|&r| (store.row(r), store.norms[r])),
        )
    }

    pub fn distance(&self, key: &OrderKey, window: Window) -> Option<f64> {
        let pos = self.keys.binary_search(key).ok()?;
        self.distance_at(pos, window)
    }

    /// Distances for every paper, in order-key order.
    pub fn all(&self, window: Window) -> Vec<Option<f64>> {
        (0..self.keys.len())
            .into_par_iter()
            .map(|i| self.distance_at(i, window))
            .collect()
    }
}

/// Distance for one paper against a corpus index.
pub fn semantic_distance(paper: &OrderKey, store: &EmbeddingStore, index: &SemanticIndex<'_>, window: Window) -> Option<f64> {
    debug_assert!(std::ptr::eq(store, index.store));
    index.distance(paper, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(id: &str, date: NaiveDate) -> OrderKey {
        OrderKey { date, id: id.into() }
    }

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn identical_and_orthogonal() {
        let mut s = EmbeddingStore::new(2);
        s.insert("a", &[1.0, 0.0], "t").unwrap();
        s.insert("b", &[2.0, 0.0], "t").unwrap();
        s.insert("c", &[0.0, 3.0], "t").unwrap();
        let idx = SemanticIndex::new(
            vec![key("a", d(2000, 1, 1)), key("b", d(2001, 1, 1)), key("c", d(2002, 1, 1))],
            &s,
        );
        let all = idx.all(Window::default());
        assert_eq!(all, [None, Some(0.0), Some(1.0)]);
    }

    #[test]
    fn window_edges() {
        let mut s = EmbeddingStore::new(2);
        s.insert("old", &[1.0, 0.0], "t").unwrap();
        s.insert("edge", &[1.0, 0.0], "t").unwrap();
        s.insert("f", &[1.0, 0.0], "t").unwrap();
        let focal = d(2010, 6, 1);
        let keys = vec![
            key("old", focal - Duration::days(1827)),
            key("f", focal),
        ];
        let idx = SemanticIndex::new(keys, &s);
        assert_eq!(idx.distance(&key("f", focal), Window::default()), None);
        let keys = vec![key("edge", focal - Duration::days(1826)), key("f", focal)];
        let idx = SemanticIndex::new(keys, &s);
        assert_eq!(idx.distance(&key("f", focal), Window::default()), Some(0.0));
    }

    #[test]
    fn same_day_earlier_id_counts() {
        let mut s = EmbeddingStore::new(2);
        s.insert("A", &[1.0, 1.0], "t").unwrap();
        s.insert("B", &[1.0, 1.0], "t").unwrap();
        let day = d(2000, 1, 1);
        let idx = SemanticIndex::new(vec![key("B", day), key("A", day)], &s);
        assert!(idx.distance(&key("B", day), Window::default()).unwrap() < 1e-12);
        assert_eq!(idx.distance(&key("A", day), Window::default()), None);
    }

    #[test]
    fn calendar_window() {
        let mut s = EmbeddingStore::new(1);
        s.insert("a", &[1.0], "t").unwrap();
        s.insert("b", &[1.0], "t").unwrap();
        let idx = SemanticIndex::new(vec![key("a", d(2005, 1, 1)), key("b", d(2010, 12, 31))], &s);
        let k = key("b", d(2010, 12, 31));
        assert_eq!(idx.distance(&k, Window::CalendarYears(5)), Some(0.0));
        assert_eq!(idx.distance(&k, Window::Days(1826)), None);
    }

    #[test]
    fn tsv_load_and_rejects() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.tsv");
        fs::write(&p, "# dim=4\na\t1,0,0,0\nb\t0,1,0,0\nc\t0,0,1,0\nn\tNaN,0,0,0\nz\t0,0,0,0\n").unwrap();
        let s = load_embeddings(&p, None).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.tally.non_finite, 1);
        assert_eq!(s.tally.zero_norm, 1);

        fs::write(&p, "# dim=768\n").unwrap();
        let s = load_embeddings(&p, None).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.dimension(), 768);

        fs::write(&p, "# dim=3\na\t1,2\n").unwrap();
        assert!(matches!(load_embeddings(&p, None), Err(Error::Dimension { .. })));
    }

    #[test]
    fn binary_matches_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![("a".to_string(), vec![0.5, 1.0]), ("b".to_string(), vec![1.0, -0.25])];
        let pb = dir.path().join("v.f32");
        let pt = dir.path().join("v.tsv");
        write_f32(&pb, 2, &rows).unwrap();
        write_tsv(&pt, 2, &rows).unwrap();
        let corpus: HashSet<String> = ["a".to_string()].into();
        let b = load_embeddings(&pb, Some(&corpus)).unwrap();
        let t = load_embeddings(&pt, Some(&corpus)).unwrap();
        assert_eq!(b.vector("a"), t.vector("a"));
        assert_eq!(b.tally.not_in_corpus, 1);
    }

    #[test]
    fn scale_invariance() {
        let a = [0.3, -1.2, 4.0];
        let b = [1.0, 2.0, -0.5];
        let b2: Vec<f64> = b.iter().map(|x| x * 8.0).collect();
        assert!((cosine(&a, &b) - cosine(&a, &b2)).abs() < 1e-15);
    }
}
