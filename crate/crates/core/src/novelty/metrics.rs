use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::engine::PaperNovelty;
use super::kind::TermKind;
use crate::error::{Error, Result};

/// New-term counts of one paper, indexed like [`TermKind::ALL`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExAnte {
    pub new: [u64; 4],
    pub word_count: u64,
    pub phrase_count: u64,
}

impl ExAnte {
    pub fn binary(&self, kind: TermKind) -> bool {
        self.new[kind.index()] > 0
    }
}

/// Reuse-weighted counts: the sum of `1 + u` over a paper's new terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExPost {
    pub reuse: [u64; 4],
}

pub fn compute_ex_ante(paper: &PaperNovelty) -> ExAnte {
    let mut new = [0u64; 4];
    for t in &paper.new_terms {
        new[t.kind.index()] += 1;
    }
    ExAnte {
        new,
        word_count: paper.word_count,
        phrase_count: paper.phrase_count,
    }
}

pub fn compute_ex_post(paper: &PaperNovelty) -> ExPost {
    let mut reuse = [0u64; 4];
    for t in &paper.new_terms {
        reuse[t.kind.index()] += 1 + t.reuse() as u64;
    }
    ExPost { reuse }
}

/// One output row per paper.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub paper_id: String,
    pub new_word: u64,
    pub new_phrase: u64,
    pub new_word_comb: u64,
    pub new_phrase_comb: u64,
    pub new_word_bin: bool,
    pub new_phrase_bin: bool,
    pub new_word_comb_bin: bool,
    pub new_phrase_comb_bin: bool,
    pub new_word_reuse: u64,
    pub new_phrase_reuse: u64,
    pub new_word_comb_reuse: u64,
    pub new_phrase_comb_reuse: u64,
    pub word_count: u64,
    pub phrase_count: u64,
    pub has_abstract: bool,
    pub n_refs: u64,
    pub n_ref_journals: u64,
    pub semantic_distance: Option<f64>,
    pub uzzi: Option<f64>,
    pub wang: Option<f64>,
    pub cd: Option<f64>,
}

pub const METRICS_COLUMNS: [&str; 25] = [
    "paper_id",
    "new_word",
    "new_phrase",
    "new_word_comb",
    "new_phrase_comb",
    "new_word_bin",
    "new_phrase_bin",
    "new_word_comb_bin",
    "new_phrase_comb_bin",
    "new_word_reuse",
    "new_phrase_reuse",
    "new_word_comb_reuse",
    "new_phrase_comb_reuse",
    "word_count",
    "phrase_count",
    "has_abstract",
    "n_refs",
    "n_ref_journals",
    "semantic_distance",
    "uzzi",
    "wang",
    "cd",
    "uzzi_missing",
    "wang_missing",
    "cd_missing",
];

fn b(v: bool) -> &'static str {
    if v {
        "1"
    } else {
        "0"
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsRow {
    /// Text metrics of one paper; citation and semantic fields stay absent.
    pub fn from_novelty(paper: &PaperNovelty, has_abstract: bool) -> Self {
        let ante = compute_ex_ante(paper);
        let post = compute_ex_post(paper);
        MetricsRow {
            paper_id: paper.paper_id.clone(),
            new_word: ante.new[0],
            new_phrase: ante.new[1],
            new_word_comb: ante.new[2],
            new_phrase_comb: ante.new[3],
            new_word_bin: ante.new[0] > 0,
            new_phrase_bin: ante.new[1] > 0,
            new_word_comb_bin: ante.new[2] > 0,
            new_phrase_comb_bin: ante.new[3] > 0,
            new_word_reuse: post.reuse[0],
            new_phrase_reuse: post.reuse[1],
            new_word_comb_reuse: post.reuse[2],
            new_phrase_comb_reuse: post.reuse[3],
            word_count: ante.word_count,
            phrase_count: ante.phrase_count,
            has_abstract,
            ..MetricsRow::default()
        }
    }

    pub fn new_counts(&self) -> [u64; 4] {
        [self.new_word, self.new_phrase, self.new_word_comb, self.new_phrase_comb]
    }

    pub fn reuse_counts(&self) -> [u64; 4] {
        [
            self.new_word_reuse,
            self.new_phrase_reuse,
            self.new_word_comb_reuse,
            self.new_phrase_comb_reuse,
        ]
    }

    /// Numeric value of a column by name. Flags read as 0/1, absent as `None`.
    pub fn value(&self, column: &str) -> Result<Option<f64>> {
        let n = |v: u64| Some(v as f64);
        let f = |v: bool| Some(v as u8 as f64);
        Ok(match column {
            "new_word" => n(self.new_word),
            "new_phrase" => n(self.new_phrase),
            "new_word_comb" => n(self.new_word_comb),
            "new_phrase_comb" => n(self.new_phrase_comb),
            "new_word_bin" => f(self.new_word_bin),
            "new_phrase_bin" => f(self.new_phrase_bin),
            "new_word_comb_bin" => f(self.new_word_comb_bin),
            "new_phrase_comb_bin" => f(self.new_phrase_comb_bin),
            "new_word_reuse" => n(self.new_word_reuse),
            "new_phrase_reuse" => n(self.new_phrase_reuse),
            "new_word_comb_reuse" => n(self.new_word_comb_reuse),
            "new_phrase_comb_reuse" => n(self.new_phrase_comb_reuse),
            "word_count" => n(self.word_count),
            "phrase_count" => n(self.phrase_count),
            "has_abstract" => f(self.has_abstract),
            "n_refs" => n(self.n_refs),
            "n_ref_journals" => n(self.n_ref_journals),
            "semantic_distance" => self.semantic_distance,
            "uzzi" => self.uzzi,
            "wang" => self.wang,
            "cd" => self.cd,
            "uzzi_missing" => f(self.uzzi.is_none()),
            "wang_missing" => f(self.wang.is_none()),
            "cd_missing" => f(self.cd.is_none()),
            other => return Err(Error::UnknownColumn(other.to_string())),
        })
    }

    pub fn to_tsv_line(&self) -> String {
        let r = self;
        [
            r.paper_id.clone(),
            r.new_word.to_string(),
            r.new_phrase.to_string(),
            r.new_word_comb.to_string(),
            r.new_phrase_comb.to_string(),
            b(r.new_word_bin).into(),
            b(r.new_phrase_bin).into(),
            b(r.new_word_comb_bin).into(),
            b(r.new_phrase_comb_bin).into(),
            r.new_word_reuse.to_string(),
            r.new_phrase_reuse.to_string(),
            r.new_word_comb_reuse.to_string(),
            r.new_phrase_comb_reuse.to_string(),
            r.word_count.to_string(),
            r.phrase_count.to_string(),
            b(r.has_abstract).into(),
            r.n_refs.to_string(),
            r.n_ref_journals.to_string(),
            opt(r.semantic_distance),
            opt(r.uzzi),
            opt(r.wang),
            opt(r.cd),
            b(r.uzzi.is_none()).into(),
            b(r.wang.is_none()).into(),
            b(r.cd.is_none()).into(),
        ]
        .join("\t")
    }

    pub fn from_tsv_line(line: &str, line_no: usize) -> Result<Self> {
        let malformed = |message: String| Error::Malformed { line: line_no, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != METRICS_COLUMNS.len() {
            return Err(malformed(format!(
                "expected {} columns, found {}",
                METRICS_COLUMNS.len(),
                cols.len()
            )));
        }
        let u = |i: usize| -> Result<u64> {
            cols[i]
                .parse()
                .map_err(|_| malformed(format!("{}: not a count: {:?}", METRICS_COLUMNS[i], cols[i])))
        };
        let flag = |i: usize| -> Result<bool> {
            match cols[i] {
                "0" => Ok(false),
                "1" => Ok(true),
                v => Err(malformed(format!("{}: not a 0/1 flag: {v:?}", METRICS_COLUMNS[i]))),
            }
        };
        let real = |i: usize| -> Result<Option<f64>> {
            if cols[i].is_empty() {
                return Ok(None);
            }
            cols[i]
                .parse()
                .map(Some)
                .map_err(|_| malformed(format!("{}: not a number: {:?}", METRICS_COLUMNS[i], cols[i])))
        };
        Ok(MetricsRow {
            paper_id: cols[0].to_string(),
            new_word: u(1)?,
            new_phrase: u(2)?,
            new_word_comb: u(3)?,
            new_phrase_comb: u(4)?,
            new_word_bin: flag(5)?,
            new_phrase_bin: flag(6)?,
            new_word_comb_bin: flag(7)?,
            new_phrase_comb_bin: flag(8)?,
            new_word_reuse: u(9)?,
            new_phrase_reuse: u(10)?,
            new_word_comb_reuse: u(11)?,
            new_phrase_comb_reuse: u(12)?,
            word_count: u(13)?,
            phrase_count: u(14)?,
            has_abstract: flag(15)?,
            n_refs: u(16)?,
            n_ref_journals: u(17)?,
            semantic_distance: real(18)?,
            uzzi: real(19)?,
            wang: real(20)?,
            cd: real(21)?,
        })
    }
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", METRICS_COLUMNS.join("\t")).map_err(io)?;
    for r in rows {
        writeln!(out, "{}", r.to_tsv_line()).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if n == 0 || line.is_empty() {
            continue;
        }
        rows.push(MetricsRow::from_tsv_line(&line, n + 1)?);
    }
    Ok(rows)
}

/// One credited term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermStats {
    pub kind: TermKind,
    pub term: String,
    pub occ: u32,
    pub pioneer_id: String,
    pub first_date: NaiveDate,
    pub reuse: u32,
}

pub const TERM_STATS_COLUMNS: [&str; 6] = ["kind", "term", "occ", "pioneer_id", "first_date", "reuse"];

pub fn term_stats(paper: &PaperNovelty) -> impl Iterator<Item = TermStats> + '_ {
    paper.new_terms.iter().map(move |t| TermStats {
        kind: t.kind,
        term: t.term.clone(),
        occ: t.occ,
        pioneer_id: paper.paper_id.clone(),
        first_date: paper.date,
        reuse: t.reuse(),
    })
}

/// Streams the term-statistics table and the same-date tie log while pass 2
/// runs. Rows come in pioneer order, then kind, then term.
pub struct TermTableWriter {
    stats: BufWriter<File>,
    ties: BufWriter<File>,
    stats_path: std::path::PathBuf,
}

impl TermTableWriter {
    pub fn create(stats_path: &Path, ties_path: &Path) -> Result<Self> {
        let stats = File::create(stats_path).map_err(|e| Error::io(stats_path, e))?;
        let ties = File::create(ties_path).map_err(|e| Error::io(ties_path, e))?;
        let mut w = TermTableWriter {
            stats: BufWriter::new(stats),
            ties: BufWriter::new(ties),
            stats_path: stats_path.to_path_buf(),
        };
        let io = |e| Error::io(stats_path, e);
        writeln!(w.stats, "{}", TERM_STATS_COLUMNS.join("\t")).map_err(io)?;
        writeln!(w.ties, "kind\tterm\tpioneer_id\trunner_up_id\tdate").map_err(io)?;
        Ok(w)
    }

    pub fn write(&mut self, paper: &PaperNovelty, ids: &[String]) -> Result<()> {
        let io = |e| Error::io(&self.stats_path, e);
        for t in &paper.new_terms {
            writeln!(
                self.stats,
                "{}\t{}\t{}\t{}\t{}\t{}",
                t.kind,
                t.term,
                t.occ,
                paper.paper_id,
                paper.date,
                t.reuse()
            )
            .map_err(io)?;
            if let Some(runner_up) = t.tie_with {
                writeln!(
                    self.ties,
                    "{}\t{}\t{}\t{}\t{}",
                    t.kind, t.term, paper.paper_id, ids[runner_up as usize], paper.date
                )
                .map_err(io)?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        let io = |e| Error::io(&self.stats_path, e);
        self.stats.flush().map_err(io)?;
        self.ties.flush().map_err(io)
    }
}

pub fn read_term_stats(path: &Path) -> Result<Vec<TermStats>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if n == 0 || line.is_empty() {
            continue;
        }
        let malformed = |m: String| Error::Malformed { line: n + 1, message: m };
        let c: Vec<&str> = line.split('\t').collect();
        if c.len() != 6 {
            return Err(malformed(format!("expected 6 columns, found {}", c.len())));
        }
        rows.push(TermStats {
            kind: c[0].parse().map_err(malformed)?,
            term: c[1].to_string(),
            occ: c[2].parse().map_err(|_| malformed("bad occ".into()))?,
            pioneer_id: c[3].to_string(),
            first_date: NaiveDate::parse_from_str(c[4], "%Y-%m-%d").map_err(|e| malformed(e.to_string()))?,
            reuse: c[5].parse().map_err(|_| malformed("bad reuse".into()))?,
        });
    }
    Ok(rows)
}
