use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CORPUS: &str = "corpus.jsonl";
pub const INGEST_MANIFEST: &str = "ingest_manifest.json";
pub const BASELINE: &str = "baseline.tsv";
pub const STOP_WORDS: &str = "filters/stop_words.txt";
pub const REMOVAL_WORDS: &str = "filters/removal_words.txt";
pub const TERMS: &str = "terms.jsonl";
pub const NOVELTY_LANGUAGE: &str = "novelty_language.tsv";
pub const METRICS: &str = "metrics.tsv";
pub const TERM_STATS: &str = "term_stats.tsv";
pub const TIES: &str = "ties.tsv";
pub const ENGINE_STATS: &str = "engine_stats.json";
pub const SEMDIST: &str = "semdist.tsv";
pub const SEMDIST_STATS: &str = "semdist_stats.json";
pub const CITATIONS: &str = "citations.tsv";
pub const CITE_STATS: &str = "cite_stats.json";
pub const METRICS_FULL: &str = "metrics_full.tsv";
pub const ANALYSIS_DIR: &str = "analysis";
pub const PLOTS_DIR: &str = "plots";
pub const RUN_MANIFEST: &str = "run_manifest.json";

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

/// Buffered TSV writer that maps IO errors to the file path.
pub struct TsvWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl TsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        ensure_parent(path)?;
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = TsvWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        w.row(header)?;
        Ok(w)
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) -> Result<()> {
        let line: Vec<&str> = cells.iter().map(AsRef::as_ref).collect();
        writeln!(self.out, "{}", line.join("\t")).map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Formats an optional real as written in TSV outputs.
pub fn cell(v: Option<f64>) -> String {
    v.map(|x| (x + 0.0).to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Digests of every stage's inputs and outputs under one config hash.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Option<Self>> {
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Some(serde_json::from_str(&text)?))
    }
}
