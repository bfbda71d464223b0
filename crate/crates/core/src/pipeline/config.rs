use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::citemetrics::CiteConfig;
use crate::corpus::CleaningRules;
use crate::error::{Error, Result};
use crate::novelty::EngineConfig;
use crate::semdist::Window;
use crate::textproc::{Mode, VocabThreshold};

/// Settings of the reuse-to-citation analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReuseSettings {
    pub sample_terms: usize,
    pub min_reuse: u32,
    pub seed: u64,
    pub max_gap: i32,
}

impl Default for ReuseSettings {
    fn default() -> Self {
        ReuseSettings {
            sample_terms: 50,
            min_reuse: 1,
            seed: 11,
            max_gap: 10,
        }
    }
}

/// Everything a run depends on. Relative paths in a config file resolve
/// against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// JSONL corpus shards.
    pub corpus: Vec<PathBuf>,
    /// JSONL records dated 1666-1900 seeding the baseline dictionary.
    pub baseline: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    /// Case paper ids, one per line.
    pub cases: Option<PathBuf>,
    /// Analysis spec in TOML; the built-in analysis runs when unset.
    pub analysis: Option<PathBuf>,
    /// Directory with `stop_words.txt` and `removal_words.txt` seeds.
    pub filter_seeds: Option<PathBuf>,
    pub tag_lexicon: Option<PathBuf>,
    pub lemma_lexicon: Option<PathBuf>,
    pub novelty_lexicon: Option<PathBuf>,
    pub output: PathBuf,

    pub mode: Mode,
    pub strict: bool,
    pub pair_baseline: bool,
    pub common_words: VocabThreshold,
    pub cleaning: CleaningRules,
    pub engine: EngineConfig,
    pub window: Window,
    pub cite: CiteConfig,
    pub matching_seed: u64,
    pub reuse: ReuseSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: Vec::new(),
            baseline: None,
            embeddings: None,
            cases: None,
            analysis: None,
            filter_seeds: None,
            tag_lexicon: None,
            lemma_lexicon: None,
            novelty_lexicon: None,
            output: PathBuf::from("out"),
            mode: Mode::Full,
            strict: false,
            pair_baseline: true,
            common_words: VocabThreshold::default(),
            cleaning: CleaningRules::default(),
            engine: EngineConfig::default(),
            window: Window::default(),
            cite: CiteConfig::default(),
            matching_seed: 7,
            reuse: ReuseSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML config and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.corpus.iter_mut().for_each(fix);
        for p in [
            &mut self.baseline,
            &mut self.embeddings,
            &mut self.cases,
            &mut self.analysis,
            &mut self.filter_seeds,
            &mut self.tag_lexicon,
            &mut self.lemma_lexicon,
            &mut self.novelty_lexicon,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.output);
    }

    /// Every referenced input must exist.
    pub fn validate(&self) -> Result<()> {
        let optional = [
            ("baseline", &self.baseline),
            ("embeddings", &self.embeddings),
            ("cases", &self.cases),
            ("analysis", &self.analysis),
            ("filter_seeds", &self.filter_seeds),
            ("tag_lexicon", &self.tag_lexicon),
            ("lemma_lexicon", &self.lemma_lexicon),
            ("novelty_lexicon", &self.novelty_lexicon),
        ];
        let named = self
            .corpus
            .iter()
            .map(|p| ("corpus", p))
            .chain(optional.iter().filter_map(|(n, p)| p.as_ref().map(|p| (*n, p))));
        for (name, p) in named {
            if !p.exists() {
                return Err(Error::Config(format!("{name} path {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
