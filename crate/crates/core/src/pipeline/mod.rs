//! Stage orchestration over an output directory of plain TSV/JSON artifacts.

mod analysis;
mod artifacts;
mod config;
mod stages;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

pub use analysis::{
    emit_plot_data, load_table, merge_metrics, run_model, AnalysisSpec, MissingPolicy, ModelReport, ModelSpec,
    PlotSpec, Sample, Table, BUCKET_PLOT_COLUMNS, COUNT_COLUMNS,
};
pub use artifacts::*;
pub use config::{PipelineConfig, ReuseSettings};
pub use stages::{
    base_processor, engine_stats, parse_opt, read_corpus, read_tsv, CiteReport, IngestReport, SemdistReport, TermLine,
    TermsFile, CITATION_COLUMNS,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Baseline,
    Preprocess,
    Novelty,
    Semdist,
    Cite,
    Stats,
    Plotdata,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Baseline,
        Stage::Preprocess,
        Stage::Novelty,
        Stage::Semdist,
        Stage::Cite,
        Stage::Stats,
        Stage::Plotdata,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Baseline => "baseline",
            Stage::Preprocess => "preprocess",
            Stage::Novelty => "novelty",
            Stage::Semdist => "semdist",
            Stage::Cite => "cite",
            Stage::Stats => "stats",
            Stage::Plotdata => "plotdata",
        }
    }

    /// Artifacts this stage writes, relative to the output directory.
    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &[CORPUS, INGEST_MANIFEST],
            Stage::Baseline => &[BASELINE],
            Stage::Preprocess => &[STOP_WORDS, REMOVAL_WORDS, TERMS, NOVELTY_LANGUAGE],
            Stage::Novelty => &[METRICS, TERM_STATS, TIES, ENGINE_STATS],
            Stage::Semdist => &[SEMDIST, SEMDIST_STATS],
            Stage::Cite => &[CITATIONS, CITE_STATS],
            Stage::Stats => &[METRICS_FULL, ANALYSIS_DIR],
            Stage::Plotdata => &[PLOTS_DIR],
        }
    }

    /// Upstream artifacts read by this stage.
    pub fn requires(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest | Stage::Baseline => &[],
            Stage::Preprocess | Stage::Semdist | Stage::Cite => &[CORPUS],
            Stage::Novelty => &[TERMS, BASELINE],
            Stage::Stats => &[CORPUS, TERMS, NOVELTY_LANGUAGE, METRICS, TERM_STATS, SEMDIST, CITATIONS],
            Stage::Plotdata => &[CORPUS, NOVELTY_LANGUAGE, METRICS_FULL, CITATIONS],
        }
    }

    /// The stage that produces an artifact.
    pub fn producer(artifact: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.outputs().contains(&artifact))
    }

    fn external_inputs(self, cfg: &PipelineConfig) -> Vec<(String, PathBuf)> {
        let one = |key: &str, p: &Option<PathBuf>| p.iter().map(|p| (key.to_string(), p.clone())).collect::<Vec<_>>();
        match self {
            Stage::Ingest => cfg
                .corpus
                .iter()
                .enumerate()
                .map(|(i, p)| (format!("corpus[{i}]"), p.clone()))
                .collect(),
            Stage::Baseline => [one("baseline", &cfg.baseline), one("tag_lexicon", &cfg.tag_lexicon), one("lemma_lexicon", &cfg.lemma_lexicon)].concat(),
            Stage::Preprocess => [
                one("filter_seeds", &cfg.filter_seeds),
                one("tag_lexicon", &cfg.tag_lexicon),
                one("lemma_lexicon", &cfg.lemma_lexicon),
                one("novelty_lexicon", &cfg.novelty_lexicon),
            ]
            .concat(),
            Stage::Semdist => one("embeddings", &cfg.embeddings),
            Stage::Stats | Stage::Plotdata => [one("cases", &cfg.cases), one("analysis", &cfg.analysis)].concat(),
            Stage::Novelty | Stage::Cite => Vec::new(),
        }
    }

    fn run(self, cfg: &PipelineConfig, out: &Path) -> Result<()> {
        match self {
            Stage::Ingest => stages::ingest(cfg, out),
            Stage::Baseline => stages::baseline(cfg, out),
            Stage::Preprocess => stages::preprocess(cfg, out),
            Stage::Novelty => stages::novelty(cfg, out),
            Stage::Semdist => stages::semdist(cfg, out),
            Stage::Cite => stages::cite(cfg, out),
            Stage::Stats => analysis::stats_stage(cfg, out),
            Stage::Plotdata => analysis::plotdata_stage(cfg, out),
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown stage {s:?}")))
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Rerun every requested stage and overwrite artifacts from another config.
    pub force: bool,
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunReport {
    pub executed: Vec<Stage>,
    pub cached: Vec<Stage>,
}

/// sha256 of a file, or of the sorted `(relative path, digest)` list of a
/// directory.
pub fn path_digest(path: &Path) -> Result<String> {
    if !path.is_dir() {
        return file_digest(path);
    }
    let mut entries = Vec::new();
    collect_files(path, path, &mut entries)?;
    entries.sort();
    let mut h = Sha256::new();
    for (rel, digest) in entries {
        h.update(rel.as_bytes());
        h.update([0]);
        h.update(digest.as_bytes());
        h.update([b'\n']);
    }
    Ok(hex::encode(h.finalize()))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<(String, String)>) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.is_dir() {
            collect_files(root, &p, out)?;
        } else {
            let rel = p.strip_prefix(root).unwrap_or(&p).to_string_lossy().replace('\\', "/");
            out.push((rel, file_digest(&p)?));
        }
    }
    Ok(())
}

fn digests(items: impl IntoIterator<Item = (String, PathBuf)>) -> Result<BTreeMap<String, String>> {
    items.into_iter().map(|(k, p)| Ok((k, path_digest(&p)?))).collect()
}

fn stage_inputs(stage: Stage, cfg: &PipelineConfig, out: &Path) -> Result<BTreeMap<String, String>> {
    let upstream = stage.requires().iter().map(|a| (a.to_string(), out.join(a)));
    digests(upstream.chain(stage.external_inputs(cfg)))
}

fn stage_outputs(stage: Stage, out: &Path) -> Result<Option<BTreeMap<String, String>>> {
    if stage.outputs().iter().any(|a| !out.join(a).exists()) {
        return Ok(None);
    }
    digests(stage.outputs().iter().map(|a| (a.to_string(), out.join(a)))).map(Some)
}

/// Runs the requested stages in dependency order.
///
/// Each stage is skipped when the manifest records the same input digests
/// and its outputs are unchanged on disk.
pub fn run_pipeline(cfg: &PipelineConfig, stages: &[Stage], opts: RunOptions) -> Result<RunReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    pool.install(|| run_sequential(cfg, stages, opts))
}

fn run_sequential(cfg: &PipelineConfig, stages: &[Stage], opts: RunOptions) -> Result<RunReport> {
    let out = cfg.output.as_path();
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let manifest_path = out.join(RUN_MANIFEST);
    let hash = cfg.hash();
    let mut manifest = match RunManifest::read(&manifest_path)? {
        Some(m) if m.config_hash == hash => m,
        Some(_) if !opts.force => return Err(Error::ConfigMismatch(manifest_path)),
        _ => RunManifest::default(),
    };
    manifest.config_hash = hash;
    manifest.version = env!("CARGO_PKG_VERSION").to_string();

    let mut order = stages.to_vec();
    order.sort();
    order.dedup();
    let mut report = RunReport::default();
    for stage in order {
        for a in stage.requires() {
            if !out.join(a).exists() {
                return Err(Error::MissingArtifact {
                    stage: stage.name().to_string(),
                    artifact: a.to_string(),
                    producer: Stage::producer(a).map_or("none", Stage::name).to_string(),
                });
            }
        }
        let inputs = stage_inputs(stage, cfg, out)?;
        if !opts.force {
            if let Some(prev) = manifest.stages.get(stage.name()) {
                if prev.inputs == inputs && stage_outputs(stage, out)?.as_ref() == Some(&prev.outputs) {
                    report.cached.push(stage);
                    continue;
                }
            }
        }
        stage.run(cfg, out)?;
        let outputs = stage_outputs(stage, out)?
            .ok_or_else(|| Error::Internal(format!("stage {stage} did not write all of its artifacts")))?;
        manifest.stages.insert(stage.name().to_string(), StageRecord { inputs, outputs });
        write_json(&manifest_path, &manifest)?;
        report.executed.push(stage);
    }
    write_json(&manifest_path, &manifest)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{text_corpus, write_fixture, TextCorpusConfig};

    fn fixture(dir: &Path) -> PipelineConfig {
        write_fixture(dir, &text_corpus(&TextCorpusConfig::default()), 3).unwrap()
    }

    #[test]
    fn full_run_then_cached() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture(dir.path());
        let first = run_pipeline(&cfg, &Stage::ALL, RunOptions::default()).unwrap();
        assert_eq!(first.executed, Stage::ALL);
        for s in Stage::ALL {
            for a in s.outputs() {
                assert!(cfg.output.join(a).exists(), "{a}");
            }
        }
        let second = run_pipeline(&cfg, &Stage::ALL, RunOptions::default()).unwrap();
        assert_eq!(second.cached, Stage::ALL);
    }

    #[test]
    fn stats_without_metrics_names_the_stage() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture(dir.path());
        run_pipeline(&cfg, &[Stage::Ingest], RunOptions::default()).unwrap();
        let err = run_pipeline(&cfg, &[Stage::Stats], RunOptions::default()).unwrap_err();
        assert!(err.to_string().contains("stats"), "{err}");
    }

    #[test]
    fn config_change_needs_force() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fixture(dir.path());
        run_pipeline(&cfg, &[Stage::Ingest], RunOptions::default()).unwrap();
        cfg.matching_seed += 1;
        assert!(matches!(
            run_pipeline(&cfg, &[Stage::Ingest], RunOptions::default()),
            Err(Error::ConfigMismatch(_))
        ));
        let forced = RunOptions { force: true, threads: 1 };
        assert_eq!(run_pipeline(&cfg, &[Stage::Ingest], forced).unwrap().executed, [Stage::Ingest]);
    }

    #[test]
    fn empty_corpus_ingests() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.jsonl");
        std::fs::write(&empty, "").unwrap();
        let cfg = PipelineConfig {
            corpus: vec![empty],
            output: dir.path().join("out"),
            ..Default::default()
        };
        run_pipeline(&cfg, &[Stage::Ingest], RunOptions::default()).unwrap();
        assert_eq!(std::fs::read_to_string(cfg.output.join(CORPUS)).unwrap(), "");
    }
}
