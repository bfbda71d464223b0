//! Writes a synthetic corpus and runs every stage into a temp directory.
//!
//! `cargo run --example full_pipeline`

use scinovelty::pipeline::{run_pipeline, RunOptions, Stage};
use scinovelty::synth::{text_corpus, write_fixture, TextCorpusConfig};

fn main() -> scinovelty::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let corpus = text_corpus(&TextCorpusConfig::default());
    let cfg = write_fixture(dir.path(), &corpus, 3)?;

    let first = run_pipeline(&cfg, &Stage::ALL, RunOptions::default())?;
    println!("ran {:?}", first.executed);
    let again = run_pipeline(&cfg, &Stage::ALL, RunOptions::default())?;
    println!("second run cached {} stages", again.cached.len());

    let metrics = std::fs::read_to_string(cfg.output.join("metrics_full.tsv")).unwrap_or_default();
    for line in metrics.lines().take(4) {
        println!("{line}");
    }
    let mut files: Vec<_> = std::fs::read_dir(cfg.output.join("analysis")).into_iter().flatten().flatten().map(|e| e.file_name()).collect();
    files.sort();
    println!("analysis: {files:?}");
    Ok(())
}
