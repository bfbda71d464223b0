//! Writes the bundled 200-paper fixture: corpus shards, baseline records,
//! embeddings, case ids and a config.
//!
//! cargo run --example make_fixture -- [DIR] [SHARDS]

use scinovelty::synth::{text_corpus, write_fixture, TextCorpusConfig};

fn main() -> scinovelty::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "tests/fixtures/mini".into());
    let shards = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let corpus = text_corpus(&TextCorpusConfig::default());
    let cfg = write_fixture(dir.as_ref(), &corpus, shards)?;
    println!(
        "{} papers, {} baseline records, {} vectors, {} cases -> {dir}/config.toml (output {})",
        corpus.records.len(),
        corpus.baseline.len(),
        corpus.embeddings.len(),
        corpus.prize_ids.len(),
        cfg.output.display()
    );
    Ok(())
}
