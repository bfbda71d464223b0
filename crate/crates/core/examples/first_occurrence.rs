//! Credits each term to the first paper that used it and counts later reuse.
//!
//! `cargo run --example first_occurrence`

use chrono::NaiveDate;
use scinovelty::corpus::BaselineDictionary;
use scinovelty::novelty::{run_novelty, EngineConfig, MetricsRow, PaperTerms};
use scinovelty::textproc::TermSets;

fn paper(id: &str, day: u32, words: &[&str]) -> PaperTerms {
    let vocab: Vec<String> = words.iter().map(|w| w.to_string()).collect();
    PaperTerms {
        paper_id: id.into(),
        date: NaiveDate::from_ymd_opt(2001, 3, day).unwrap(),
        terms: TermSets::from_parts(vocab.clone(), vec![false; vocab.len()], Vec::new()),
    }
}

fn main() -> scinovelty::Result<()> {
    let papers = vec![
        paper("A", 1, &["graphene", "lattice"]),
        paper("B", 2, &["graphene", "spintronics"]),
        paper("C", 3, &["graphene", "spintronics"]),
        paper("D", 4, &["lattice"]),
    ];
    let mut baseline = BaselineDictionary::empty(true);
    baseline.words.insert("lattice".into());

    let (store, out) = run_novelty(&papers, &baseline, &EngineConfig::default())?;
    for p in &out {
        let row = MetricsRow::from_novelty(p, false);
        let terms: Vec<String> = p.new_terms.iter().map(|t| format!("{}(reuse {})", t.term, t.reuse())).collect();
        println!("{}  new_word={} reuse={}  {:?}", p.paper_id, row.new_word, row.new_word_reuse, terms);
    }
    println!("{} papers, {} spills", store.stats.papers, store.stats.spills);
    Ok(())
}
