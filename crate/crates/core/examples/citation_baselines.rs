//! CD index, Uzzi atypicality and Wang novelty on a small citation graph.
//!
//! `cargo run --example citation_baselines`

use chrono::NaiveDate;
use scinovelty::citemetrics::{compute_all, CitationGraph, CiteConfig};
use scinovelty::corpus::PaperRecord;

fn rec(id: &str, year: i32, day: u32, venue: &str, refs: &[&str]) -> PaperRecord {
    PaperRecord::new(id, NaiveDate::from_ymd_opt(year, 1, day).unwrap(), "t", None)
        .with_venue(venue)
        .with_references(refs.iter().copied())
}

fn main() -> scinovelty::Result<()> {
    let recs = vec![
        rec("s1", 1990, 1, "Physics", &[]),
        rec("s2", 1990, 2, "Biology", &[]),
        rec("s3", 1990, 3, "Chemistry", &[]),
        rec("p1", 1995, 1, "Physics", &["s1", "s2"]),
        rec("p2", 1995, 2, "Biology", &["s2", "s3"]),
        rec("f", 1998, 1, "Nature", &["s1", "s2", "s3"]),
        rec("c1", 2000, 1, "Physics", &["f"]),
        rec("c2", 2000, 2, "Biology", &["f", "s1"]),
        rec("c3", 2000, 3, "Biology", &["s3"]),
    ];
    let graph = CitationGraph::build(&recs);
    let metrics = compute_all(&graph, &CiteConfig::default())?;
    println!("paper\trefs\tjournals\tcd\tuzzi\twang");
    let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
    for m in metrics {
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            m.paper_id,
            m.n_refs,
            m.n_ref_journals,
            show(m.cd),
            show(m.uzzi),
            show(m.wang)
        );
    }
    Ok(())
}
