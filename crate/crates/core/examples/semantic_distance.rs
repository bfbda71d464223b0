//! Distance of each paper to its closest predecessor within five years.
//!
//! `cargo run --example semantic_distance`

use chrono::NaiveDate;
use scinovelty::corpus::OrderKey;
use scinovelty::semdist::{EmbeddingStore, SemanticIndex, Window};

fn main() -> scinovelty::Result<()> {
    let papers = [
        ("a", 1990, [1.0, 0.0, 0.0]),
        ("b", 1992, [0.9, 0.1, 0.0]),
        ("c", 1994, [0.0, 1.0, 0.0]),
        ("d", 2001, [0.0, 0.0, 1.0]),
    ];
    let mut store = EmbeddingStore::new(3);
    let mut keys = Vec::new();
    for (id, year, v) in papers {
        store.insert(id, &v, "inline")?;
        keys.push(OrderKey {
            date: NaiveDate::from_ymd_opt(year, 6, 1).unwrap(),
            id: id.into(),
        });
    }
    let index = SemanticIndex::new(keys.clone(), &store);
    for (k, d) in keys.iter().zip(index.all(Window::Days(1826))) {
        match d {
            Some(d) => println!("{} {:.4}", k.id, d),
            None => println!("{} none (no earlier paper in window)", k.id),
        }
    }
    Ok(())
}
