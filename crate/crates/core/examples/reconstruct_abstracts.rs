//! Rebuilds an abstract from its inverted index, then shows what happens
//! when a position is missing.
//!
//! `cargo run --example reconstruct_abstracts`

use scinovelty::corpus::{invert, reconstruct_abstract};

fn main() -> scinovelty::Result<()> {
    let text = "we report a new method for the synthesis of carbon nanotubes";
    let mut index = invert(text);
    println!("index: {}", serde_json::to_string(&index)?);
    println!("back:  {}", reconstruct_abstract(&index)?.text);

    // drop one word; the gap is counted and the rest keeps its order
    index.remove("new");
    let r = reconstruct_abstract(&index)?;
    println!("with a hole: {:?} ({} gap)", r.text, r.gaps);
    Ok(())
}
