//! Words, noun phrases and pairs extracted from a few titles.
//!
//! `cargo run --example process_text`

use scinovelty::corpus::PaperRecord;
use scinovelty::textproc::{detect_novelty_language, Mode, TextProcessor};

fn main() {
    let p = TextProcessor::bundled();
    let titles = [
        "Specific Enzymatic Amplification of DNA In Vitro: The Polymerase Chain Reaction",
        "Helical microtubules of graphitic carbon",
        "A novel self-assembly route to x-ray transparent films",
    ];
    for (i, title) in titles.iter().enumerate() {
        let date = chrono::NaiveDate::from_ymd_opt(1990 + i as i32, 1, 1).unwrap();
        let rec = PaperRecord::new(format!("p{i}"), date, *title, None);
        let t = p.process_paper(&rec, Mode::Full);
        println!("{title}");
        println!("  words   {:?}", t.vocab);
        println!("  phrases {:?}", t.phrases);
        println!("  phrase pairs {:?}", t.phrase_pair_strs().collect::<Vec<_>>());
        println!("  novelty language: {}", detect_novelty_language(title, None));
    }
}
