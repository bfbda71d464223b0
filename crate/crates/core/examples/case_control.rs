//! Matches prize papers to controls, then compares a metric with a
//! rank-sum test and a logit.
//!
//! `cargo run --example case_control`

use rand::{Rng, SeedableRng};
use scinovelty::stats::{
    auc, fit_glm, mann_whitney, match_case_control, DesignMatrix, Family, GlmOptions, MatchKey,
};

fn main() -> scinovelty::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut keys = Vec::new();
    let mut novelty = std::collections::HashMap::new();
    for i in 0..400 {
        let case = i < 20;
        let k = MatchKey {
            id: format!("{}{i:03}", if case { "case" } else { "ctl" }),
            venue: format!("V{}", i % 4),
            year: 2000 + (i % 3) as i32,
            subfield: Some((i % 6) as i64),
            field: Some((i % 6 / 2) as i64),
        };
        let bump = if case { 2.0 } else { 0.0 };
        novelty.insert(k.id.clone(), rng.gen_range(0.0..5.0) + bump);
        keys.push(k);
    }
    let (cases, pool) = keys.split_at(20);
    let m = match_case_control(cases, pool, 7);
    println!("{} matched, {} unmatched", m.pairs.len(), m.unmatched.len());

    let x: Vec<f64> = m.pairs.iter().map(|p| novelty[&p.case_id]).collect();
    let y: Vec<f64> = m.pairs.iter().map(|p| novelty[&p.control_id]).collect();
    let mw = mann_whitney(&x, &y).expect("two non-empty samples");
    println!("U = {} vs {}, p = {:?}", mw.u_x, mw.u_y, mw.p_two_sided);

    let outcome: Vec<f64> = x.iter().map(|_| 1.0).chain(y.iter().map(|_| 0.0)).collect();
    let metric: Vec<f64> = x.iter().chain(&y).copied().collect();
    let design = DesignMatrix::from_columns(outcome.clone(), vec![("novelty".into(), metric)], true)?;
    let fit = fit_glm(&design, Family::Logit, &GlmOptions::default())?;
    println!("logit coefficient {:?}, converged {}", fit.coefficient("novelty"), fit.converged);
    let labels: Vec<bool> = outcome.iter().map(|&v| v == 1.0).collect();
    println!("AUC {:?}", auc(&fit.predict(&design), &labels));
    Ok(())
}
