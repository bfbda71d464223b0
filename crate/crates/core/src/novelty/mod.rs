//! First-occurrence and reuse counting over the ordered paper stream.
//!
//! Pass 1 aggregates, for each term fingerprint, the number of papers that
//! contain it and the two earliest of them. Pass 2 replays the stream,
//! recovers the strings of terms whose first paper is the current one and
//! applies the baseline.

mod engine;
mod kind;
mod metrics;
mod shard;
mod spill;

pub use engine::{
    pass1_count, pass2_first_occurrence, run_novelty, EngineConfig, EngineStats, NewTerm, PaperIter,
    PaperNovelty, PaperSource, PaperTerms, TermStore,
};
pub use kind::{fingerprint, kind_of, pair_fingerprint, Fingerprint, KindSet, PaperPrints, TermKind};
pub use metrics::{
    compute_ex_ante, compute_ex_post, read_metrics, read_term_stats, term_stats, write_metrics, ExAnte,
    ExPost, MetricsRow, TermStats, TermTableWriter, METRICS_COLUMNS, TERM_STATS_COLUMNS,
};
pub use shard::{Agg, CountShard, ShardSummary, MAP_BYTES_PER_SLOT, NO_SEQ};
