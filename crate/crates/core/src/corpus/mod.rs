//! Ingestion, abstract reconstruction, cleaning and the historical baseline.

mod baseline;
mod clean;
mod ingest;
mod inverted;
mod record;

pub use baseline::{build_baseline, in_baseline_period, BaselineDictionary, BASELINE_YEARS};
pub use clean::{
    bibliographic_share, clean_corpus, CleaningRules, CorpusManifest, BIBLIOGRAPHIC_ABSTRACT,
    DUPLICATE_ABSTRACT, DUPLICATE_ID, DUPLICATE_TITLE, EMPTY_TITLE, MALFORMED_LINE, NO_AUTHORS,
    VENUE_WITHOUT_PUBLISHER,
};
pub use ingest::{load_all, load_stream, IngestOptions, Loaded, RecordStream};
pub use inverted::{invert, reconstruct_abstract, InvertedIndex, Reconstructed};
pub use record::{order_key, OrderKey, PaperRecord, RecordFlags};
