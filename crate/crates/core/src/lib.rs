//! Streaming first story detection.
//!
//! Documents arrive one at a time. Each arrival updates the incremental term
//! statistics, is turned into a TF.IDF vector under the current statistics and
//! is scored against everything seen before it. The novelty of a document is
//! one minus its (possibly biased) similarity to the closest earlier document.
//!
//! The crate implements several scoring strategies that differ only in how
//! they treat time:
//!
//! * exhaustive 1-NN with freshly recomputed vector lengths (no temporal bias),
//! * exhaustive 1-NN with vector lengths frozen at arrival time, which inflates
//!   similarity to old documents because IDF values drift upwards,
//! * a sliding window that damps older window slots (recency bias),
//! * an explicit logarithmic bias towards temporally distant documents,
//! * random-hyperplane LSH with a recency window and early acceptance.
//!
//! The [`eval`] module scores runs with the topic-weighted normalized minimum
//! detection cost, including skip evaluation and a paired randomization test.

pub mod corpus;
pub mod detectors;
pub mod error;
pub mod eval;
pub mod par;
pub mod synthetic;
pub mod term_stats;
pub mod tuner;
pub mod vectorize;

pub use corpus::{read_stream, tokenize, Document, StreamFormat, StreamOrdering, StreamSource};
pub use detectors::{
    run_detector, BiasForm, BiasParams, Detector, DetectorConfig, LshConfig, NoveltyRecord,
    Strategy,
};
pub use error::{Error, Result};
pub use eval::{CostConstants, DetectionCostReport, GroundTruth};
pub use par::Exec;
pub use term_stats::{IdfTracePoint, TermId, TermStatistics};
pub use vectorize::{DocumentVector, NormPolicy, TfScheme};
