//! Novelty scoring strategies.
//!
//! Every strategy reduces to the same shape: score the arriving vector
//! against a set of earlier vectors, take the best (possibly biased) product,
//! and report `novelty = 1 − similarity × bias`. Ties in the best product go
//! to the earliest position.
//!
//! The free functions in [`scan`] evaluate a strategy over an explicit slice
//! of history and are the direct form of each scoring rule. [`Detector`] runs
//! a whole stream and narrows the scan with an inverted index (and LSH tables
//! when configured) without changing the result.

mod bias;
mod detector;
pub mod io;
pub mod lsh;
pub mod scan;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::vectorize::{DocumentVector, NormPolicy, TfScheme};

pub use bias::{distance_bias, BiasForm, BiasParams};
pub use detector::Detector;
pub use lsh::{lsh_signature, Hyperplanes, LshConfig};
pub use scan::{exhaustive_novelty, optimized_novelty, recency_novelty};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoveltyRecord {
    pub doc_id: String,
    pub position: u64,
    pub novelty: f64,
    pub nearest_id: Option<String>,
    /// Similarity before any bias.
    pub raw_similarity: f64,
    /// Multiplier applied to `raw_similarity`; 1.0 when unbiased.
    pub bias_factor: f64,
    /// LSH accepted a window neighbour without consulting its tables.
    #[serde(default)]
    pub early_stop: bool,
    /// The arriving document had a zero TF.IDF vector (every term occurs in
    /// every document so far) and was given novelty 0 by convention.
    #[serde(default)]
    pub zero_vector: bool,
}

impl NoveltyRecord {
    pub(crate) fn first(vec: &DocumentVector) -> Self {
        NoveltyRecord {
            doc_id: vec.doc_id.clone(),
            position: vec.position,
            novelty: 1.0,
            nearest_id: None,
            raw_similarity: 0.0,
            bias_factor: 1.0,
            early_stop: false,
            zero_vector: false,
        }
    }

    pub(crate) fn zero(vec: &DocumentVector) -> Self {
        NoveltyRecord {
            novelty: 0.0,
            raw_similarity: 1.0,
            zero_vector: true,
            ..Self::first(vec)
        }
    }

    pub(crate) fn from_hit(vec: &DocumentVector, hit: Hit, nearest_id: &str) -> Self {
        NoveltyRecord {
            novelty: 1.0 - hit.score,
            nearest_id: Some(nearest_id.to_string()),
            raw_similarity: hit.raw,
            bias_factor: hit.factor,
            ..Self::first(vec)
        }
    }
}

/// One scored candidate. `idx` indexes whatever slice was scanned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Hit {
    pub idx: usize,
    pub position: u64,
    pub raw: f64,
    pub factor: f64,
    pub score: f64,
}

impl Hit {
    /// Higher score wins, then the earlier position.
    #[inline]
    pub fn better(a: Hit, b: Hit) -> Hit {
        if b.score > a.score || (b.score == a.score && b.position < a.position) {
            b
        } else {
            a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "lowercase")]
pub enum Strategy {
    /// Exact 1-NN over all history.
    Exhaustive { norms: NormPolicy },
    /// Exact 1-NN over the last `window` documents with slot damping.
    Recency { window: usize },
    /// Exact 1-NN with fresh norms and the logarithmic distance bias.
    Optimized { bias: BiasParams },
    /// LSH tables plus a recency window with early acceptance.
    Lsh { lsh: LshConfig, norms: NormPolicy },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub strategy: Strategy,
    #[serde(default)]
    pub tf: TfScheme,
    #[serde(default)]
    pub exec: Exec,
}

impl DetectorConfig {
    pub fn new(strategy: Strategy) -> Self {
        DetectorConfig {
            strategy,
            tf: TfScheme::default(),
            exec: Exec::default(),
        }
    }

    pub fn exhaustive(norms: NormPolicy) -> Self {
        Self::new(Strategy::Exhaustive { norms })
    }

    pub fn recency(window: usize) -> Self {
        Self::new(Strategy::Recency { window })
    }

    pub fn optimized(bias: BiasParams) -> Self {
        Self::new(Strategy::Optimized { bias })
    }

    pub fn lsh(lsh: LshConfig, norms: NormPolicy) -> Self {
        Self::new(Strategy::Lsh { lsh, norms })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_tf(mut self, tf: TfScheme) -> Self {
        self.tf = tf;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.strategy {
            Strategy::Exhaustive { .. } => Ok(()),
            Strategy::Recency { window } => {
                if *window == 0 {
                    Err(Error::InvalidConfig("window must be ≥ 1".into()))
                } else {
                    Ok(())
                }
            }
            Strategy::Optimized { bias } => bias.validate(),
            Strategy::Lsh { lsh, .. } => lsh.validate(),
        }
    }
}

/// Run one detector over a whole stream: for each document, update the term
/// statistics, build its vector, score it against history, then index it.
pub fn run_detector(stream: &[Document], config: &DetectorConfig) -> Result<Vec<NoveltyRecord>> {
    let mut detector = Detector::new(config.clone())?;
    stream.iter().map(|doc| detector.process(doc)).collect()
}
