//! Incremental collection statistics.
//!
//! `idf(t) = log(|C| / df(t))`, recomputed implicitly on every arrival: the
//! statistics only store counts, and IDF values are derived on demand from the
//! current collection size. Terms are interned to dense [`TermId`]s in order of
//! first appearance.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

pub type TermId = u32;

/// Document frequency assumed for a term that has never been seen.
pub const UNSEEN_DF: f64 = 0.5;

/// Per-document term counts, sorted by term id, one entry per distinct term.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermCounts(pub Vec<(TermId, u32)>);

impl TermCounts {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, u32)> + '_ {
        self.0.iter().copied()
    }

    fn from_ids(mut ids: Vec<TermId>) -> Self {
        ids.sort_unstable();
        let mut out: Vec<(TermId, u32)> = Vec::with_capacity(ids.len());
        for id in ids {
            match out.last_mut() {
                Some((last, n)) if *last == id => *n += 1,
                _ => out.push((id, 1)),
            }
        }
        TermCounts(out)
    }
}

#[derive(Debug, Clone)]
pub struct TermStatistics {
    vocab: HashMap<String, TermId>,
    terms: Vec<String>,
    doc_frequency: Vec<u64>,
    // ln(df) cached per term; refreshed only when df changes.
    ln_df: Vec<f64>,
    collection_size: u64,
    ln_n: f64,
    version: u64,
    // 1 / ln(base); 1.0 for the natural logarithm.
    idf_scale: f64,
}

impl Default for TermStatistics {
    fn default() -> Self {
        Self::new()
    }
}

impl TermStatistics {
    pub fn new() -> Self {
        TermStatistics {
            vocab: HashMap::new(),
            terms: Vec::new(),
            doc_frequency: Vec::new(),
            ln_df: Vec::new(),
            collection_size: 0,
            ln_n: 0.0,
            version: 0,
            idf_scale: 1.0,
        }
    }

    /// Use `log_base(x)` instead of `ln(x)` in the IDF. Every IDF value is
    /// multiplied by the same constant, so cosine similarities do not change.
    pub fn with_log_base(base: f64) -> Result<Self> {
        if !(base > 0.0 && base != 1.0 && base.is_finite()) {
            return Err(Error::InvalidConfig(format!("invalid log base {base}")));
        }
        let mut stats = Self::new();
        stats.idf_scale = 1.0 / base.ln();
        Ok(stats)
    }

    pub fn collection_size(&self) -> u64 {
        self.collection_size
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn term_id(&self, term: &str) -> Option<TermId> {
        self.vocab.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    pub fn doc_frequency(&self, term: &str) -> Option<u64> {
        self.term_id(term).map(|id| self.doc_frequency[id as usize])
    }

    pub fn doc_frequency_id(&self, id: TermId) -> u64 {
        self.doc_frequency[id as usize]
    }

    fn intern(&mut self, term: &str) -> TermId {
        if let Some(&id) = self.vocab.get(term) {
            return id;
        }
        let id = self.terms.len() as TermId;
        self.vocab.insert(term.to_string(), id);
        self.terms.push(term.to_string());
        self.doc_frequency.push(0);
        self.ln_df.push(0.0);
        id
    }

    /// Apply one arriving document: `|C| += 1` and `df(t) += 1` for every
    /// distinct term. Returns the document's term counts.
    pub fn update(&mut self, doc: &Document) -> TermCounts {
        self.update_tokens(&doc.tokens)
    }

    pub fn update_tokens<S: AsRef<str>>(&mut self, tokens: &[S]) -> TermCounts {
        let ids: Vec<TermId> = tokens.iter().map(|t| self.intern(t.as_ref())).collect();
        let counts = TermCounts::from_ids(ids);
        for (id, _) in counts.iter() {
            let df = &mut self.doc_frequency[id as usize];
            *df += 1;
            self.ln_df[id as usize] = (*df as f64).ln();
        }
        self.collection_size += 1;
        self.ln_n = (self.collection_size as f64).ln();
        self.version += 1;
        counts
    }

    /// Term counts for tokens under the current vocabulary, without updating.
    /// Returns `None` if any token is unknown.
    pub fn lookup_counts<S: AsRef<str>>(&self, tokens: &[S]) -> Option<TermCounts> {
        let ids = tokens
            .iter()
            .map(|t| self.term_id(t.as_ref()))
            .collect::<Option<Vec<_>>>()?;
        Some(TermCounts::from_ids(ids))
    }

    /// `log(|C| / df(t))`; unseen terms use `df = 0.5`.
    pub fn idf(&self, term: &str) -> Result<f64> {
        if self.collection_size == 0 {
            return Err(Error::EmptyCollection);
        }
        Ok(match self.term_id(term) {
            Some(id) => self.idf_id(id),
            None => (self.collection_size as f64 / UNSEEN_DF).ln() * self.idf_scale,
        })
    }

    /// IDF of an interned term. Requires a non-empty collection.
    #[inline]
    pub fn idf_id(&self, id: TermId) -> f64 {
        (self.ln_n - self.ln_df[id as usize]) * self.idf_scale
    }

    /// Mean IDF over every distinct term in the dictionary.
    pub fn mean_idf(&self) -> Result<f64> {
        if self.collection_size == 0 {
            return Err(Error::EmptyCollection);
        }
        if self.terms.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        let sum: f64 = (0..self.terms.len() as TermId)
            .map(|id| self.idf_id(id))
            .sum();
        Ok(sum / self.terms.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdfTracePoint {
    pub position: u64,
    pub mean_idf: f64,
}

/// Feed a stream through fresh statistics and sample the mean IDF after every
/// `every`-th document.
pub fn trace_idf(docs: &[Document], every: u64) -> Result<Vec<IdfTracePoint>> {
    if every == 0 {
        return Err(Error::InvalidConfig("trace interval must be ≥ 1".into()));
    }
    let mut stats = TermStatistics::new();
    let mut trace = Vec::new();
    for doc in docs {
        stats.update(doc);
        if stats.collection_size().is_multiple_of(every) {
            trace.push(IdfTracePoint {
                position: stats.collection_size(),
                mean_idf: stats.mean_idf()?,
            });
        }
    }
    Ok(trace)
}
