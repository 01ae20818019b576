//! TF.IDF document vectors and cosine similarity under two norm policies.
//!
//! A [`DocumentVector`] keeps the weights computed at arrival together with
//! the raw term frequencies, so that weights under later statistics can be
//! recomputed on demand. Its `frozen_norm` is the Euclidean length at arrival
//! and is never refreshed.
//!
//! [`cosine`] always uses current-statistics weights in the dot product. The
//! policy only decides which length normalizes the older document:
//!
//! * [`NormPolicy::Fresh`] recomputes it from the current statistics,
//! * [`NormPolicy::Frozen`] reuses the arrival-time length.
//!
//! IDF values drift upwards as the collection grows, so an old document's
//! frozen length is usually shorter than its fresh one and frozen-policy
//! similarities to old documents come out inflated (they may exceed 1).

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::term_stats::{TermCounts, TermId, TermStatistics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormPolicy {
    #[default]
    Fresh,
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TfScheme {
    /// Raw within-document count.
    #[default]
    Raw,
    /// `1 + ln(count)`.
    Sublinear,
}

impl TfScheme {
    #[inline]
    pub fn weight(self, count: u32) -> f64 {
        match self {
            TfScheme::Raw => count as f64,
            TfScheme::Sublinear => 1.0 + (count as f64).ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentVector {
    pub doc_id: String,
    pub position: u64,
    // Parallel arrays sorted by term id.
    terms: Vec<TermId>,
    counts: Vec<u32>,
    tf: Vec<f64>,
    weights: Vec<f64>,
    frozen_norm: f64,
}

impl DocumentVector {
    /// Build from term counts against the given statistics. The result may
    /// be a zero vector; see [`build_vector`] for the checked constructor.
    pub fn from_counts(
        doc_id: impl Into<String>,
        position: u64,
        counts: &TermCounts,
        stats: &TermStatistics,
        scheme: TfScheme,
    ) -> Self {
        let n = counts.len();
        let mut terms = Vec::with_capacity(n);
        let mut raw = Vec::with_capacity(n);
        let mut tf = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (id, c) in counts.iter() {
            let t = scheme.weight(c);
            terms.push(id);
            raw.push(c);
            tf.push(t);
            weights.push(t * stats.idf_id(id));
        }
        let frozen_norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        DocumentVector {
            doc_id: doc_id.into(),
            position,
            terms,
            counts: raw,
            tf,
            weights,
            frozen_norm,
        }
    }

    pub fn frozen_norm(&self) -> f64 {
        self.frozen_norm
    }

    pub fn is_zero(&self) -> bool {
        self.frozen_norm == 0.0
    }

    pub fn terms(&self) -> &[TermId] {
        &self.terms
    }

    /// `(term, tf × idf)` at arrival time.
    pub fn weights(&self) -> impl Iterator<Item = (TermId, f64)> + Clone + '_ {
        self.terms.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn term_frequencies(&self) -> impl Iterator<Item = (TermId, u32)> + '_ {
        self.terms.iter().copied().zip(self.counts.iter().copied())
    }

    pub fn weight(&self, term: TermId) -> Option<f64> {
        self.terms
            .binary_search(&term)
            .ok()
            .map(|i| self.weights[i])
    }

    /// Weights recomputed from the retained term frequencies under `stats`.
    pub fn fresh_weights(&self, stats: &TermStatistics) -> Vec<(TermId, f64)> {
        self.terms
            .iter()
            .zip(&self.tf)
            .map(|(&id, &tf)| (id, tf * stats.idf_id(id)))
            .collect()
    }

    pub fn fresh_norm(&self, stats: &TermStatistics) -> f64 {
        self.view().fresh_norm(stats)
    }

    /// Length of this vector when it plays the older side of a comparison.
    #[inline]
    pub fn norm_under(&self, stats: &TermStatistics, policy: NormPolicy) -> f64 {
        match policy {
            NormPolicy::Fresh => self.fresh_norm(stats),
            NormPolicy::Frozen => self.frozen_norm,
        }
    }

    /// Borrowed view of the parts needed when this vector is the older side.
    #[inline]
    pub(crate) fn view(&self) -> OldView<'_> {
        OldView {
            terms: &self.terms,
            tf: &self.tf,
            frozen_norm: self.frozen_norm,
        }
    }
}

/// Term ids, TF factors and arrival norm of an earlier document.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OldView<'a> {
    pub terms: &'a [TermId],
    pub tf: &'a [f64],
    pub frozen_norm: f64,
}

impl OldView<'_> {
    #[inline]
    fn fresh_norm(&self, stats: &TermStatistics) -> f64 {
        self.terms
            .iter()
            .zip(self.tf)
            .map(|(&id, &tf)| {
                let w = tf * stats.idf_id(id);
                w * w
            })
            .sum::<f64>()
            .sqrt()
    }

    #[inline]
    fn norm_under(&self, stats: &TermStatistics, policy: NormPolicy) -> f64 {
        match policy {
            NormPolicy::Fresh => self.fresh_norm(stats),
            NormPolicy::Frozen => self.frozen_norm,
        }
    }
}

/// Dot product of `new`'s arrival weights with `old`'s weights under `stats`.
#[inline]
fn dot_current(new: &DocumentVector, old: OldView<'_>, stats: &TermStatistics) -> f64 {
    let (a, b) = (&new.terms, old.terms);
    let (mut i, mut j) = (0, 0);
    let mut dot = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += new.weights[i] * old.tf[j] * stats.idf_id(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    dot
}

/// Dense scatter of one arriving vector, indexed by term id. Each slot holds
/// `(arrival weight, current idf)` for the arrival's terms and zeros
/// elsewhere, so a dot product with an older document is a branch-free pass
/// over that document's terms. Products and summation order match
/// [`dot_current`], so results are bit-identical.
#[derive(Debug, Clone, Default)]
pub(crate) struct Accumulator {
    slots: Vec<[f64; 2]>,
}

impl Accumulator {
    pub fn load(&mut self, new: &DocumentVector, stats: &TermStatistics) {
        if self.slots.len() < stats.vocabulary_size() {
            self.slots.resize(stats.vocabulary_size(), [0.0; 2]);
        }
        for (i, &t) in new.terms.iter().enumerate() {
            self.slots[t as usize] = [new.weights[i], stats.idf_id(t)];
        }
    }

    pub fn clear(&mut self, new: &DocumentVector) {
        for &t in &new.terms {
            self.slots[t as usize] = [0.0; 2];
        }
    }

    #[inline]
    fn dot(&self, old: OldView<'_>) -> f64 {
        old.terms
            .iter()
            .zip(old.tf)
            .map(|(&t, &tf)| {
                let [w, idf] = self.slots[t as usize];
                w * tf * idf
            })
            .fold(0.0, |acc, x| acc + x)
    }
}

/// [`similarity_view`] with the arrival pre-loaded into `acc`.
#[inline]
pub(crate) fn similarity_acc(
    new_vec: &DocumentVector,
    acc: &Accumulator,
    old: OldView<'_>,
    stats: &TermStatistics,
    policy: NormPolicy,
) -> Option<f64> {
    let new_norm = new_vec.frozen_norm;
    if new_norm == 0.0 {
        return None;
    }
    let old_norm = old.norm_under(stats, policy);
    if old_norm == 0.0 {
        return None;
    }
    Some(acc.dot(old) / (new_norm * old_norm))
}

/// Build the vector of a document that has already been applied to `stats`.
pub fn build_vector(
    doc: &Document,
    stats: &TermStatistics,
    scheme: TfScheme,
) -> Result<DocumentVector> {
    if doc.tokens.is_empty() {
        return Err(Error::EmptyDocument(doc.id.clone()));
    }
    let counts = stats
        .lookup_counts(&doc.tokens)
        .ok_or_else(|| Error::NotApplied(doc.id.clone()))?;
    let vec = DocumentVector::from_counts(doc.id.clone(), doc.position, &counts, stats, scheme);
    if vec.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(vec)
}

/// Similarity, or `None` when either side has zero length.
#[inline]
pub(crate) fn similarity(
    new_vec: &DocumentVector,
    old_vec: &DocumentVector,
    stats: &TermStatistics,
    policy: NormPolicy,
) -> Option<f64> {
    similarity_view(new_vec, old_vec.view(), stats, policy)
}

#[inline]
pub(crate) fn similarity_view(
    new_vec: &DocumentVector,
    old: OldView<'_>,
    stats: &TermStatistics,
    policy: NormPolicy,
) -> Option<f64> {
    let new_norm = new_vec.frozen_norm;
    if new_norm == 0.0 {
        return None;
    }
    let old_norm = old.norm_under(stats, policy);
    if old_norm == 0.0 {
        return None;
    }
    Some(dot_current(new_vec, old, stats) / (new_norm * old_norm))
}

/// Cosine similarity between a newly arrived vector and an older one.
pub fn cosine(
    new_vec: &DocumentVector,
    old_vec: &DocumentVector,
    stats: &TermStatistics,
    policy: NormPolicy,
) -> Result<f64> {
    similarity(new_vec, old_vec, stats, policy).ok_or(Error::ZeroVector)
}
