use std::ops::Range;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::term_stats::TermId;
use crate::term_stats::TermStatistics;
use crate::vectorize::{similarity_acc, Accumulator, DocumentVector, NormPolicy, OldView};

use super::lsh::LshTables;
use super::{DetectorConfig, Hit, NoveltyRecord, Strategy};

/// `(older document, its position) -> (raw similarity, bias factor)`
type ScoreFn<'a> = dyn Fn(OldView<'_>, u64) -> Option<(f64, f64)> + Sync + 'a;

/// Visit stamps used to deduplicate candidate indices without clearing.
#[derive(Debug, Default, Clone)]
struct Marks {
    stamp: Vec<u32>,
    epoch: u32,
}

impl Marks {
    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    #[inline]
    fn visit(&mut self, idx: usize) -> bool {
        if self.stamp[idx] == self.epoch {
            false
        } else {
            self.stamp[idx] = self.epoch;
            true
        }
    }
}

/// History term ids and TF factors in contiguous storage, for scanning.
#[derive(Debug, Clone)]
struct Arena {
    offsets: Vec<usize>,
    terms: Vec<TermId>,
    tf: Vec<f64>,
    frozen: Vec<f64>,
}

impl Default for Arena {
    fn default() -> Self {
        Arena {
            offsets: vec![0],
            terms: Vec::new(),
            tf: Vec::new(),
            frozen: Vec::new(),
        }
    }
}

impl Arena {
    fn push(&mut self, vec: &DocumentVector) {
        let v = vec.view();
        self.terms.extend_from_slice(v.terms);
        self.tf.extend_from_slice(v.tf);
        self.frozen.push(v.frozen_norm);
        self.offsets.push(self.terms.len());
    }

    #[inline]
    fn view(&self, k: usize) -> OldView<'_> {
        let r = self.offsets[k]..self.offsets[k + 1];
        OldView {
            terms: &self.terms[r.clone()],
            tf: &self.tf[r],
            frozen_norm: self.frozen[k],
        }
    }
}

/// Streaming detector. Feed documents in stream order with [`Detector::process`].
///
/// Exact strategies only score documents that share a term with the arrival
/// (others have similarity 0), falling back to the earliest scorable document
/// when nothing scores above 0. That gives the same record as scanning the
/// whole history.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectorConfig,
    stats: TermStatistics,
    history: Vec<DocumentVector>,
    arena: Arena,
    acc: Accumulator,
    // term id -> ascending history indices
    postings: Vec<Vec<u32>>,
    marks: Marks,
    lsh: Option<LshTables>,
}

impl Detector {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        Self::with_statistics(config, TermStatistics::new())
    }

    /// Start from the given (usually empty) statistics, e.g. one built with
    /// a non-natural log base.
    pub fn with_statistics(config: DetectorConfig, stats: TermStatistics) -> Result<Self> {
        config.validate()?;
        let lsh = match &config.strategy {
            Strategy::Lsh { lsh, .. } => Some(LshTables::new(lsh)),
            _ => None,
        };
        Ok(Detector {
            config,
            stats,
            history: Vec::new(),
            arena: Arena::default(),
            acc: Accumulator::default(),
            postings: Vec::new(),
            marks: Marks::default(),
            lsh,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn stats(&self) -> &TermStatistics {
        &self.stats
    }

    pub fn history(&self) -> &[DocumentVector] {
        &self.history
    }

    pub fn process(&mut self, doc: &Document) -> Result<NoveltyRecord> {
        self.step(doc, false).map(|(rec, _)| rec)
    }

    /// Like [`Detector::process`], also returning the positions of every
    /// document the strategy considered as a candidate.
    pub fn process_traced(&mut self, doc: &Document) -> Result<(NoveltyRecord, Vec<u64>)> {
        self.step(doc, true)
    }

    fn step(&mut self, doc: &Document, trace: bool) -> Result<(NoveltyRecord, Vec<u64>)> {
        let expected = self.history.len() as u64 + 1;
        if doc.position != expected {
            return Err(Error::InvalidPositions(format!(
                "document `{}` has position {}, expected {}",
                doc.id, doc.position, expected
            )));
        }
        if doc.tokens.is_empty() {
            return Err(Error::EmptyDocument(doc.id.clone()));
        }
        let counts = self.stats.update(doc);
        let vec = DocumentVector::from_counts(
            doc.id.clone(),
            doc.position,
            &counts,
            &self.stats,
            self.config.tf,
        );
        let sigs = self.lsh.as_ref().map(|t| t.signatures(&vec));

        let (record, candidates) = if self.history.is_empty() {
            (NoveltyRecord::first(&vec), Vec::new())
        } else if vec.is_zero() {
            (NoveltyRecord::zero(&vec), Vec::new())
        } else {
            self.acc.load(&vec, &self.stats);
            let scored = self.score(&vec, sigs.as_deref(), trace);
            self.acc.clear(&vec);
            scored
        };

        let idx = self.history.len() as u32;
        if self.postings.len() < self.stats.vocabulary_size() {
            self.postings
                .resize_with(self.stats.vocabulary_size(), Vec::new);
        }
        for &t in vec.terms() {
            self.postings[t as usize].push(idx);
        }
        if let (Some(tables), Some(sigs)) = (self.lsh.as_mut(), sigs.as_ref()) {
            tables.insert(idx, sigs);
        }
        self.marks.stamp.push(0);
        self.arena.push(&vec);
        self.history.push(vec);
        Ok((record, candidates))
    }

    fn score(
        &mut self,
        vec: &DocumentVector,
        sigs: Option<&[u64]>,
        trace: bool,
    ) -> (NoveltyRecord, Vec<u64>) {
        let Detector {
            config,
            stats,
            history,
            arena,
            acc,
            postings,
            marks,
            lsh: tables,
        } = self;
        let acc: &Accumulator = acc;
        let stats: &TermStatistics = stats;
        let index = Index {
            history,
            arena,
            postings,
            exec: config.exec,
        };
        let len = history.len();
        let positions = |r: Range<usize>| -> Vec<u64> {
            if trace {
                (r.start as u64 + 1..=r.end as u64).collect()
            } else {
                Vec::new()
            }
        };

        match &config.strategy {
            Strategy::Exhaustive { norms } => {
                let norms = *norms;
                let score = |old: OldView<'_>, _| {
                    similarity_acc(vec, acc, old, stats, norms).map(|s| (s, 1.0))
                };
                let best = index.best_in_range(marks, vec, 0..len, &score);
                (index.finish(vec, best, false), positions(0..len))
            }
            Strategy::Optimized { bias } => {
                let n = vec.position;
                let score = |old: OldView<'_>, i: u64| {
                    similarity_acc(vec, acc, old, stats, NormPolicy::Fresh)
                        .map(|s| (s, bias.factor(s, n, i)))
                };
                let best = index.best_in_range(marks, vec, 0..len, &score);
                (index.finish(vec, best, false), positions(0..len))
            }
            Strategy::Recency { window } => {
                let occupancy = (*window).min(len);
                let start = len - occupancy;
                let score = |old: OldView<'_>, i: u64| {
                    // 1-based slot, oldest first
                    let slot = i as usize - start;
                    similarity_acc(vec, acc, old, stats, NormPolicy::Fresh)
                        .map(|s| (s, slot as f64 / occupancy as f64))
                };
                let best = index.best_in_range(marks, vec, start..len, &score);
                (index.finish(vec, best, false), positions(start..len))
            }
            Strategy::Lsh { lsh, norms } => {
                let norms = *norms;
                let start = len - lsh.window.min(len);
                let score = |old: OldView<'_>, _| {
                    similarity_acc(vec, acc, old, stats, norms).map(|s| (s, 1.0))
                };
                let in_window = index.best_in_range(marks, vec, start..len, &score);
                if matches!(in_window, Some(h) if h.raw >= lsh.closeness_threshold) {
                    return (index.finish(vec, in_window, true), positions(start..len));
                }

                marks.next_epoch();
                let mut extra = Vec::new();
                if let (Some(tables), Some(sigs)) = (tables.as_ref(), sigs) {
                    for idx in tables.colliding(sigs) {
                        let idx = idx as usize;
                        if idx < start && marks.visit(idx) {
                            extra.push(idx);
                        }
                    }
                }
                let from_tables = index.best_among(&extra, &score);
                let best = match (in_window, from_tables) {
                    (Some(a), Some(b)) => Some(Hit::better(a, b)),
                    (a, b) => a.or(b),
                };
                let mut cands = positions(start..len);
                if trace {
                    cands.extend(extra.iter().map(|&i| i as u64 + 1));
                    cands.sort_unstable();
                }
                (index.finish(vec, best, false), cands)
            }
        }
    }
}

struct Index<'a> {
    history: &'a [DocumentVector],
    arena: &'a Arena,
    postings: &'a [Vec<u32>],
    exec: Exec,
}

impl Index<'_> {
    fn hit(&self, k: usize, score: &ScoreFn<'_>) -> Option<Hit> {
        let position = k as u64 + 1;
        score(self.arena.view(k), position).map(|(raw, factor)| Hit {
            idx: k,
            position,
            raw,
            factor,
            score: raw * factor,
        })
    }

    fn finish(&self, vec: &DocumentVector, best: Option<Hit>, early_stop: bool) -> NoveltyRecord {
        match best {
            Some(hit) => NoveltyRecord {
                early_stop,
                ..NoveltyRecord::from_hit(vec, hit, &self.history[hit.idx].doc_id)
            },
            None => NoveltyRecord::first(vec),
        }
    }

    fn best_among(&self, idxs: &[usize], score: &ScoreFn<'_>) -> Option<Hit> {
        self.exec
            .map_reduce(idxs, |&k| self.hit(k, score), Hit::better)
    }

    /// Best hit over `range`, scoring only documents that share a term.
    /// When the postings are dense the whole range is scanned instead.
    fn best_in_range(
        &self,
        marks: &mut Marks,
        vec: &DocumentVector,
        range: Range<usize>,
        score: &ScoreFn<'_>,
    ) -> Option<Hit> {
        let lists: Vec<&[u32]> = vec
            .terms()
            .iter()
            .filter_map(|&t| self.postings.get(t as usize))
            .map(|list| &list[list.partition_point(|&i| (i as usize) < range.start)..])
            .collect();
        let volume: usize = lists.iter().map(|l| l.len()).sum();
        if volume >= range.len() {
            return self.exec.map_reduce_range(
                range.len(),
                |k| self.hit(range.start + k, score),
                Hit::better,
            );
        }

        marks.next_epoch();
        let mut cands = Vec::new();
        for list in lists {
            for &i in list {
                let i = i as usize;
                if i >= range.end {
                    break;
                }
                if marks.visit(i) {
                    cands.push(i);
                }
            }
        }
        match self.best_among(&cands, score) {
            Some(hit) if hit.score > 0.0 => Some(hit),
            // Everything scores 0: the earliest scorable document wins the tie.
            _ => range.clone().find_map(|k| self.hit(k, score)),
        }
    }
}
