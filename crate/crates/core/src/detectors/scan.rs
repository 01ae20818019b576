//! Scoring rules evaluated over an explicit slice of earlier vectors.

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::term_stats::TermStatistics;
use crate::vectorize::{similarity, DocumentVector, NormPolicy};

use super::{BiasParams, Hit, NoveltyRecord};

fn finish(
    new_vec: &DocumentVector,
    history: &[DocumentVector],
    best: Option<Hit>,
) -> NoveltyRecord {
    match best {
        Some(hit) => NoveltyRecord::from_hit(new_vec, hit, &history[hit.idx].doc_id),
        None => NoveltyRecord::first(new_vec),
    }
}

fn best_hit<F>(exec: Exec, history: &[DocumentVector], score: F) -> Option<Hit>
where
    F: Fn(usize, &DocumentVector) -> Option<(f64, f64)> + Sync + Send,
{
    exec.map_reduce_range(
        history.len(),
        |k| {
            let old = &history[k];
            score(k, old).map(|(raw, factor)| Hit {
                idx: k,
                position: old.position,
                raw,
                factor,
                score: raw * factor,
            })
        },
        Hit::better,
    )
}

/// Distance to the most similar earlier document.
pub fn exhaustive_novelty(
    new_vec: &DocumentVector,
    history: &[DocumentVector],
    stats: &TermStatistics,
    policy: NormPolicy,
) -> NoveltyRecord {
    exhaustive_novelty_with(Exec::default(), new_vec, history, stats, policy)
}

pub fn exhaustive_novelty_with(
    exec: Exec,
    new_vec: &DocumentVector,
    history: &[DocumentVector],
    stats: &TermStatistics,
    policy: NormPolicy,
) -> NoveltyRecord {
    if history.is_empty() {
        return NoveltyRecord::first(new_vec);
    }
    if new_vec.is_zero() {
        return NoveltyRecord::zero(new_vec);
    }
    let best = best_hit(exec, history, |_, old| {
        similarity(new_vec, old, stats, policy).map(|s| (s, 1.0))
    });
    finish(new_vec, history, best)
}

/// Recency-damped novelty over a window ordered oldest first. The slot at
/// 1-based index `i` has its similarity scaled by `i / |window|`, so the most
/// recent document is undamped. Fresh norms only.
pub fn recency_novelty(
    new_vec: &DocumentVector,
    window: &[DocumentVector],
    stats: &TermStatistics,
) -> NoveltyRecord {
    recency_novelty_with(Exec::default(), new_vec, window, stats)
}

pub fn recency_novelty_with(
    exec: Exec,
    new_vec: &DocumentVector,
    window: &[DocumentVector],
    stats: &TermStatistics,
) -> NoveltyRecord {
    if window.is_empty() {
        return NoveltyRecord::first(new_vec);
    }
    if new_vec.is_zero() {
        return NoveltyRecord::zero(new_vec);
    }
    let len = window.len() as f64;
    let best = best_hit(exec, window, |k, old| {
        similarity(new_vec, old, stats, NormPolicy::Fresh).map(|s| (s, (k + 1) as f64 / len))
    });
    finish(new_vec, window, best)
}

/// Novelty with the logarithmic distance bias over fresh norms. The best
/// candidate is chosen on the biased product.
pub fn optimized_novelty(
    new_vec: &DocumentVector,
    history: &[DocumentVector],
    stats: &TermStatistics,
    params: &BiasParams,
) -> Result<NoveltyRecord> {
    optimized_novelty_with(Exec::default(), new_vec, history, stats, params)
}

pub fn optimized_novelty_with(
    exec: Exec,
    new_vec: &DocumentVector,
    history: &[DocumentVector],
    stats: &TermStatistics,
    params: &BiasParams,
) -> Result<NoveltyRecord> {
    params.validate()?;
    let n = new_vec.position;
    if let Some(bad) = history
        .iter()
        .find(|old| old.position == 0 || old.position >= n)
    {
        return Err(Error::InvalidPositions(format!(
            "history position {} is not before {}",
            bad.position, n
        )));
    }
    if history.is_empty() {
        return Ok(NoveltyRecord::first(new_vec));
    }
    if new_vec.is_zero() {
        return Ok(NoveltyRecord::zero(new_vec));
    }
    let best = best_hit(exec, history, |_, old| {
        similarity(new_vec, old, stats, NormPolicy::Fresh)
            .map(|s| (s, params.factor(s, n, old.position)))
    });
    Ok(finish(new_vec, history, best))
}
