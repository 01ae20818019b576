//! Seeded synthetic streams for experiments and tests.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::eval::GroundTruth;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfConfig {
    pub docs: usize,
    pub vocabulary: u64,
    pub exponent: f64,
    pub doc_len: usize,
    pub seed: u64,
}

impl Default for ZipfConfig {
    fn default() -> Self {
        ZipfConfig {
            docs: 10_000,
            vocabulary: 200_000,
            exponent: 1.1,
            doc_len: 12,
            seed: 1,
        }
    }
}

fn doc(position: usize, tokens: Vec<String>, topic: Option<String>) -> Document {
    Document {
        id: format!("s{position:07}"),
        position: position as u64,
        timestamp: position as i64 * 1000,
        tokens,
        topic,
    }
}

/// Documents whose tokens are drawn i.i.d. from a Zipf law over `vocabulary`
/// ranks. The long tail keeps introducing unseen terms.
pub fn zipf_stream(cfg: &ZipfConfig) -> Result<Vec<Document>> {
    let zipf = Zipf::new(cfg.vocabulary, cfg.exponent)
        .map_err(|e| Error::InvalidConfig(format!("zipf: {e}")))?;
    if cfg.doc_len == 0 {
        return Err(Error::InvalidConfig("doc_len must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok((1..=cfg.docs)
        .map(|p| {
            let tokens = (0..cfg.doc_len)
                .map(|_| format!("w{}", zipf.sample(&mut rng) as u64))
                .collect();
            doc(p, tokens, None)
        })
        .collect())
}

/// Parameters of a corpus with planted topics.
///
/// Every document mixes `background_terms` Zipf-distributed common words with
/// `fresh_terms` words never used before, so the vocabulary keeps growing.
/// A topic owns `topic_vocab` private words; each on-topic document carries
/// `topic_terms` of them. Shortly before each first story a related off-topic
/// document (sharing topic words) appears, so first stories have a close but
/// recent neighbour. Follow-ups arrive at least `min_gap` positions after
/// their first story.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub topics: usize,
    pub length: usize,
    pub follow_ups: usize,
    pub min_gap: usize,
    /// First stories are placed in `[first_from, first_until]`.
    pub first_from: usize,
    pub first_until: usize,
    pub topic_vocab: usize,
    pub topic_terms: usize,
    pub background_vocab: u64,
    pub background_exponent: f64,
    pub background_terms: usize,
    pub fresh_terms: usize,
    /// Maximum distance of the related document before a first story; 0
    /// disables related documents.
    pub related_lead: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            topics: 20,
            length: 4000,
            follow_ups: 3,
            min_gap: 1000,
            first_from: 50,
            first_until: 500,
            topic_vocab: 8,
            topic_terms: 5,
            background_vocab: 5000,
            background_exponent: 1.0,
            background_terms: 4,
            fresh_terms: 2,
            related_lead: 3,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub docs: Vec<Document>,
    pub truth: GroundTruth,
}

enum Slot {
    Noise,
    Related(usize),
    OnTopic(usize),
}

pub fn planted_corpus(cfg: &PlantedConfig) -> Result<PlantedCorpus> {
    if cfg.topics == 0 || cfg.topic_terms == 0 || cfg.topic_terms > cfg.topic_vocab {
        return Err(Error::InvalidConfig("invalid topic parameters".into()));
    }
    let lo = cfg.first_from.max(cfg.related_lead + 1).max(1);
    let hi = cfg.first_until;
    if hi < lo || hi - lo < 2 * cfg.topics {
        return Err(Error::InvalidConfig("first-story window too narrow".into()));
    }
    if cfg.length < hi + cfg.min_gap + 2 * cfg.follow_ups * cfg.topics {
        return Err(Error::InvalidConfig(
            "stream too short for the requested gaps".into(),
        ));
    }
    let zipf = Zipf::new(cfg.background_vocab, cfg.background_exponent)
        .map_err(|e| Error::InvalidConfig(format!("zipf: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut slots: Vec<Slot> = (0..=cfg.length).map(|_| Slot::Noise).collect();
    let mut taken = vec![false; cfg.length + 1];
    taken[0] = true;
    let free = |taken: &[bool], p: usize| p >= 1 && p <= cfg.length && !taken[p];

    for t in 0..cfg.topics {
        let first = loop {
            let p = rng.gen_range(lo..=hi);
            let lead = if cfg.related_lead > 0 {
                rng.gen_range(1..=cfg.related_lead)
            } else {
                0
            };
            if free(&taken, p) && (lead == 0 || free(&taken, p - lead)) {
                taken[p] = true;
                slots[p] = Slot::OnTopic(t);
                if lead > 0 {
                    taken[p - lead] = true;
                    slots[p - lead] = Slot::Related(t);
                }
                break p;
            }
        };
        let start = first + cfg.min_gap;
        for _ in 0..cfg.follow_ups {
            let p = loop {
                let p = rng.gen_range(start..=cfg.length);
                if free(&taken, p) {
                    break p;
                }
            };
            taken[p] = true;
            slots[p] = Slot::OnTopic(t);
        }
    }

    let topic_words: Vec<Vec<String>> = (0..cfg.topics)
        .map(|t| {
            (0..cfg.topic_vocab)
                .map(|k| format!("topic{t}x{k}"))
                .collect()
        })
        .collect();
    let mut fresh = 0u64;
    let mut docs = Vec::with_capacity(cfg.length);
    let mut topics: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (p, slot) in slots.iter().enumerate().skip(1) {
        let mut tokens: Vec<String> = (0..cfg.background_terms)
            .map(|_| format!("b{}", zipf.sample(&mut rng) as u64))
            .collect();
        for _ in 0..cfg.fresh_terms {
            tokens.push(format!("f{fresh}"));
            fresh += 1;
        }
        let label = match slot {
            Slot::Noise => None,
            Slot::Related(t) | Slot::OnTopic(t) => {
                tokens.extend(
                    topic_words[*t]
                        .choose_multiple(&mut rng, cfg.topic_terms)
                        .cloned(),
                );
                matches!(slot, Slot::OnTopic(_)).then(|| format!("topic{t:02}"))
            }
        };
        tokens.shuffle(&mut rng);
        if let Some(l) = &label {
            topics.entry(l.clone()).or_default().push(p as u64);
        }
        docs.push(doc(p, tokens, label));
    }
    Ok(PlantedCorpus {
        docs,
        truth: GroundTruth::new(topics)?,
    })
}
