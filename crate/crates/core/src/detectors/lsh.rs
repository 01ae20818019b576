//! Random-hyperplane LSH over sparse TF.IDF vectors.
//!
//! Hyperplane components are standard normals derived from a counter-based
//! hash of `(seed, table, bit, term)`, so the hyperplanes extend to new
//! vocabulary dimensions as terms appear without storing anything and
//! without depending on the order in which terms were first seen.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::term_stats::TermId;
use crate::vectorize::DocumentVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LshConfig {
    /// Signature bits per table (k), at most 64.
    pub bits: u32,
    /// Number of tables (L).
    pub tables: u32,
    /// Exact-search window of the most recent documents.
    pub window: usize,
    /// A window neighbour at least this similar is accepted without
    /// consulting the tables.
    pub closeness_threshold: f64,
    pub seed: u64,
}

impl Default for LshConfig {
    fn default() -> Self {
        LshConfig {
            bits: 13,
            tables: 70,
            window: 2000,
            closeness_threshold: 0.6,
            seed: 1,
        }
    }
}

impl LshConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=64).contains(&self.bits) {
            return Err(Error::InvalidConfig(format!(
                "lsh bits must be in 1..=64, got {}",
                self.bits
            )));
        }
        if self.tables == 0 {
            return Err(Error::InvalidConfig("lsh tables must be ≥ 1".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be ≥ 1".into()));
        }
        if !(0.0..=1.0).contains(&self.closeness_threshold) {
            return Err(Error::InvalidConfig(format!(
                "closeness threshold must lie in [0, 1], got {}",
                self.closeness_threshold
            )));
        }
        Ok(())
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in (0, 1].
#[inline]
fn unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct Hyperplanes {
    bits: u32,
    seed: u64,
}

impl Hyperplanes {
    pub fn new(bits: u32, seed: u64) -> Self {
        assert!((1..=64).contains(&bits));
        Hyperplanes { bits, seed }
    }

    pub fn from_config(config: &LshConfig) -> Self {
        Self::new(config.bits, config.seed)
    }

    /// Component of hyperplane `bit` of `table` along dimension `term`.
    #[inline]
    pub fn component(&self, table: u32, bit: u32, term: TermId) -> f64 {
        let key = splitmix64(self.seed ^ splitmix64(((table as u64) << 32) | bit as u64));
        let h1 = splitmix64(key ^ (term as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
        let h2 = splitmix64(h1);
        // Box–Muller
        (-2.0 * unit(h1).ln()).sqrt() * (std::f64::consts::TAU * unit(h2)).cos()
    }

    /// Signature of a sparse vector in one table. Bit `j` is set when the
    /// projection onto hyperplane `j` is non-negative.
    pub fn signature<I>(&self, table: u32, weights: I) -> u64
    where
        I: IntoIterator<Item = (TermId, f64)> + Clone,
    {
        let mut sig = 0u64;
        for bit in 0..self.bits {
            let dot: f64 = weights
                .clone()
                .into_iter()
                .map(|(t, w)| w * self.component(table, bit, t))
                .sum();
            if dot >= 0.0 {
                sig |= 1 << bit;
            }
        }
        sig
    }
}

/// Signature of a document vector's arrival weights in `table`.
pub fn lsh_signature(vec: &DocumentVector, table: u32, config: &LshConfig) -> u64 {
    Hyperplanes::from_config(config).signature(table, vec.weights())
}

/// Hash tables keyed by signature; values are history indices.
#[derive(Debug, Clone)]
pub(crate) struct LshTables {
    planes: Hyperplanes,
    tables: Vec<HashMap<u64, Vec<u32>>>,
}

impl LshTables {
    pub fn new(config: &LshConfig) -> Self {
        LshTables {
            planes: Hyperplanes::from_config(config),
            tables: vec![HashMap::new(); config.tables as usize],
        }
    }

    pub fn signatures(&self, vec: &DocumentVector) -> Vec<u64> {
        (0..self.tables.len() as u32)
            .map(|t| self.planes.signature(t, vec.weights()))
            .collect()
    }

    pub fn insert(&mut self, idx: u32, sigs: &[u64]) {
        for (table, sig) in self.tables.iter_mut().zip(sigs) {
            table.entry(*sig).or_default().push(idx);
        }
    }

    /// Every indexed entry colliding with `sigs` in at least one table.
    pub fn colliding<'a>(&'a self, sigs: &'a [u64]) -> impl Iterator<Item = u32> + 'a {
        self.tables
            .iter()
            .zip(sigs)
            .filter_map(|(table, sig)| table.get(sig))
            .flat_map(|bucket| bucket.iter().copied())
    }
}
