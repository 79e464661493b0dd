//! Anonymity sets and the trackability metrics computed over them.
//!
//! An anonymity set is a group of platforms sharing one fingerprint. All
//! metrics here depend only on the multiset of set sizes, and each one
//! reduces those sizes in ascending order so that two distributions with
//! the same sizes always produce bit-identical results.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpmodel::Fingerprint;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnonymitySetDistribution {
    pub sets: HashMap<Fingerprint, usize>,
    pub total: usize,
}

impl AnonymitySetDistribution {
    /// Set sizes in ascending order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.sets.values().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn set_count(&self) -> usize {
        self.sets.len()
    }
}

pub fn anonymity_sets<'a, I>(fps: I) -> AnonymitySetDistribution
where
    I: IntoIterator<Item = &'a Fingerprint>,
{
    let mut dist = AnonymitySetDistribution::default();
    for fp in fps {
        match dist.sets.get_mut(fp) {
            Some(c) => *c += 1,
            None => {
                dist.sets.insert(fp.clone(), 1);
            }
        }
        dist.total += 1;
    }
    dist
}

/// Plug-in Shannon entropy in bits of a distribution given by its set
/// sizes, in any order. Summed over ascending sizes, so permutations give
/// bit-identical results.
pub fn entropy_of_sizes(sizes: &[usize]) -> Result<f64> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return Err(Error::Domain("entropy of an empty distribution".into()));
    }
    if sizes.iter().filter(|&&c| c > 0).count() == 1 {
        return Ok(0.0);
    }
    let n = total as f64;
    let sum: f64 = sizes
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum();
    Ok((-sum).clamp(0.0, n.log2()))
}

pub fn entropy(dist: &AnonymitySetDistribution) -> Result<f64> {
    entropy_of_sizes(&dist.sizes())
}

/// Fraction of platforms in anonymity sets of size at most `k`.
pub fn pct_le_of_sizes(sizes: &[usize], k: usize) -> Result<f64> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return Err(Error::Domain("pct_le of an empty distribution".into()));
    }
    if k == 0 {
        return Err(Error::Domain("pct_le threshold must be positive".into()));
    }
    let small: usize = sizes.iter().filter(|&&c| c <= k).sum();
    Ok(small as f64 / total as f64)
}

pub fn pct_le(dist: &AnonymitySetDistribution, k: usize) -> Result<f64> {
    pct_le_of_sizes(&dist.sizes(), k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackabilityReport {
    pub n: usize,
    pub entropy_bits: f64,
    pub pct_le_1: f64,
    pub pct_le_10: f64,
}

impl TrackabilityReport {
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        Ok(TrackabilityReport {
            n: sizes.iter().sum(),
            entropy_bits: entropy_of_sizes(sizes)?,
            pct_le_1: pct_le_of_sizes(sizes, 1)?,
            pct_le_10: pct_le_of_sizes(sizes, 10)?,
        })
    }

    pub fn from_distribution(dist: &AnonymitySetDistribution) -> Result<Self> {
        Self::from_sizes(&dist.sizes())
    }

    pub fn of<'a, I>(fps: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Fingerprint>,
    {
        Self::from_distribution(&anonymity_sets(fps))
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Entropy => self.entropy_bits,
            Metric::PctLe1 => self.pct_le_1,
            Metric::PctLe10 => self.pct_le_10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Entropy,
    #[serde(rename = "pct_le_1")]
    PctLe1,
    #[serde(rename = "pct_le_10")]
    PctLe10,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Entropy, Metric::PctLe1, Metric::PctLe10];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Entropy => "entropy",
            Metric::PctLe1 => "pct_le_1",
            Metric::PctLe10 => "pct_le_10",
        }
    }
}

/// Metric without the tool minus metric with it; positive values mean the
/// tool makes platforms harder to track.
pub fn effectiveness<'a, 'b, A, B>(metric: Metric, without: A, with: B) -> Result<f64>
where
    A: IntoIterator<Item = &'a Fingerprint>,
    B: IntoIterator<Item = &'b Fingerprint>,
{
    let before = TrackabilityReport::of(without)?;
    let after = TrackabilityReport::of(with)?;
    Ok(before.get(metric) - after.get(metric))
}
