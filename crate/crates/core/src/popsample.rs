//! Popularity-adjusted evaluation: trackability among a tool's user base,
//! estimated by drawing user-base-sized samples from a larger dataset.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpmodel::Dataset;
use crate::hybrid::{apply_mask, InconclusivePolicy};
use crate::jsonl::read_utf8;
use crate::maskinfer::MaskModel;
use crate::metrics::{Metric, TrackabilityReport};

pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopularityEntry {
    pub pet: String,
    /// `None` when the user count is unknown; such tools are skipped.
    pub users: Option<usize>,
}

/// Reads a `pet,users` csv; `NA` marks an unknown user count.
pub fn parse_popularity(text: &str, location: &str) -> Result<Vec<PopularityEntry>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::format(location, e.to_string()))?;
    if header.iter().ne(["pet", "users"]) {
        return Err(Error::format(location, "expected header `pet,users`"));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let loc = format!("{location}:{}", i + 2);
        let rec = rec.map_err(|e| Error::format(loc.clone(), e.to_string()))?;
        let users = match &rec[1] {
            "NA" => None,
            s => match s.parse::<usize>() {
                Ok(n) if n > 0 => Some(n),
                _ => {
                    return Err(Error::format(
                        loc,
                        format!("users must be a positive integer or NA, got `{s}`"),
                    ))
                }
            },
        };
        out.push(PopularityEntry {
            pet: rec[0].to_owned(),
            users,
        });
    }
    Ok(out)
}

pub fn load_popularity(path: &Path) -> Result<Vec<PopularityEntry>> {
    parse_popularity(&read_utf8(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub mean: f64,
    pub sem: f64,
}

impl MeanSem {
    /// Mean and standard error (n−1 standard deviation over √n).
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let first = values[0];
        let mean = first + values.iter().map(|x| x - first).sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        MeanSem {
            mean,
            sem: var.sqrt() / n.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledEstimate {
    pub metrics: BTreeMap<Metric, MeanSem>,
    pub samples: usize,
    pub sample_size: usize,
    pub seed: u64,
}

impl SampledEstimate {
    pub fn mean(&self, m: Metric) -> f64 {
        self.metrics[&m].mean
    }

    pub fn sem(&self, m: Metric) -> f64 {
        self.metrics[&m].sem
    }
}

/// Generator for iteration `i`: the seed picks the key, the iteration the
/// stream, so iterations are independent and order-free.
fn iteration_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Record indices drawn without replacement for iteration `i`.
pub fn sample_indices(n: usize, users: usize, seed: u64, i: usize) -> Vec<usize> {
    rand::seq::index::sample(&mut iteration_rng(seed, i), n, users).into_vec()
}

pub fn popularity_evaluate(
    d: &Dataset,
    m: &MaskModel,
    policy: InconclusivePolicy,
    users: usize,
    samples: usize,
    seed: u64,
) -> Result<SampledEstimate> {
    if users == 0 {
        return Err(Error::Domain("user count must be positive".into()));
    }
    if users > d.len() {
        return Err(Error::SampleTooLarge {
            users,
            available: d.len(),
        });
    }
    if samples < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 samples for a standard error, got {samples}"
        )));
    }
    let masked = apply_mask(d, m, policy)?;
    let reports: Vec<TrackabilityReport> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let idx = sample_indices(masked.len(), users, seed, i);
            TrackabilityReport::of(idx.iter().map(|&j| &masked.records[j].fingerprint))
        })
        .collect::<Result<_>>()?;
    let metrics = Metric::ALL
        .iter()
        .map(|&k| {
            let values: Vec<f64> = reports.iter().map(|r| r.get(k)).collect();
            (k, MeanSem::of(&values))
        })
        .collect();
    Ok(SampledEstimate {
        metrics,
        samples,
        sample_size: users,
        seed,
    })
}
