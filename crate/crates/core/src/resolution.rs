//! Tor-style screen-resolution spoofing: the window rounding function,
//! utility loss, exhaustive cap/quanta sweeps and Pareto comparison.

use std::collections::HashMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpmodel::{
    AttributeName, AttributeValue, Dataset, Fingerprint, SCREEN_AVAIL_HEIGHT, SCREEN_AVAIL_LEFT, SCREEN_AVAIL_TOP,
    SCREEN_AVAIL_WIDTH, SCREEN_HEIGHT, SCREEN_WIDTH,
};
use crate::hybrid::{apply_mask, InconclusivePolicy};
use crate::maskinfer::{MaskModel, ValueTransform, VerdictStatus};
use crate::metrics::TrackabilityReport;

const TOR_MODEL_JSON: &str = include_str!("../models/tor-handcrafted.json");

/// Screen attributes a spoofing strategy rewrites.
pub const SCREEN_ATTRIBUTES: [&str; 6] = [
    SCREEN_WIDTH,
    SCREEN_HEIGHT,
    SCREEN_AVAIL_WIDTH,
    SCREEN_AVAIL_HEIGHT,
    SCREEN_AVAIL_LEFT,
    SCREEN_AVAIL_TOP,
];

/// Rounds one window dimension down to a multiple of `quantum`, caps it,
/// and never returns less than one quantum.
pub fn spoof_dimension(x: u32, cap: u32, quantum: u32) -> u32 {
    let q = quantum.max(1);
    match (x / q) * q {
        0 => q,
        v => v.min(cap),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpoofStrategy {
    pub cap_w: u32,
    pub cap_h: u32,
    pub quant_w: u32,
    pub quant_h: u32,
}

impl SpoofStrategy {
    pub const TOR_DEFAULT: SpoofStrategy = SpoofStrategy {
        cap_w: 1000,
        cap_h: 1000,
        quant_w: 200,
        quant_h: 100,
    };

    pub fn new(cap_w: u32, cap_h: u32, quant_w: u32, quant_h: u32) -> Result<Self> {
        let s = SpoofStrategy {
            cap_w,
            cap_h,
            quant_w,
            quant_h,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.quant_w == 0 || self.quant_h == 0 || self.quant_w > self.cap_w || self.quant_h > self.cap_h {
            return Err(Error::Config(format!(
                "invalid strategy {self}: need 0 < quantum <= cap"
            )));
        }
        Ok(())
    }

    pub fn spoof(&self, w: u32, h: u32) -> (u32, u32) {
        (
            spoof_dimension(w, self.cap_w, self.quant_w),
            spoof_dimension(h, self.cap_h, self.quant_h),
        )
    }
}

impl fmt::Display for SpoofStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cap {}x{} quanta {}x{}",
            self.cap_w, self.cap_h, self.quant_w, self.quant_h
        )
    }
}

/// Parses `WxH`.
pub fn parse_dims(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let p = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|e| format!("bad dimension `{t}` in `{s}`: {e}"))
    };
    Ok((p(w)?, p(h)?))
}

fn reachable(cap: u32, quantum: u32) -> u64 {
    u64::from(cap / quantum) + u64::from(!cap.is_multiple_of(quantum))
}

/// Number of distinct spoofed `(w, h)` pairs the strategy can emit.
pub fn strategy_sets(s: &SpoofStrategy) -> u64 {
    reachable(s.cap_w, s.quant_w.max(1)) * reachable(s.cap_h, s.quant_h.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyScore {
    pub entropy_bits: f64,
    pub pct_le_1: f64,
    pub pct_le_10: f64,
    /// Mean unutilized pixels per record.
    pub abs_loss: f64,
    /// Mean fraction of unutilized pixels per record.
    pub pct_loss: f64,
}

impl StrategyScore {
    fn fields(&self) -> [f64; 5] {
        [
            self.entropy_bits,
            self.pct_le_1,
            self.pct_le_10,
            self.abs_loss,
            self.pct_loss,
        ]
    }

    /// Strictly lower in every metric and both losses.
    pub fn strictly_better_than(&self, reference: &StrategyScore) -> bool {
        self.fields().iter().zip(reference.fields()).all(|(a, b)| *a < b)
    }
}

/// The bundled handcrafted Tor Browser model, with the default strategy on
/// the screen attributes.
pub fn tor_handcrafted_model() -> MaskModel {
    MaskModel::from_json(TOR_MODEL_JSON, "bundled tor-handcrafted.json").expect("bundled model is valid")
}

/// `baseline` with the screen attributes rewritten by `s`.
pub fn strategy_model(baseline: &MaskModel, s: &SpoofStrategy) -> MaskModel {
    let mut m = baseline.clone();
    for attr in SCREEN_ATTRIBUTES {
        if !m.status(attr).is_some_and(VerdictStatus::is_masked) {
            m = m.with_status(attr, VerdictStatus::MaskedStandardize);
        }
    }
    let spoof = |source: &str, cap, quantum| ValueTransform::ResolutionSpoof {
        source: AttributeName::from(source),
        cap,
        quantum,
    };
    let zero = ValueTransform::Constant {
        value: AttributeValue::Integer(0),
    };
    m.transforms
        .insert(SCREEN_WIDTH.into(), spoof(SCREEN_WIDTH, s.cap_w, s.quant_w));
    m.transforms
        .insert(SCREEN_HEIGHT.into(), spoof(SCREEN_HEIGHT, s.cap_h, s.quant_h));
    m.transforms
        .insert(SCREEN_AVAIL_WIDTH.into(), spoof(SCREEN_WIDTH, s.cap_w, s.quant_w));
    m.transforms
        .insert(SCREEN_AVAIL_HEIGHT.into(), spoof(SCREEN_HEIGHT, s.cap_h, s.quant_h));
    m.transforms.insert(SCREEN_AVAIL_LEFT.into(), zero.clone());
    m.transforms.insert(SCREEN_AVAIL_TOP.into(), zero);
    m
}

fn resolutions(d: &Dataset) -> Result<Vec<(u32, u32)>> {
    if d.is_empty() {
        return Err(Error::Domain("cannot score a strategy on an empty dataset".into()));
    }
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(d.len());
    for (i, r) in d.records.iter().enumerate() {
        match (r.screen_w, r.screen_h) {
            (Some(w), Some(h)) => out.push((w, h)),
            _ => missing.push(i),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(Error::MissingResolution { records: missing })
    }
}

fn losses(res: &[(u32, u32)], s: &SpoofStrategy) -> (f64, f64) {
    let (mut abs, mut pct) = (0.0, 0.0);
    for &(w, h) in res {
        let (sw, sh) = s.spoof(w, h);
        let full = u64::from(w) * u64::from(h);
        let lost = full as f64 - (u64::from(sw) * u64::from(sh)) as f64;
        abs += lost;
        pct += lost / full as f64;
    }
    let n = res.len() as f64;
    (abs / n, pct / n)
}

pub fn score_strategy(d: &Dataset, baseline_model: &MaskModel, s: &SpoofStrategy) -> Result<StrategyScore> {
    s.validate()?;
    let res = resolutions(d)?;
    let model = strategy_model(baseline_model, s);
    let masked = apply_mask(d, &model, InconclusivePolicy::AsMasked)?;
    let t = TrackabilityReport::of(masked.records.iter().map(|r| &r.fingerprint))?;
    let (abs_loss, pct_loss) = losses(&res, s);
    Ok(StrategyScore {
        entropy_bits: t.entropy_bits,
        pct_le_1: t.pct_le_1,
        pct_le_10: t.pct_le_10,
        abs_loss,
        pct_loss,
    })
}

/// Inclusive rectangle of quanta, minus explicit exclusions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantaRange {
    pub w: RangeInclusive<u32>,
    pub h: RangeInclusive<u32>,
    pub exclude: Vec<(u32, u32)>,
}

impl QuantaRange {
    pub fn point(w: u32, h: u32) -> Self {
        QuantaRange {
            w: w..=w,
            h: h..=h,
            exclude: Vec::new(),
        }
    }
}

impl FromStr for QuantaRange {
    type Err = String;

    /// `WxH` or `W0xH0..W1xH1`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse_dims(a)?, parse_dims(b)?),
            None => {
                let p = parse_dims(s)?;
                (p, p)
            }
        };
        Ok(QuantaRange {
            w: lo.0..=hi.0,
            h: lo.1..=hi.1,
            exclude: Vec::new(),
        })
    }
}

/// Candidate strategies in deterministic order: caps in the given order,
/// then quanta row-major by `(quant_w, quant_h)`.
pub fn candidates(caps: &[(u32, u32)], quanta: &QuantaRange) -> Result<Vec<SpoofStrategy>> {
    if caps.is_empty() || quanta.w.is_empty() || quanta.h.is_empty() {
        return Err(Error::Config(
            "sweep needs at least one cap and a non-empty quanta range".into(),
        ));
    }
    let mut out = Vec::new();
    for &(cap_w, cap_h) in caps {
        for qw in quanta.w.clone() {
            for qh in quanta.h.clone() {
                if !quanta.exclude.contains(&(qw, qh)) {
                    out.push(SpoofStrategy::new(cap_w, cap_h, qw, qh)?);
                }
            }
        }
    }
    Ok(out)
}

/// Scores every candidate. Equivalent to calling [`score_strategy`] on each,
/// but groups records by their non-screen masked fingerprint once up front.
pub fn sweep(
    d: &Dataset,
    baseline_model: &MaskModel,
    caps: &[(u32, u32)],
    quanta: &QuantaRange,
) -> Result<Vec<(SpoofStrategy, StrategyScore)>> {
    let strategies = candidates(caps, quanta)?;
    let res = resolutions(d)?;
    let rest = rest_classes(d, baseline_model)?;
    Ok(strategies
        .into_par_iter()
        .map(|s| {
            let score = score_fast(&res, &rest, &s);
            (s, score)
        })
        .collect())
}

/// Class id per record of the masked fingerprint with screen attributes
/// removed.
fn rest_classes(d: &Dataset, baseline_model: &MaskModel) -> Result<Vec<u32>> {
    let model = strategy_model(baseline_model, &SpoofStrategy::TOR_DEFAULT);
    let masked = apply_mask(d, &model, InconclusivePolicy::AsMasked)?;
    let mut ids: HashMap<Fingerprint, u32> = HashMap::new();
    Ok(masked
        .records
        .into_iter()
        .map(|r| {
            let mut fp = r.fingerprint;
            for a in SCREEN_ATTRIBUTES {
                fp.remove(a);
            }
            let next = ids.len() as u32;
            *ids.entry(fp).or_insert(next)
        })
        .collect())
}

fn score_fast(res: &[(u32, u32)], rest: &[u32], s: &SpoofStrategy) -> StrategyScore {
    let mut keys: Vec<u128> = res
        .iter()
        .zip(rest)
        .map(|(&(w, h), &id)| {
            let (sw, sh) = s.spoof(w, h);
            (u128::from(id) << 64) | (u128::from(sw) << 32) | u128::from(sh)
        })
        .collect();
    keys.sort_unstable();
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let j = i + keys[i..].iter().take_while(|&&k| k == keys[i]).count();
        sizes.push(j - i);
        i = j;
    }
    sizes.sort_unstable();
    let t = TrackabilityReport::from_sizes(&sizes).expect("non-empty dataset");
    let (abs_loss, pct_loss) = losses(res, s);
    StrategyScore {
        entropy_bits: t.entropy_bits,
        pct_le_1: t.pct_le_1,
        pct_le_10: t.pct_le_10,
        abs_loss,
        pct_loss,
    }
}

pub fn pareto_improvements(
    results: &[(SpoofStrategy, StrategyScore)],
    reference: &StrategyScore,
) -> Vec<(SpoofStrategy, StrategyScore)> {
    results
        .iter()
        .filter(|(_, score)| score.strictly_better_than(reference))
        .copied()
        .collect()
}

pub const SWEEP_HEADER: [&str; 9] = [
    "cap_w",
    "cap_h",
    "quant_w",
    "quant_h",
    "entropy",
    "pct_le_1",
    "pct_le_10",
    "abs_loss",
    "pct_loss",
];

pub fn sweep_csv(results: &[(SpoofStrategy, StrategyScore)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).expect("in-memory write");
    for (s, r) in results {
        w.write_record([
            s.cap_w.to_string(),
            s.cap_h.to_string(),
            s.quant_w.to_string(),
            s.quant_h.to_string(),
            r.entropy_bits.to_string(),
            r.pct_le_1.to_string(),
            r.pct_le_10.to_string(),
            r.abs_loss.to_string(),
            r.pct_loss.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

pub fn parse_sweep_csv(text: &str, location: &str) -> Result<Vec<(SpoofStrategy, StrategyScore)>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::format(location, e.to_string()))?;
    if header.iter().ne(SWEEP_HEADER) {
        return Err(Error::format(
            location,
            format!("expected header {}", SWEEP_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let loc = format!("{location}:{}", i + 2);
        let rec = rec.map_err(|e| Error::format(loc.clone(), e.to_string()))?;
        let int = |k: usize| {
            rec[k]
                .parse::<u32>()
                .map_err(|e| Error::format(loc.clone(), format!("{}: {e}", SWEEP_HEADER[k])))
        };
        let real = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|e| Error::format(loc.clone(), format!("{}: {e}", SWEEP_HEADER[k])))
        };
        out.push((
            SpoofStrategy {
                cap_w: int(0)?,
                cap_h: int(1)?,
                quant_w: int(2)?,
                quant_h: int(3)?,
            },
            StrategyScore {
                entropy_bits: real(4)?,
                pct_le_1: real(5)?,
                pct_le_10: real(6)?,
                abs_loss: real(7)?,
                pct_loss: real(8)?,
            },
        ));
    }
    Ok(out)
}
