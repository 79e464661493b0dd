//! Counterfactual evaluation: apply a tool's mask model to an observational
//! dataset of platforms that do not use it, then compare trackability of
//! the original and the masked fingerprints.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpmodel::{AttributeName, BrowserFamily, Dataset, Fingerprint};
use crate::maskinfer::{MaskModel, VerdictStatus};
use crate::metrics::{Metric, TrackabilityReport};

pub use crate::maskinfer::ValueTransform;

/// How attributes the experiment could not resolve are treated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InconclusivePolicy {
    /// Mask them fully. Overestimates the tool's effect.
    #[default]
    AsMasked,
    AsUnmasked,
}

impl InconclusivePolicy {
    fn masks(self, status: VerdictStatus) -> bool {
        status.is_masked() || (self == InconclusivePolicy::AsMasked && status.is_inconclusive())
    }
}

pub const NO_MASK_LABEL: &str = "no mask";

fn mask_fingerprint(fp: &Fingerprint, m: &MaskModel, policy: InconclusivePolicy) -> Fingerprint {
    let mut out = fp.clone();
    for (name, value) in out.iter_mut() {
        let Some(status) = m.status(name.as_str()) else {
            continue;
        };
        if policy.masks(status) {
            *value = match m.transforms.get(name) {
                Some(t) => t.apply(fp),
                None => crate::fpmodel::AttributeValue::Masked,
            };
        }
    }
    out
}

/// Masks every record. Record count, order and metadata are preserved.
pub fn apply_mask(d: &Dataset, m: &MaskModel, policy: InconclusivePolicy) -> Result<Dataset> {
    m.validate()?;
    let records = d
        .records
        .par_iter()
        .map(|r| r.with_fingerprint(mask_fingerprint(&r.fingerprint, m, policy)))
        .collect();
    Ok(Dataset {
        records,
        provenance: format!("{}|mask:{}", d.provenance, m.pet),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridReport {
    pub pet: String,
    pub before: TrackabilityReport,
    pub after: TrackabilityReport,
    pub eff: BTreeMap<Metric, f64>,
    pub masked_attrs: Vec<AttributeName>,
    pub inconclusive_attrs: Vec<AttributeName>,
    pub unmasked_attrs: Vec<AttributeName>,
}

fn report(
    pet: &str,
    d: &Dataset,
    m: &MaskModel,
    before: TrackabilityReport,
    after: TrackabilityReport,
) -> HybridReport {
    let (mut masked, mut inconclusive, mut unmasked) = (Vec::new(), Vec::new(), Vec::new());
    for attr in d.attribute_universe() {
        match m.status(attr.as_str()) {
            Some(s) if s.is_masked() => masked.push(attr),
            Some(s) if s.is_inconclusive() => inconclusive.push(attr),
            _ => unmasked.push(attr),
        }
    }
    HybridReport {
        pet: pet.to_owned(),
        before,
        after,
        eff: Metric::ALL.iter().map(|&k| (k, before.get(k) - after.get(k))).collect(),
        masked_attrs: masked,
        inconclusive_attrs: inconclusive,
        unmasked_attrs: unmasked,
    }
}

pub fn evaluate_pet(d: &Dataset, m: &MaskModel, policy: InconclusivePolicy) -> Result<HybridReport> {
    if d.is_empty() {
        return Err(Error::Domain("cannot evaluate on an empty dataset".into()));
    }
    let before = TrackabilityReport::of(d.records.iter().map(|r| &r.fingerprint))?;
    let masked = apply_mask(d, m, policy)?;
    let after = TrackabilityReport::of(masked.records.iter().map(|r| &r.fingerprint))?;
    Ok(report(&m.pet, d, m, before, after))
}

/// One line of the comparison table; tools with identical models share it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub label: String,
    pub pets: Vec<String>,
    pub report: HybridReport,
}

fn masks_nothing(m: &MaskModel, policy: InconclusivePolicy) -> bool {
    m.transforms.is_empty() && m.verdicts.values().all(|v| !policy.masks(v.status))
}

/// Byte-stable identity of what a model does to a fingerprint.
fn merge_key(m: &MaskModel) -> String {
    let statuses: BTreeMap<&str, VerdictStatus> = m.verdicts.iter().map(|(k, v)| (k.as_str(), v.status)).collect();
    let transforms: BTreeMap<&str, &ValueTransform> = m.transforms.iter().map(|(k, t)| (k.as_str(), t)).collect();
    serde_json::to_string(&(statuses, transforms)).expect("serializable")
}

fn check_browser(d: &Dataset, m: &MaskModel, expected: Option<BrowserFamily>) -> Result<()> {
    let Some(b) = m.browser.or(expected) else {
        return Ok(());
    };
    if let (Some(e), Some(mb)) = (expected, m.browser) {
        if e != mb {
            return Err(Error::Config(format!(
                "model `{}` targets {mb} but the table is for {e}",
                m.pet
            )));
        }
    }
    if let Some(r) = d.records.iter().find(|r| r.browser_family != b) {
        return Err(Error::Config(format!(
            "model `{}` targets {b} but the dataset contains a {} record",
            m.pet, r.browser_family
        )));
    }
    Ok(())
}

/// Evaluates every model on `d` and returns rows from most to least
/// trackable after masking. The first row is always the unmasked dataset;
/// models that mask nothing are listed on it.
pub fn evaluate_all(
    d: &Dataset,
    browser: Option<BrowserFamily>,
    models: &[MaskModel],
    policy: InconclusivePolicy,
) -> Result<Vec<TableRow>> {
    if d.is_empty() {
        return Err(Error::Domain("cannot evaluate on an empty dataset".into()));
    }
    for m in models {
        m.validate()?;
        check_browser(d, m, browser)?;
    }
    let before = TrackabilityReport::of(d.records.iter().map(|r| &r.fingerprint))?;

    let mut null_pets = Vec::new();
    let mut groups: BTreeMap<String, (Vec<String>, &MaskModel)> = BTreeMap::new();
    for m in models {
        if masks_nothing(m, policy) {
            null_pets.push(m.pet.clone());
        } else {
            groups
                .entry(merge_key(m))
                .or_insert_with(|| (Vec::new(), m))
                .0
                .push(m.pet.clone());
        }
    }
    null_pets.sort();

    let mut rows: Vec<TableRow> = groups
        .into_par_iter()
        .map(|(_, (mut pets, m))| {
            pets.sort();
            let masked = apply_mask(d, m, policy)?;
            let after = TrackabilityReport::of(masked.records.iter().map(|r| &r.fingerprint))?;
            let label = pets.join(", ");
            Ok(TableRow {
                report: report(&label, d, m, before, after),
                label,
                pets,
            })
        })
        .collect::<Result<_>>()?;

    let no_mask_label = std::iter::once(NO_MASK_LABEL.to_owned())
        .chain(null_pets.iter().cloned())
        .collect::<Vec<_>>()
        .join(", ");
    let identity = MaskModel::new(NO_MASK_LABEL);
    rows.push(TableRow {
        report: report(&no_mask_label, d, &identity, before, before),
        label: no_mask_label,
        pets: null_pets,
    });

    rows.sort_by(|a, b| {
        b.report
            .after
            .entropy_bits
            .total_cmp(&a.report.after.entropy_bits)
            .then_with(|| b.report.after.pct_le_1.total_cmp(&a.report.after.pct_le_1))
            .then_with(|| b.report.after.pct_le_10.total_cmp(&a.report.after.pct_le_10))
            .then_with(|| (!a.label.starts_with(NO_MASK_LABEL)).cmp(&!b.label.starts_with(NO_MASK_LABEL)))
            .then_with(|| a.label.cmp(&b.label))
    });
    Ok(rows)
}

/// csv with columns `PET,H,%≤1,%≤10`, full precision.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["PET", "H", "%≤1", "%≤10"]).expect("in-memory write");
    for r in rows {
        let a = &r.report.after;
        w.write_record([
            r.label.clone(),
            a.entropy_bits.to_string(),
            a.pct_le_1.to_string(),
            a.pct_le_10.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Aligned text table, metrics to three decimals.
pub fn table_text(rows: &[TableRow]) -> String {
    let width = rows.iter().map(|r| r.label.chars().count()).max().unwrap_or(3).max(3);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>7}  {:>6}  {:>6}", "PET", "H", "%≤1", "%≤10");
    for r in rows {
        let a = &r.report.after;
        let _ = writeln!(
            out,
            "{:<width$}  {:>7.3}  {:>6.3}  {:>6.3}",
            r.label, a.entropy_bits, a.pct_le_1, a.pct_le_10
        );
    }
    out
}
