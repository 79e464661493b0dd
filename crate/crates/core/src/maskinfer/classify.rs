use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::model::{Evidence, MaskModel, StatParams, Verdict, VerdictStatus};
use super::{Boundary, ObservationLog, Subject};
use crate::error::{Error, Result};
use crate::fpmodel::{AttributeName, AttributeValue};

type GroupKey<'a> = (&'a str, Boundary);

/// Values of `attr` for one subject, grouped per (platform, boundary) in
/// epoch order.
fn groups<'a>(
    log: &'a ObservationLog,
    subject: &Subject,
    attr: &str,
) -> BTreeMap<GroupKey<'a>, Vec<(u32, &'a AttributeValue)>> {
    let mut out: BTreeMap<GroupKey<'a>, Vec<(u32, &'a AttributeValue)>> = BTreeMap::new();
    for o in log.observations.iter().filter(|o| &o.subject == subject) {
        out.entry((o.platform.as_str(), o.boundary))
            .or_default()
            .push((o.epoch, o.fingerprint.get(attr)));
    }
    for v in out.values_mut() {
        v.sort_by_key(|(e, _)| *e);
    }
    out
}

fn testable(epochs: &[(u32, &AttributeValue)]) -> bool {
    epochs.iter().map(|(e, _)| e).collect::<BTreeSet<_>>().len() >= 2
}

fn varies(epochs: &[(u32, &AttributeValue)]) -> bool {
    testable(epochs) && epochs.iter().map(|(_, v)| *v).collect::<BTreeSet<_>>().len() >= 2
}

/// First (platform, boundary) group whose epochs disagree, as evidence.
fn first_variation(log: &ObservationLog, subject: &Subject, attr: &str) -> Option<Vec<Evidence>> {
    groups(log, subject, attr)
        .into_iter()
        .find(|(_, epochs)| varies(epochs))
        .map(|((platform, boundary), epochs)| {
            epochs
                .into_iter()
                .map(|(epoch, value)| Evidence {
                    platform: platform.to_owned(),
                    subject: subject.to_string(),
                    boundary,
                    epoch,
                    value: value.clone(),
                })
                .collect()
        })
}

fn check_observed(log: &ObservationLog, attr: &str) -> Result<()> {
    if log.observations.iter().any(|o| o.fingerprint.contains(attr)) {
        Ok(())
    } else {
        Err(Error::NotObserved(attr.to_owned()))
    }
}

/// Whether some baseline platform shows two or more values of `attr` across
/// the epochs of one boundary. Differences between platforms do not count.
pub fn baseline_varies(log: &ObservationLog, attr: &str) -> Result<bool> {
    check_observed(log, attr)?;
    if !log.observations.iter().any(|o| o.subject == Subject::Baseline) {
        return Err(Error::InsufficientData("log has no baseline observations".into()));
    }
    Ok(groups(log, &Subject::Baseline, attr).values().any(|e| varies(e)))
}

/// (platform, subject, boundary) groups with fewer than two epochs, where
/// variation cannot be tested.
pub fn skipped_groups(log: &ObservationLog) -> Vec<(String, Subject, Boundary)> {
    let mut epochs: BTreeMap<(&str, &Subject, Boundary), BTreeSet<u32>> = BTreeMap::new();
    for o in &log.observations {
        epochs
            .entry((o.platform.as_str(), &o.subject, o.boundary))
            .or_default()
            .insert(o.epoch);
    }
    epochs
        .into_iter()
        .filter(|(_, e)| e.len() < 2)
        .map(|((p, s, b), _)| (p.to_owned(), s.clone(), b))
        .collect()
}

fn value_set<'a>(
    g: &BTreeMap<GroupKey<'a>, Vec<(u32, &'a AttributeValue)>>,
    platform: &str,
) -> BTreeSet<&'a AttributeValue> {
    g.iter()
        .filter(|((p, _), _)| *p == platform)
        .flat_map(|(_, epochs)| epochs.iter().map(|(_, v)| *v))
        .collect()
}

fn first_evidence(
    g: &BTreeMap<GroupKey<'_>, Vec<(u32, &AttributeValue)>>,
    subject: &Subject,
    platform: &str,
) -> Option<Evidence> {
    g.iter()
        .filter(|((p, _), _)| *p == platform)
        .find_map(|((p, boundary), epochs)| {
            epochs.first().map(|(epoch, value)| Evidence {
                platform: (*p).to_owned(),
                subject: subject.to_string(),
                boundary: *boundary,
                epoch: *epoch,
                value: (*value).clone(),
            })
        })
}

/// Classifies one (tool, attribute) pair. The checks run in a fixed order
/// and the first that fires decides:
///
/// 1. baseline varies → inconclusive, variation cannot be attributed;
/// 2. the tool's platforms vary → masked by variation;
/// 3. some platform differs with vs. without the tool → masked by
///    standardization;
/// 4. otherwise, with `k` distinct baseline values tested, unmasked if
///    `(1-f)^k <= alpha`, else inconclusive for lack of diversity.
pub fn classify(log: &ObservationLog, pet: &str, attr: &str, params: &StatParams) -> Result<Verdict> {
    if baseline_varies(log, attr)? {
        let ev = first_variation(log, &Subject::Baseline, attr).unwrap_or_default();
        return Ok(Verdict::new(VerdictStatus::InconclusiveBaselineVaries)
            .with_reason("baseline platforms vary the attribute themselves")
            .with_evidence(ev));
    }

    let pet_subject = Subject::Pet(pet.to_owned());
    let pet_groups = groups(log, &pet_subject, attr);
    if pet_groups.is_empty() {
        return Err(Error::InsufficientData(format!("no observations for pet `{pet}`")));
    }
    if let Some(ev) = first_variation(log, &pet_subject, attr) {
        return Ok(Verdict::new(VerdictStatus::MaskedVary).with_evidence(ev));
    }

    let base_groups = groups(log, &Subject::Baseline, attr);
    let base_platforms: BTreeSet<&str> = base_groups.keys().map(|(p, _)| *p).collect();
    let paired: Vec<&str> = pet_groups
        .keys()
        .map(|(p, _)| *p)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|p| base_platforms.contains(p))
        .collect();
    if paired.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no platform has both baseline and `{pet}` observations"
        )));
    }

    let mut distinct_baseline: BTreeSet<&AttributeValue> = BTreeSet::new();
    for platform in &paired {
        let base = value_set(&base_groups, platform);
        let with_pet = value_set(&pet_groups, platform);
        if base != with_pet {
            let ev = [
                first_evidence(&base_groups, &Subject::Baseline, platform),
                first_evidence(&pet_groups, &pet_subject, platform),
            ]
            .into_iter()
            .flatten()
            .collect();
            return Ok(Verdict::new(VerdictStatus::MaskedStandardize).with_evidence(ev));
        }
        distinct_baseline.extend(base);
    }

    let k = distinct_baseline.len();
    if params.rules_out(k) {
        Ok(Verdict::unmasked(params.alpha))
    } else {
        Ok(
            Verdict::new(VerdictStatus::InconclusiveInsufficientDiversity).with_reason(format!(
                "{k} distinct baseline value(s): (1-f)^k = {} > alpha = {}",
                params.miss_probability(k),
                params.alpha
            )),
        )
    }
}

/// Verdicts for every attribute seen in the log. Per-attribute failures
/// become inconclusive verdicts carrying the error as their reason.
pub fn infer_model(log: &ObservationLog, pet: &str, params: &StatParams) -> Result<MaskModel> {
    params.validate()?;
    if !log.pets().contains(pet) {
        return Err(Error::InsufficientData(format!("no observations for pet `{pet}`")));
    }
    let attrs: Vec<AttributeName> = log.attributes().into_iter().collect();
    let verdicts: BTreeMap<AttributeName, Verdict> = attrs
        .into_par_iter()
        .map(|attr| {
            let v = classify(log, pet, attr.as_str(), params).unwrap_or_else(|e| {
                Verdict::new(VerdictStatus::InconclusiveInsufficientDiversity).with_reason(e.to_string())
            });
            (attr, v)
        })
        .collect();
    let mut model = MaskModel::new(pet);
    model.params = *params;
    model.verdicts = verdicts;
    Ok(model)
}
