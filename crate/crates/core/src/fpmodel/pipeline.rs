use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{AttributeValue, BrowserFamily, Dataset, OsFamily, Record, SCREEN_HEIGHT, SCREEN_WIDTH};

/// Keeps the first record of every cookie; records without a cookie are
/// dropped since they cannot be attributed to a platform.
pub fn dedupe_by_cookie(d: &Dataset) -> Dataset {
    let mut seen = HashSet::new();
    Dataset {
        records: d
            .records
            .iter()
            .filter(|r| match &r.cookie_id {
                Some(c) => seen.insert(c.as_str()),
                None => false,
            })
            .cloned()
            .collect(),
        provenance: format!("{}|dedupe", d.provenance),
    }
}

/// Sanitization rules, checked in declaration order; a record is counted
/// under the first rule it trips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DropRule {
    #[serde(rename = "js-disabled")]
    JsDisabled,
    #[serde(rename = "illegitimate-resolution")]
    IllegitimateResolution,
    #[serde(rename = "non-desktop")]
    NonDesktop,
}

impl DropRule {
    pub const ALL: [DropRule; 3] = [
        DropRule::JsDisabled,
        DropRule::IllegitimateResolution,
        DropRule::NonDesktop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DropRule::JsDisabled => "js-disabled",
            DropRule::IllegitimateResolution => "illegitimate-resolution",
            DropRule::NonDesktop => "non-desktop",
        }
    }

    pub fn first_violated(r: &Record) -> Option<DropRule> {
        if !r.js_enabled {
            Some(DropRule::JsDisabled)
        } else if illegitimate_resolution(r) {
            Some(DropRule::IllegitimateResolution)
        } else if r.os_family == OsFamily::Other {
            Some(DropRule::NonDesktop)
        } else {
            None
        }
    }
}

/// A present width or height that is not a positive integer.
fn illegitimate_resolution(r: &Record) -> bool {
    [SCREEN_WIDTH, SCREEN_HEIGHT].iter().any(|name| {
        let v = r.fingerprint.get(name);
        !matches!(v, AttributeValue::Missing) && !matches!(v.as_integer(), Some(n) if n > 0)
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SanitizeReport {
    pub input: usize,
    pub kept: usize,
    pub dropped: BTreeMap<DropRule, usize>,
}

impl SanitizeReport {
    pub fn dropped_by(&self, rule: DropRule) -> usize {
        self.dropped.get(&rule).copied().unwrap_or(0)
    }
}

pub fn sanitize(d: &Dataset) -> (Dataset, SanitizeReport) {
    let mut report = SanitizeReport {
        input: d.len(),
        ..Default::default()
    };
    let mut kept = Vec::with_capacity(d.len());
    for r in &d.records {
        match DropRule::first_violated(r) {
            Some(rule) => *report.dropped.entry(rule).or_default() += 1,
            None => kept.push(r.clone()),
        }
    }
    report.kept = kept.len();
    (
        Dataset {
            records: kept,
            provenance: format!("{}|sanitize", d.provenance),
        },
        report,
    )
}

/// `(chrome, firefox)`; records of other browsers are in neither.
pub fn split_by_browser(d: &Dataset) -> (Dataset, Dataset) {
    (
        d.filtered("chrome", |r| r.browser_family == BrowserFamily::Chrome),
        d.filtered("firefox", |r| r.browser_family == BrowserFamily::Firefox),
    )
}
