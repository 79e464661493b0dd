use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpmodel::{AttributeName, AttributeValue, BrowserFamily, Fingerprint};
use crate::jsonl::{self, write_atomic};
use crate::resolution::spoof_dimension;

use super::Boundary;

/// Threshold pair of the standardization test. `f` is the smallest fraction
/// of values a standardization must touch to count as impactful; `alpha`
/// bounds the probability of missing such a standardization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatParams {
    pub f: f64,
    pub alpha: f64,
}

impl Default for StatParams {
    fn default() -> Self {
        StatParams { f: 0.75, alpha: 0.1 }
    }
}

impl StatParams {
    pub fn new(f: f64, alpha: f64) -> Result<Self> {
        let p = StatParams { f, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.f) || !open_unit(self.alpha) {
            return Err(Error::Config(format!(
                "f and alpha must lie in (0, 1), got f={} alpha={}",
                self.f, self.alpha
            )));
        }
        Ok(())
    }

    /// Probability that `k` distinct tested values all escape a
    /// standardization touching a fraction `f` of values: `(1 - f)^k`.
    pub fn miss_probability(&self, k: usize) -> f64 {
        (1.0 - self.f).powi(k.min(i32::MAX as usize) as i32)
    }

    /// Whether `k` distinct baseline values are enough to rule out
    /// impactful partial standardization.
    pub fn rules_out(&self, k: usize) -> bool {
        self.miss_probability(k) <= self.alpha
    }

    /// Smallest `k` for which [`rules_out`](Self::rules_out) holds.
    pub fn min_distinct_values(&self) -> usize {
        (1..).find(|&k| self.rules_out(k)).expect("(1-f)^k tends to 0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    MaskedVary,
    MaskedStandardize,
    Unmasked,
    InconclusiveBaselineVaries,
    InconclusiveInsufficientDiversity,
}

impl VerdictStatus {
    pub const ALL: [VerdictStatus; 5] = [
        VerdictStatus::MaskedVary,
        VerdictStatus::MaskedStandardize,
        VerdictStatus::Unmasked,
        VerdictStatus::InconclusiveBaselineVaries,
        VerdictStatus::InconclusiveInsufficientDiversity,
    ];

    pub fn is_masked(self) -> bool {
        matches!(self, VerdictStatus::MaskedVary | VerdictStatus::MaskedStandardize)
    }

    pub fn is_inconclusive(self) -> bool {
        matches!(
            self,
            VerdictStatus::InconclusiveBaselineVaries | VerdictStatus::InconclusiveInsufficientDiversity
        )
    }

    /// Table symbol: `+` masked, `×` unmasked, `·` inconclusive.
    pub fn symbol(self) -> &'static str {
        if self.is_masked() {
            "+"
        } else if self == VerdictStatus::Unmasked {
            "×"
        } else {
            "·"
        }
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

/// Observation backing a verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    pub platform: String,
    pub subject: String,
    pub boundary: Boundary,
    pub epoch: u32,
    pub value: AttributeValue,
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} {}#{} = {}",
            self.platform, self.subject, self.boundary, self.epoch, self.value
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: VerdictStatus,
    /// The `alpha` an `Unmasked` verdict was established at; `None` otherwise.
    pub confidence: Option<f64>,
    pub reason: Option<String>,
    pub evidence: Vec<Evidence>,
}

impl Verdict {
    pub fn new(status: VerdictStatus) -> Self {
        debug_assert!(status != VerdictStatus::Unmasked, "use Verdict::unmasked");
        Verdict {
            status,
            confidence: None,
            reason: None,
            evidence: Vec::new(),
        }
    }

    pub fn unmasked(alpha: f64) -> Self {
        Verdict {
            status: VerdictStatus::Unmasked,
            confidence: Some(alpha),
            reason: None,
            evidence: Vec::new(),
        }
    }

    pub fn with_reason(mut self, reason: impl Into<String>) -> Self {
        self.reason = Some(reason.into());
        self
    }

    pub fn with_evidence(mut self, evidence: Vec<Evidence>) -> Self {
        self.evidence = evidence;
        self
    }
}

/// Replacement applied to a masked attribute instead of the plain sentinel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueTransform {
    /// Replace with [`AttributeValue::Masked`].
    FullMask,
    /// Tor-style window rounding of the integer found in `source`.
    ResolutionSpoof {
        source: AttributeName,
        cap: u32,
        quantum: u32,
    },
    Constant {
        value: AttributeValue,
    },
}

impl ValueTransform {
    /// Output for one record; reads from the record's original fingerprint.
    pub fn apply(&self, original: &Fingerprint) -> AttributeValue {
        match self {
            ValueTransform::FullMask => AttributeValue::Masked,
            ValueTransform::ResolutionSpoof { source, cap, quantum } => {
                match original.get(source.as_str()).as_integer() {
                    Some(x) if x > 0 => {
                        let x = u32::try_from(x).unwrap_or(u32::MAX);
                        AttributeValue::Integer(spoof_dimension(x, *cap, *quantum) as i64)
                    }
                    _ => AttributeValue::Masked,
                }
            }
            ValueTransform::Constant { value } => value.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let ValueTransform::ResolutionSpoof { cap, quantum, .. } = self {
            if *quantum == 0 || quantum > cap {
                return Err(Error::Config(format!(
                    "resolution spoof needs 0 < quantum <= cap, got quantum {quantum} cap {cap}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-attribute verdicts for one privacy tool, plus optional handcrafted
/// transforms for masked attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskModel {
    pub pet: String,
    pub params: StatParams,
    /// Browser whose split this model is evaluated against, when known.
    pub browser: Option<BrowserFamily>,
    pub verdicts: BTreeMap<AttributeName, Verdict>,
    pub transforms: BTreeMap<AttributeName, ValueTransform>,
}

impl MaskModel {
    pub fn new(pet: impl Into<String>) -> Self {
        MaskModel {
            pet: pet.into(),
            params: StatParams::default(),
            browser: None,
            verdicts: BTreeMap::new(),
            transforms: BTreeMap::new(),
        }
    }

    /// Builder helper: attaches a bare verdict with `status`.
    pub fn with_status(mut self, attr: impl Into<AttributeName>, status: VerdictStatus) -> Self {
        let v = if status == VerdictStatus::Unmasked {
            Verdict::unmasked(self.params.alpha)
        } else {
            Verdict::new(status)
        };
        self.verdicts.insert(attr.into(), v);
        self
    }

    pub fn statuses(&self) -> BTreeMap<AttributeName, VerdictStatus> {
        self.verdicts.iter().map(|(k, v)| (k.clone(), v.status)).collect()
    }

    pub fn status(&self, attr: &str) -> Option<VerdictStatus> {
        self.verdicts.get(attr).map(|v| v.status)
    }

    pub fn masked_attributes(&self) -> impl Iterator<Item = &AttributeName> {
        self.verdicts
            .iter()
            .filter(|(_, v)| v.status.is_masked())
            .map(|(k, _)| k)
    }

    /// Transforms may only sit on attributes whose verdict is masked.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for (attr, t) in &self.transforms {
            match self.status(attr.as_str()) {
                Some(s) if s.is_masked() => t.validate()?,
                other => {
                    return Err(Error::Config(format!(
                        "model `{}` registers a transform on `{attr}` whose verdict is {}",
                        self.pet,
                        other.map_or("absent".to_owned(), |s| s.to_string())
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            pet: self.pet.clone(),
            params: self.params,
            browser: self.browser,
            verdicts: self
                .verdicts
                .iter()
                .map(|(k, v)| {
                    (
                        k.as_str().to_owned(),
                        VerdictEntry {
                            status: v.status,
                            confidence: v.confidence,
                            reason: v.reason.clone(),
                        },
                    )
                })
                .collect(),
            transforms: self
                .transforms
                .iter()
                .map(|(k, t)| (k.as_str().to_owned(), t.clone()))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, location: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::format(location, e.to_string()))?;
        let mut verdicts = BTreeMap::new();
        for (k, e) in file.verdicts {
            let name = AttributeName::new(k).ok_or_else(|| Error::format(location, "empty attribute name"))?;
            let confidence = match (e.status, e.confidence) {
                (VerdictStatus::Unmasked, None) => Some(file.params.alpha),
                (VerdictStatus::Unmasked, c) => c,
                (_, _) => None,
            };
            verdicts.insert(
                name,
                Verdict {
                    status: e.status,
                    confidence,
                    reason: e.reason,
                    evidence: Vec::new(),
                },
            );
        }
        let model = MaskModel {
            pet: file.pet,
            params: file.params,
            browser: file.browser,
            verdicts,
            transforms: file
                .transforms
                .into_iter()
                .map(|(k, t)| (AttributeName::from(k), t))
                .collect(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = jsonl::read_utf8(path)?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    pet: String,
    #[serde(default)]
    params: StatParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    browser: Option<BrowserFamily>,
    verdicts: BTreeMap<String, VerdictEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    transforms: BTreeMap<String, ValueTransform>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerdictEntry {
    status: VerdictStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

impl Serialize for AttributeName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for AttributeName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        AttributeName::new(s).ok_or_else(|| serde::de::Error::custom("empty attribute name"))
    }
}
