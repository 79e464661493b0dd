//! Mask-model inference from paired experimental observations.
//!
//! Each observation records one visit of an experimental platform, either
//! in its baseline configuration or with a privacy tool installed, at some
//! epoch of a variation boundary (page reload, domain change, new
//! session). Comparing values across epochs exposes variation; comparing
//! a platform with and without the tool exposes standardization.
//!
//! Session epochs are metadata here. Producers of logs are expected to
//! separate session epochs by at least 45 minutes of idle time.

mod classify;
mod model;
mod rank;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::fpmodel::{AttributeName, AttributeValue, Fingerprint};
use crate::jsonl::{self, write_atomic};

pub use classify::{baseline_varies, classify, infer_model, skipped_groups};
pub use model::{Evidence, MaskModel, StatParams, ValueTransform, Verdict, VerdictStatus};
pub use rank::{rank_preorder, Preorder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Boundary {
    Reload,
    Domain,
    Session,
}

impl Boundary {
    pub const ALL: [Boundary; 3] = [Boundary::Reload, Boundary::Domain, Boundary::Session];

    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Reload => "reload",
            Boundary::Domain => "domain",
            Boundary::Session => "session",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Boundary::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| format!("unknown boundary `{s}` (expected reload, domain or session)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Baseline,
    Pet(String),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Baseline => f.write_str("baseline"),
            Subject::Pet(name) => write!(f, "pet:{name}"),
        }
    }
}

impl FromStr for Subject {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Subject::Baseline),
            _ => match s.strip_prefix("pet:") {
                Some(name) if !name.is_empty() => Ok(Subject::Pet(name.to_owned())),
                _ => Err(format!("subject must be `baseline` or `pet:<name>`, got `{s}`")),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub platform: String,
    pub subject: Subject,
    pub boundary: Boundary,
    pub epoch: u32,
    pub fingerprint: Fingerprint,
}

/// Experimental observations, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationLog {
    pub observations: Vec<Observation>,
}

impl ObservationLog {
    pub fn new(observations: Vec<Observation>) -> Self {
        ObservationLog { observations }
    }

    pub fn attributes(&self) -> BTreeSet<AttributeName> {
        self.observations
            .iter()
            .flat_map(|o| o.fingerprint.names().cloned())
            .collect()
    }

    pub fn pets(&self) -> BTreeSet<String> {
        self.observations
            .iter()
            .filter_map(|o| match &o.subject {
                Subject::Pet(p) => Some(p.clone()),
                Subject::Baseline => None,
            })
            .collect()
    }

    pub fn parse(text: &str, location: &Path) -> Result<Self> {
        let mut observations = Vec::new();
        for item in jsonl::objects(location, text) {
            let (line, obj) = item?;
            let loc = format!("{}:{line}", location.display());
            let err = |m: String| Error::format(loc.clone(), m);
            let (mut platform, mut subject, mut boundary, mut epoch, mut attrs) = (None, None, None, None, None);
            for (k, v) in obj.0 {
                match k.as_str() {
                    "platform" => {
                        platform =
                            Some(as_string(&v).ok_or_else(|| err("`platform` must be a string or number".into()))?)
                    }
                    "subject" => {
                        let s = v.as_str().ok_or_else(|| err("`subject` must be a string".into()))?;
                        subject = Some(s.parse::<Subject>().map_err(err)?);
                    }
                    "boundary" => {
                        let s = v.as_str().ok_or_else(|| err("`boundary` must be a string".into()))?;
                        boundary = Some(s.parse::<Boundary>().map_err(err)?);
                    }
                    "epoch" => {
                        let n = v
                            .as_u64()
                            .and_then(|n| u32::try_from(n).ok())
                            .ok_or_else(|| err("`epoch` must be a non-negative integer".into()))?;
                        epoch = Some(n);
                    }
                    "attrs" => {
                        let m = v.as_object().ok_or_else(|| err("`attrs` must be an object".into()))?;
                        let mut fp = Fingerprint::new();
                        for (name, value) in m {
                            let name =
                                AttributeName::new(name.as_str()).ok_or_else(|| err("empty attribute name".into()))?;
                            let value = AttributeValue::from_json(value)
                                .map_err(|m| err(format!("attribute `{name}`: {m}")))?;
                            fp.insert(name, value);
                        }
                        attrs = Some(fp);
                    }
                    other => return Err(err(format!("unknown key `{other}`"))),
                }
            }
            let missing = |k: &str| err(format!("missing key `{k}`"));
            observations.push(Observation {
                platform: platform.ok_or_else(|| missing("platform"))?,
                subject: subject.ok_or_else(|| missing("subject"))?,
                boundary: boundary.ok_or_else(|| missing("boundary"))?,
                epoch: epoch.ok_or_else(|| missing("epoch"))?,
                fingerprint: attrs.ok_or_else(|| missing("attrs"))?,
            });
        }
        Ok(ObservationLog { observations })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = jsonl::read_utf8(path)?;
        Self::parse(&text, path)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for o in &self.observations {
            let mut m = serde_json::Map::new();
            m.insert("platform".into(), Value::String(o.platform.clone()));
            m.insert("subject".into(), Value::String(o.subject.to_string()));
            m.insert("boundary".into(), Value::String(o.boundary.to_string()));
            m.insert("epoch".into(), Value::from(o.epoch));
            m.insert("attrs".into(), Value::Object(o.fingerprint.to_json_map()));
            out.push_str(&Value::Object(m).to_string());
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_jsonl().as_bytes())
    }
}

fn as_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}
