//! Fingerprint data model and the ingestion pipeline that turns raw
//! observational exports into per-browser platform sets.
//!
//! A [`Fingerprint`] is the ordered tuple of attribute values a tracker
//! extracts from one browsing platform. Two platforms with equal
//! fingerprints are indistinguishable to that tracker.

mod io;
mod pipeline;
mod ua;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::Value;

pub use io::{load_dataset, save_dataset, DatasetFormat};
pub use pipeline::{dedupe_by_cookie, sanitize, split_by_browser, DropRule, SanitizeReport};
pub use ua::{classify_browser, classify_os};

pub const USER_AGENT: &str = "h.User-Agent";
pub const SCREEN_WIDTH: &str = "screen.Width";
pub const SCREEN_HEIGHT: &str = "screen.Height";
pub const SCREEN_AVAIL_WIDTH: &str = "screen.AvailWidth";
pub const SCREEN_AVAIL_HEIGHT: &str = "screen.AvailHeight";
pub const SCREEN_AVAIL_LEFT: &str = "screen.AvailLeft";
pub const SCREEN_AVAIL_TOP: &str = "screen.AvailTop";

/// Alternate spellings of the user-agent attribute accepted by the classifier.
const USER_AGENT_ALIASES: [&str; 3] = [USER_AGENT, "User-Agent", "userAgent"];

/// Name of one fingerprinting attribute. Compared byte-exact.
///
/// The `From` conversions do not validate; loaders reject empty names
/// before constructing one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeName(String);

impl AttributeName {
    pub fn new(name: impl Into<String>) -> Option<Self> {
        let name = name.into();
        (!name.is_empty()).then_some(AttributeName(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for AttributeName {
    fn from(s: &str) -> Self {
        AttributeName(s.to_owned())
    }
}

impl From<String> for AttributeName {
    fn from(s: String) -> Self {
        AttributeName(s)
    }
}

impl std::borrow::Borrow<str> for AttributeName {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AttributeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Value of one attribute.
///
/// `Masked` is the reserved sentinel written by counterfactual masking. It
/// lives outside the text/integer space so it can never collide with an
/// observed value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttributeValue {
    Text(String),
    Integer(i64),
    Missing,
    Masked,
}

/// JSON token for [`AttributeValue::Masked`].
pub(crate) const MASKED_JSON_KEY: &str = "$masked";

impl AttributeValue {
    pub fn text(s: impl Into<String>) -> Self {
        AttributeValue::Text(s.into())
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, AttributeValue::Missing)
    }

    /// Integer reading of the value, accepting decimal text.
    pub fn as_integer(&self) -> Option<i64> {
        match self {
            AttributeValue::Integer(n) => Some(*n),
            AttributeValue::Text(s) => s.trim().parse().ok(),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AttributeValue::Text(s) => Value::String(s.clone()),
            AttributeValue::Integer(n) => Value::from(*n),
            AttributeValue::Missing => Value::Null,
            AttributeValue::Masked => {
                let mut m = serde_json::Map::new();
                m.insert(MASKED_JSON_KEY.to_owned(), Value::Bool(true));
                Value::Object(m)
            }
        }
    }

    /// Inverse of [`to_json`](Self::to_json). Floats and booleans are kept
    /// as their textual rendering.
    pub fn from_json(v: &Value) -> Result<Self, String> {
        Ok(match v {
            Value::Null => AttributeValue::Missing,
            Value::String(s) => AttributeValue::Text(s.clone()),
            Value::Number(n) => match n.as_i64() {
                Some(i) => AttributeValue::Integer(i),
                None => AttributeValue::Text(n.to_string()),
            },
            Value::Bool(b) => AttributeValue::Text(b.to_string()),
            Value::Object(m) if m.len() == 1 && m.get(MASKED_JSON_KEY) == Some(&Value::Bool(true)) => {
                AttributeValue::Masked
            }
            other => return Err(format!("unsupported attribute value {other}")),
        })
    }
}

impl serde::Serialize for AttributeValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for AttributeValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        AttributeValue::from_json(&v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Text(s) => write!(f, "{s:?}"),
            AttributeValue::Integer(n) => write!(f, "{n}"),
            AttributeValue::Missing => f.write_str("<missing>"),
            AttributeValue::Masked => f.write_str("<masked>"),
        }
    }
}

/// Attribute-name → value map for one platform visit.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fingerprint {
    attrs: BTreeMap<AttributeName, AttributeValue>,
}

impl Fingerprint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<AttributeName>, value: AttributeValue) {
        self.attrs.insert(name.into(), value);
    }

    pub fn with(mut self, name: impl Into<AttributeName>, value: AttributeValue) -> Self {
        self.insert(name, value);
        self
    }

    /// Absent attributes read as `Missing`.
    pub fn get(&self, name: &str) -> &AttributeValue {
        self.attrs.get(name).unwrap_or(&AttributeValue::Missing)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.attrs.contains_key(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<AttributeValue> {
        self.attrs.remove(name)
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AttributeName, &AttributeValue)> {
        self.attrs.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &AttributeName> {
        self.attrs.keys()
    }

    pub(crate) fn iter_mut(&mut self) -> impl Iterator<Item = (&AttributeName, &mut AttributeValue)> {
        self.attrs.iter_mut()
    }

    /// Canonical byte-stable rendering: a compact JSON object with keys in
    /// byte order. Equal fingerprints, and only those, render identically.
    pub fn canonical(&self) -> String {
        let mut out = String::with_capacity(16 * self.attrs.len() + 2);
        out.push('{');
        for (i, (name, value)) in self.attrs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&Value::String(name.0.clone()).to_string());
            out.push(':');
            out.push_str(&value.to_json().to_string());
        }
        out.push('}');
        out
    }

    pub fn to_json_map(&self) -> serde_json::Map<String, Value> {
        self.attrs.iter().map(|(k, v)| (k.0.clone(), v.to_json())).collect()
    }
}

impl<N: Into<AttributeName>> FromIterator<(N, AttributeValue)> for Fingerprint {
    fn from_iter<I: IntoIterator<Item = (N, AttributeValue)>>(iter: I) -> Self {
        Fingerprint {
            attrs: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrowserFamily {
    Chrome,
    Firefox,
    Other,
}

impl fmt::Display for BrowserFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BrowserFamily::Chrome => "chrome",
            BrowserFamily::Firefox => "firefox",
            BrowserFamily::Other => "other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OsFamily {
    Windows,
    Mac,
    Linux,
    Other,
}

/// One observed platform: its fingerprint plus metadata derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub fingerprint: Fingerprint,
    pub cookie_id: Option<String>,
    pub browser_family: BrowserFamily,
    pub os_family: OsFamily,
    pub js_enabled: bool,
    pub screen_w: Option<u32>,
    pub screen_h: Option<u32>,
}

impl Record {
    pub fn new(fingerprint: Fingerprint, cookie_id: Option<String>, js_enabled: bool) -> Self {
        let ua = user_agent(&fingerprint);
        let browser_family = ua.map_or(BrowserFamily::Other, classify_browser);
        let os_family = ua.map_or(OsFamily::Other, classify_os);
        let screen_w = positive_dimension(fingerprint.get(SCREEN_WIDTH));
        let screen_h = positive_dimension(fingerprint.get(SCREEN_HEIGHT));
        Record {
            fingerprint,
            cookie_id,
            browser_family,
            os_family,
            js_enabled,
            screen_w,
            screen_h,
        }
    }

    /// Same metadata, new fingerprint. Derived fields are not recomputed:
    /// a masked user agent still belongs to its original browser split.
    pub fn with_fingerprint(&self, fingerprint: Fingerprint) -> Self {
        Record {
            fingerprint,
            ..self.clone()
        }
    }
}

fn user_agent(fp: &Fingerprint) -> Option<&str> {
    USER_AGENT_ALIASES.iter().find_map(|name| match fp.get(name) {
        AttributeValue::Text(s) => Some(s.as_str()),
        _ => None,
    })
}

fn positive_dimension(v: &AttributeValue) -> Option<u32> {
    v.as_integer().filter(|n| *n > 0).and_then(|n| u32::try_from(n).ok())
}

/// Ordered collection of records. Every record carries the full attribute
/// universe of the dataset; attributes a source row lacked read as `Missing`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub records: Vec<Record>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(mut records: Vec<Record>, provenance: impl Into<String>) -> Self {
        let universe: BTreeSet<AttributeName> = records.iter().flat_map(|r| r.fingerprint.names().cloned()).collect();
        for r in &mut records {
            if r.fingerprint.len() != universe.len() {
                for name in &universe {
                    if !r.fingerprint.contains(name.as_str()) {
                        r.fingerprint.insert(name.clone(), AttributeValue::Missing);
                    }
                }
            }
        }
        Dataset {
            records,
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn fingerprints(&self) -> Vec<&Fingerprint> {
        self.records.iter().map(|r| &r.fingerprint).collect()
    }

    pub fn attribute_universe(&self) -> BTreeSet<AttributeName> {
        self.records
            .iter()
            .flat_map(|r| r.fingerprint.names().cloned())
            .collect()
    }

    /// Keeps records matching `keep`, relabelling provenance.
    pub fn filtered(&self, label: &str, keep: impl Fn(&Record) -> bool) -> Dataset {
        Dataset {
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
            provenance: format!("{}|{label}", self.provenance),
        }
    }
}
