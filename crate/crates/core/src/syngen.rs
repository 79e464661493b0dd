//! Seeded synthetic corpora and observation logs with ground truth.
//!
//! Corpora are synthetic by construction; the presets only borrow attribute
//! names from real fingerprinting scripts, not their statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fpmodel::{
    AttributeName, AttributeValue, BrowserFamily, Dataset, DropRule, Fingerprint, OsFamily, Record,
    SCREEN_AVAIL_HEIGHT, SCREEN_AVAIL_LEFT, SCREEN_AVAIL_TOP, SCREEN_AVAIL_WIDTH, SCREEN_HEIGHT, SCREEN_WIDTH,
    USER_AGENT,
};
use crate::jsonl::read_utf8;
use crate::maskinfer::{Boundary, Observation, ObservationLog, StatParams, Subject, VerdictStatus};

const WEIGHT_TOLERANCE: f64 = 1e-6;
const RESERVED: [&str; 9] = [
    USER_AGENT,
    "User-Agent",
    "userAgent",
    SCREEN_WIDTH,
    SCREEN_HEIGHT,
    SCREEN_AVAIL_WIDTH,
    SCREEN_AVAIL_HEIGHT,
    SCREEN_AVAIL_LEFT,
    SCREEN_AVAIL_TOP,
];

/// Categorical distribution; weights must be positive and sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weighted<T> {
    pub values: Vec<T>,
    pub weights: Vec<f64>,
}

impl<T: Clone> Weighted<T> {
    pub fn new(values: Vec<T>, weights: Vec<f64>) -> Self {
        Weighted { values, weights }
    }

    /// Single value with weight 1.
    pub fn constant(value: T) -> Self {
        Weighted {
            values: vec![value],
            weights: vec![1.0],
        }
    }

    /// Weights proportional to `1/(i+1)`, normalized.
    pub fn zipf(values: Vec<T>) -> Self {
        let raw: Vec<f64> = (0..values.len()).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let total: f64 = raw.iter().sum();
        Weighted {
            weights: raw.iter().map(|w| w / total).collect(),
            values,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.values.is_empty() || self.values.len() != self.weights.len() {
            return Err(Error::Spec(format!(
                "{what}: need one weight per value and at least one value ({} values, {} weights)",
                self.values.len(),
                self.weights.len()
            )));
        }
        if let Some(w) = self.weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Spec(format!("{what}: weights must be positive, got {w}")));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::Spec(format!("{what}: weights sum to {sum}, not 1")));
        }
        Ok(())
    }

    fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.weights).expect("validated weights")
    }
}

fn default_browser_mix() -> Weighted<BrowserFamily> {
    Weighted::new(vec![BrowserFamily::Chrome, BrowserFamily::Firefox], vec![0.5, 0.5])
}

fn default_os_mix() -> Weighted<OsFamily> {
    Weighted::new(
        vec![OsFamily::Windows, OsFamily::Mac, OsFamily::Linux],
        vec![0.6, 0.25, 0.15],
    )
}

fn default_resolutions() -> Weighted<(u32, u32)> {
    Weighted::zipf(vec![
        (1920, 1080),
        (1366, 768),
        (1440, 900),
        (1536, 864),
        (1280, 800),
        (1600, 900),
        (2560, 1440),
        (1680, 1050),
        (1280, 1024),
        (1024, 768),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub attributes: BTreeMap<String, Weighted<Value>>,
    #[serde(default)]
    pub js_disabled_fraction: f64,
    #[serde(default)]
    pub bad_resolution_fraction: f64,
    #[serde(default)]
    pub non_desktop_fraction: f64,
    /// Number of distinct cookie ids shared among the records, each used at
    /// least once. Every record gets its own cookie when absent.
    #[serde(default)]
    pub cookies: Option<usize>,
    #[serde(default = "default_browser_mix")]
    pub browser_mix: Weighted<BrowserFamily>,
    #[serde(default = "default_os_mix")]
    pub os_mix: Weighted<OsFamily>,
    #[serde(default = "default_resolutions")]
    pub resolutions: Weighted<(u32, u32)>,
    /// Also emit `screen.Avail*` attributes derived from the resolution.
    #[serde(default)]
    pub include_avail: bool,
    /// One user-agent string per (browser, os) instead of sampled versions.
    #[serde(default)]
    pub fixed_versions: bool,
}

impl CorpusSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        CorpusSpec {
            n,
            seed,
            attributes: BTreeMap::new(),
            js_disabled_fraction: 0.0,
            bad_resolution_fraction: 0.0,
            non_desktop_fraction: 0.0,
            cookies: None,
            browser_mix: default_browser_mix(),
            os_mix: default_os_mix(),
            resolutions: default_resolutions(),
            include_avail: false,
            fixed_versions: false,
        }
    }

    pub fn with_attribute(mut self, name: &str, dist: Weighted<Value>) -> Self {
        self.attributes.insert(name.to_owned(), dist);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, dist) in &self.attributes {
            if name.is_empty() {
                return Err(Error::Spec("empty attribute name".into()));
            }
            if RESERVED.contains(&name.as_str()) {
                return Err(Error::Spec(format!(
                    "attribute `{name}` is generated and cannot be specified"
                )));
            }
            dist.validate(&format!("attribute `{name}`"))?;
            for v in &dist.values {
                AttributeValue::from_json(v).map_err(|m| Error::Spec(format!("attribute `{name}`: {m}")))?;
            }
        }
        self.browser_mix.validate("browser_mix")?;
        self.os_mix.validate("os_mix")?;
        if self.os_mix.values.contains(&OsFamily::Other) {
            return Err(Error::Spec(
                "os_mix covers desktop systems; use non_desktop_fraction".into(),
            ));
        }
        self.resolutions.validate("resolutions")?;
        if self.resolutions.values.iter().any(|&(w, h)| w == 0 || h == 0) {
            return Err(Error::Spec("resolutions must be positive".into()));
        }
        let fractions = [
            ("js_disabled_fraction", self.js_disabled_fraction),
            ("bad_resolution_fraction", self.bad_resolution_fraction),
            ("non_desktop_fraction", self.non_desktop_fraction),
        ];
        for (k, f) in fractions {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Spec(format!("{k} must lie in [0, 1], got {f}")));
            }
        }
        if let Some(c) = self.cookies {
            if c > self.n || (c == 0 && self.n > 0) {
                return Err(Error::Spec(format!(
                    "cookies must lie in 1..={} for n={}, got {c}",
                    self.n, self.n
                )));
            }
        }
        let planted = self.js_disabled_fraction + self.bad_resolution_fraction + self.non_desktop_fraction;
        if planted > 1.0 + WEIGHT_TOLERANCE {
            return Err(Error::Spec(format!("planted fractions sum to {planted} > 1")));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_utf8(path)?;
        let spec: CorpusSpec =
            serde_json::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Named built-in corpus specs.
pub const PRESETS: [&str; 2] = ["firefox-like", "chrome-like"];

pub fn preset(name: &str, n: usize, seed: u64) -> Result<CorpusSpec> {
    let browser = match name {
        "firefox-like" => BrowserFamily::Firefox,
        "chrome-like" => BrowserFamily::Chrome,
        _ => {
            return Err(Error::Spec(format!(
                "unknown preset `{name}` (known: {})",
                PRESETS.join(", ")
            )))
        }
    };
    let texts = |prefix: &str, k: usize| -> Weighted<Value> {
        Weighted::zipf((0..k).map(|i| Value::String(format!("{prefix}-{i:02}"))).collect())
    };
    let mut spec = CorpusSpec::new(n, seed)
        .with_attribute("canvas fingerprint", texts("canvas", 60))
        .with_attribute("javascript fonts", texts("fonts", 40))
        .with_attribute("webGL.Renderer", texts("renderer", 25))
        .with_attribute("webGL.Vendor", texts("vendor", 4))
        .with_attribute("webGL.Data Hash", texts("webgl", 30))
        .with_attribute("h.Accept-Language", texts("accept-lang", 12))
        .with_attribute("language", texts("lang", 8))
        .with_attribute(
            "timezone",
            Weighted::zipf([-60, 0, -120, 300, 240, 480, -330, 360].map(Value::from).to_vec()),
        )
        .with_attribute(
            "screen.Depth",
            Weighted::new(vec![Value::from(24), Value::from(32)], vec![0.8, 0.2]),
        )
        .with_attribute(
            "screen.Pixel Ratio",
            Weighted::new(
                vec![Value::from("1"), Value::from("1.25"), Value::from("2")],
                vec![0.7, 0.2, 0.1],
            ),
        )
        .with_attribute("plugins", texts("plugins", 15))
        .with_attribute(
            "cookies enabled",
            Weighted::new(vec![Value::from("yes"), Value::from("no")], vec![0.98, 0.02]),
        )
        .with_attribute(
            "local storage",
            Weighted::new(vec![Value::from("yes"), Value::from("no")], vec![0.95, 0.05]),
        )
        .with_attribute(
            "touch.max points",
            Weighted::new(vec![Value::from(0), Value::from(10)], vec![0.9, 0.1]),
        )
        .with_attribute("h.Accept-Encoding", texts("encoding", 3))
        .with_attribute(
            "platform",
            Weighted::zipf(["Win32", "MacIntel", "Linux x86_64"].map(Value::from).to_vec()),
        );
    if browser == BrowserFamily::Firefox {
        spec = spec.with_attribute("buildID", texts("build", 10)).with_attribute(
            "cpu class",
            Weighted::new(vec![Value::Null, Value::from("x86")], vec![0.9, 0.1]),
        );
    }
    spec.browser_mix = Weighted::constant(browser);
    spec.include_avail = true;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordTruth {
    pub browser: BrowserFamily,
    pub os: OsFamily,
    /// Sanitization rule this record was built to trip, if any.
    pub planted: Option<DropRule>,
    /// Index of the earlier record whose cookie this one reuses.
    pub duplicate_of: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusTruth {
    pub records: Vec<RecordTruth>,
}

impl CorpusTruth {
    /// Expected drop rule per record after cookie deduplication.
    pub fn expected_drop(&self, i: usize) -> Option<DropRule> {
        self.records[i].planted
    }

    /// Indices expected to survive deduplication and sanitization.
    pub fn expected_kept(&self) -> Vec<usize> {
        (0..self.records.len())
            .filter(|&i| self.records[i].duplicate_of.is_none() && self.records[i].planted.is_none())
            .collect()
    }
}

const FIREFOX_VERSIONS: [u32; 5] = [52, 56, 57, 58, 59];
const CHROME_VERSIONS: [u32; 5] = [61, 62, 63, 64, 65];

fn os_token(os: OsFamily, chrome_style: bool) -> &'static str {
    match (os, chrome_style) {
        (OsFamily::Windows, _) => "Windows NT 10.0; Win64; x64",
        (OsFamily::Mac, true) => "Macintosh; Intel Mac OS X 10_13_2",
        (OsFamily::Mac, false) => "Macintosh; Intel Mac OS X 10.13",
        _ => "X11; Linux x86_64",
    }
}

fn version(rng: &mut ChaCha8Rng, versions: &[u32], fixed: bool) -> u32 {
    if fixed {
        versions[versions.len() - 1]
    } else {
        *versions.choose(rng).expect("non-empty")
    }
}

fn desktop_ua(rng: &mut ChaCha8Rng, browser: BrowserFamily, os: OsFamily, fixed: bool) -> String {
    match browser {
        BrowserFamily::Firefox => {
            let v = version(rng, &FIREFOX_VERSIONS, fixed);
            format!(
                "Mozilla/5.0 ({}; rv:{v}.0) Gecko/20100101 Firefox/{v}.0",
                os_token(os, false)
            )
        }
        BrowserFamily::Chrome => {
            let v = version(rng, &CHROME_VERSIONS, fixed);
            format!(
                "Mozilla/5.0 ({}) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/{v}.0.3239.132 Safari/537.36",
                os_token(os, true)
            )
        }
        BrowserFamily::Other => {
            let t = os_token(os, true);
            match if fixed { 0 } else { rng.gen_range(0..5) } {
                0 => format!("Mozilla/5.0 ({t}) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/58.0.3029.110 Safari/537.36 Edge/16.16299"),
                1 => format!("Mozilla/5.0 ({t}) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/63.0.3239.132 Safari/537.36 OPR/50.0.2762.58"),
                2 => format!("Mozilla/5.0 ({}; rv:52.0) Gecko/20100101 Firefox/52.0 SeaMonkey/2.49.1", os_token(os, false)),
                3 => format!("Mozilla/5.0 ({t}) AppleWebKit/537.36 (KHTML, like Gecko) Chromium/63.0.3239.84 Chrome/63.0.3239.84 Safari/537.36"),
                _ => format!("Mozilla/5.0 ({t}) AppleWebKit/604.4.7 (KHTML, like Gecko) Version/11.0.2 Safari/604.4.7"),
            }
        }
    }
}

fn mobile_ua(rng: &mut ChaCha8Rng, browser: BrowserFamily, fixed: bool) -> String {
    match browser {
        BrowserFamily::Firefox => "Mozilla/5.0 (Android 8.0; Mobile; rv:58.0) Gecko/58.0 Firefox/58.0".into(),
        BrowserFamily::Chrome => {
            let v = version(rng, &CHROME_VERSIONS, fixed);
            format!("Mozilla/5.0 (Linux; Android 8.0.0; SM-G950F) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/{v}.0.3239.111 Mobile Safari/537.36")
        }
        BrowserFamily::Other => "Mozilla/5.0 (iPhone; CPU iPhone OS 11_2 like Mac OS X) AppleWebKit/604.4.7 (KHTML, like Gecko) Version/11.0 Mobile/15C114 Safari/604.1".into(),
    }
}

const BAD_WIDTHS: [fn() -> AttributeValue; 3] = [
    || AttributeValue::Integer(0),
    || AttributeValue::Integer(-1024),
    || AttributeValue::text("unknown"),
];

/// Builds a corpus and its ground truth. Deterministic in `spec.seed`.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<(Dataset, CorpusTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let attrs: Vec<(AttributeName, Vec<AttributeValue>, WeightedIndex<f64>)> = spec
        .attributes
        .iter()
        .map(|(name, dist)| {
            let values = dist
                .values
                .iter()
                .map(|v| AttributeValue::from_json(v).expect("validated"))
                .collect();
            (AttributeName::from(name.as_str()), values, dist.sampler())
        })
        .collect();
    let browsers = spec.browser_mix.sampler();
    let oses = spec.os_mix.sampler();
    let resolutions = spec.resolutions.sampler();

    let mut cookie_of: Vec<usize> = match spec.cookies {
        Some(c) => (0..spec.n).map(|i| i % c).collect(),
        None => (0..spec.n).collect(),
    };
    cookie_of.shuffle(&mut rng);
    let mut first_use: BTreeMap<usize, usize> = BTreeMap::new();

    let mut records = Vec::with_capacity(spec.n);
    let mut truth = CorpusTruth::default();
    for (i, &cookie_id) in cookie_of.iter().enumerate() {
        let mut fp = Fingerprint::new();
        for (name, values, sampler) in &attrs {
            fp.insert(name.clone(), values[sampler.sample(&mut rng)].clone());
        }
        let browser = spec.browser_mix.values[browsers.sample(&mut rng)];
        let os = spec.os_mix.values[oses.sample(&mut rng)];
        let (w, h) = spec.resolutions.values[resolutions.sample(&mut rng)];

        let u: f64 = rng.gen();
        let planted = if u < spec.js_disabled_fraction {
            Some(DropRule::JsDisabled)
        } else if u < spec.js_disabled_fraction + spec.bad_resolution_fraction {
            Some(DropRule::IllegitimateResolution)
        } else if u < spec.js_disabled_fraction + spec.bad_resolution_fraction + spec.non_desktop_fraction {
            Some(DropRule::NonDesktop)
        } else {
            None
        };

        let (ua, os) = match planted {
            Some(DropRule::NonDesktop) => (mobile_ua(&mut rng, browser, spec.fixed_versions), OsFamily::Other),
            _ => (desktop_ua(&mut rng, browser, os, spec.fixed_versions), os),
        };
        fp.insert(USER_AGENT, AttributeValue::text(ua));
        let width = match planted {
            Some(DropRule::IllegitimateResolution) => BAD_WIDTHS[rng.gen_range(0..BAD_WIDTHS.len())](),
            _ => AttributeValue::Integer(i64::from(w)),
        };
        fp.insert(SCREEN_WIDTH, width);
        fp.insert(SCREEN_HEIGHT, AttributeValue::Integer(i64::from(h)));
        if spec.include_avail {
            fp.insert(SCREEN_AVAIL_WIDTH, AttributeValue::Integer(i64::from(w)));
            fp.insert(
                SCREEN_AVAIL_HEIGHT,
                AttributeValue::Integer(i64::from(h.saturating_sub(40).max(1))),
            );
            fp.insert(SCREEN_AVAIL_LEFT, AttributeValue::Integer(0));
            fp.insert(SCREEN_AVAIL_TOP, AttributeValue::Integer(0));
        }

        let first = *first_use.entry(cookie_id).or_insert(i);
        let duplicate_of = (first != i).then_some(first);
        let cookie = format!("c{:06}", cookie_id);
        records.push(Record::new(fp, Some(cookie), planted != Some(DropRule::JsDisabled)));
        truth.records.push(RecordTruth {
            browser,
            os,
            planted,
            duplicate_of,
        });
    }
    Ok((Dataset::new(records, format!("syngen:seed={}", spec.seed)), truth))
}

/// Requested verdicts per tool, which generated logs reproduce exactly.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LogTruth {
    pub verdicts: BTreeMap<String, BTreeMap<AttributeName, VerdictStatus>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BaselineShape {
    Distinct,
    Uniform,
    Varies,
}

fn baseline_shape(
    attr: &AttributeName,
    pets: &[(String, BTreeMap<AttributeName, VerdictStatus>)],
    platforms: usize,
    epochs: u32,
    params: &StatParams,
) -> Result<BaselineShape> {
    let statuses: Vec<VerdictStatus> = pets.iter().map(|(_, m)| m[attr]).collect();
    let has = |s: VerdictStatus| statuses.contains(&s);
    let varies = statuses
        .iter()
        .filter(|s| **s == VerdictStatus::InconclusiveBaselineVaries)
        .count();
    if varies > 0 && varies < statuses.len() {
        return Err(Error::Spec(format!(
            "`{attr}`: baseline variation is shared by all tools, so either every tool or none must request inconclusive_baseline_varies"
        )));
    }
    if (varies > 0 || has(VerdictStatus::MaskedVary)) && epochs < 2 {
        return Err(Error::Spec(format!(
            "`{attr}`: variation statuses need at least 2 epochs per boundary"
        )));
    }
    if varies > 0 {
        return Ok(BaselineShape::Varies);
    }
    let insufficient = has(VerdictStatus::InconclusiveInsufficientDiversity);
    let unmasked = has(VerdictStatus::Unmasked);
    if insufficient && unmasked {
        return Err(Error::Spec(format!(
            "`{attr}`: unmasked and insufficient-diversity verdicts need different baselines, which tools share"
        )));
    }
    if insufficient {
        if params.rules_out(1) {
            return Err(Error::Spec(format!(
                "`{attr}`: with f={} alpha={} a single value already rules out standardization, so insufficient diversity is unreachable",
                params.f, params.alpha
            )));
        }
        return Ok(BaselineShape::Uniform);
    }
    let k = params.min_distinct_values();
    if unmasked && platforms < k {
        return Err(Error::Spec(format!(
            "`{attr}`: an unmasked verdict needs k >= {k} distinct baseline values (f={}, alpha={}), but only {platforms} platform(s) are available",
            params.f, params.alpha
        )));
    }
    Ok(BaselineShape::Distinct)
}

fn platform_name(p: usize) -> String {
    format!("platform-{p:02}")
}

/// Builds a log on which inference reproduces every requested verdict.
/// All tools share one baseline; each platform is observed at every
/// boundary for `epochs` epochs per subject.
pub fn generate_log(
    pets: &[(String, BTreeMap<AttributeName, VerdictStatus>)],
    platforms: usize,
    epochs: u32,
    seed: u64,
    params: &StatParams,
) -> Result<(ObservationLog, LogTruth)> {
    params.validate().map_err(|e| Error::Spec(e.to_string()))?;
    if pets.is_empty() || platforms == 0 || epochs == 0 {
        return Err(Error::Spec("need at least one tool, one platform and one epoch".into()));
    }
    let names: BTreeSet<&str> = pets.iter().map(|(n, _)| n.as_str()).collect();
    if names.len() != pets.len() || names.iter().any(|n| n.is_empty()) {
        return Err(Error::Spec("tool names must be distinct and non-empty".into()));
    }
    let attrs: BTreeSet<&AttributeName> = pets[0].1.keys().collect();
    if pets.iter().any(|(_, m)| m.keys().collect::<BTreeSet<_>>() != attrs) {
        return Err(Error::Spec(
            "every tool must request verdicts for the same attributes".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes: BTreeMap<&AttributeName, BaselineShape> = attrs
        .iter()
        .map(|a| Ok((*a, baseline_shape(a, pets, platforms, epochs, params)?)))
        .collect::<Result<_>>()?;

    let cell = |a: &AttributeName, p: usize, b: Boundary, e: u32| -> AttributeValue {
        match shapes[a] {
            BaselineShape::Uniform => AttributeValue::text(format!("{a}=same")),
            BaselineShape::Varies if p == 0 && b == Boundary::Reload => AttributeValue::text(format!("{a}=drift-{e}")),
            _ => AttributeValue::text(format!("{a}=p{p}")),
        }
    };

    // Per tool and attribute: the standardized platforms and the value they see.
    let mut standardized: BTreeMap<(&str, &AttributeName), (BTreeSet<usize>, AttributeValue)> = BTreeMap::new();
    for (pet, m) in pets {
        for (a, s) in m {
            if *s == VerdictStatus::MaskedStandardize {
                let mut set: BTreeSet<usize> = (0..platforms).filter(|_| rng.gen_bool(0.5)).collect();
                if set.is_empty() {
                    set.insert(rng.gen_range(0..platforms));
                }
                let value = if rng.gen_bool(0.25) {
                    AttributeValue::Missing
                } else {
                    AttributeValue::text(format!("{a}=spoofed"))
                };
                standardized.insert((pet.as_str(), a), (set, value));
            }
        }
    }

    let mut observations = Vec::new();
    let subjects: Vec<Subject> = std::iter::once(Subject::Baseline)
        .chain(pets.iter().map(|(p, _)| Subject::Pet(p.clone())))
        .collect();
    for p in 0..platforms {
        for subject in &subjects {
            for b in Boundary::ALL {
                for e in 0..epochs {
                    let mut fp = Fingerprint::new();
                    for &a in &attrs {
                        let base = cell(a, p, b, e);
                        let value = match subject {
                            Subject::Baseline => base,
                            Subject::Pet(pet) => {
                                let m = &pets.iter().find(|(n, _)| n == pet).expect("known tool").1;
                                match m[a] {
                                    VerdictStatus::MaskedVary if p == 0 && b == Boundary::Reload => {
                                        AttributeValue::text(format!("{a}=random-{e}"))
                                    }
                                    VerdictStatus::MaskedStandardize => match standardized.get(&(pet.as_str(), a)) {
                                        Some((set, v)) if set.contains(&p) => v.clone(),
                                        _ => base,
                                    },
                                    _ => base,
                                }
                            }
                        };
                        fp.insert(a.clone(), value);
                    }
                    observations.push(Observation {
                        platform: platform_name(p),
                        subject: subject.clone(),
                        boundary: b,
                        epoch: e,
                        fingerprint: fp,
                    });
                }
            }
        }
    }
    let truth = LogTruth {
        verdicts: pets.iter().cloned().collect(),
    };
    Ok((ObservationLog::new(observations), truth))
}
