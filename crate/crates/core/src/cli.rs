//! `fpeval` command line. Exit status 0 on success, 1 on usage errors and
//! 2 on data errors, reported on stderr as `error[kind]: message`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpmodel::{
    dedupe_by_cookie, load_dataset, sanitize, save_dataset, split_by_browser, AttributeName, BrowserFamily, Dataset,
    DatasetFormat, SanitizeReport,
};
use crate::hybrid::{evaluate_all, table_csv, table_text, InconclusivePolicy};
use crate::jsonl::{read_utf8, write_atomic};
use crate::maskinfer::{infer_model, rank_preorder, MaskModel, ObservationLog, StatParams, VerdictStatus};
use crate::metrics::Metric;
use crate::popsample::{load_popularity, popularity_evaluate, SampledEstimate, DEFAULT_SAMPLES};
use crate::resolution::{
    pareto_improvements, parse_dims, score_strategy, sweep, sweep_csv, tor_handcrafted_model, QuantaRange,
    SpoofStrategy,
};
use crate::syngen::{generate_corpus, generate_log, preset, CorpusSpec, PRESETS};

#[derive(Debug, Parser)]
#[command(name = "fpeval", version, about = "Evaluate anti-fingerprinting privacy tools")]
pub struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "FPEVAL_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deduplicate, sanitize and split a fingerprint dataset by browser.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Input format; guessed from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<DatasetFormat>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Infer a tool's mask model from an observation log.
    Infer {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        pet: String,
        #[arg(long, default_value_t = 0.75)]
        f: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// Browser split the model applies to.
        #[arg(long, value_parser = parse_browser)]
        browser: Option<BrowserFamily>,
        #[arg(long)]
        out: PathBuf,
        /// Print per-attribute verdicts.
        #[arg(long)]
        table: bool,
    },
    /// Order tools by the sets of attributes they mask.
    Rank {
        #[arg(long = "model", required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Trackability of a dataset under each tool's mask model.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long = "model", required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long, value_parser = parse_browser)]
        browser: Option<BrowserFamily>,
        #[arg(long, value_enum, default_value_t)]
        policy: InconclusivePolicy,
        /// csv table destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Full reports as json.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Trackability among each tool's user base, by repeated subsampling.
    Popeval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long = "model", required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        /// csv with columns pet,users; NA marks unknown counts.
        #[arg(long)]
        popularity: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        policy: InconclusivePolicy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score screen-resolution spoofing strategies over a cap/quanta grid.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        /// Baseline mask model; defaults to the bundled Tor model.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Comma-separated caps, `WxH`.
        #[arg(long, default_value = "1000x1000", value_delimiter = ',', value_parser = parse_dims)]
        caps: Vec<(u32, u32)>,
        /// `WxH` or an inclusive rectangle `W0xH0..W1xH1`.
        #[arg(long, default_value = "200x100")]
        quanta: QuantaRange,
        #[arg(long, value_parser = parse_dims)]
        exclude: Vec<(u32, u32)>,
        #[arg(long)]
        out: PathBuf,
        /// Reference strategy `CAPWxCAPH/QWxQH` for the Pareto filter.
        #[arg(long, default_value = "1000x1000/200x100", value_parser = parse_strategy)]
        reference: SpoofStrategy,
        /// Write strategies strictly better than the reference here.
        #[arg(long)]
        pareto: Option<PathBuf>,
    },
    /// Synthetic inputs.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<DatasetFormat>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        load_dataset(
            &self.data,
            self.format.unwrap_or_else(|| DatasetFormat::from_path(&self.data)),
        )
    }
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Fingerprint corpus from a preset or a json spec.
    Corpus {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        preset: Option<String>,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Record count for presets.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Seed for presets.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<DatasetFormat>,
        /// Ground truth json destination.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Observation log reproducing requested verdicts.
    Log {
        /// json object: tool name → {attribute → status}.
        #[arg(long)]
        pets: PathBuf,
        #[arg(long, default_value_t = 6)]
        platforms: usize,
        #[arg(long, default_value_t = 2)]
        epochs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.75)]
        f: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// The bundled handcrafted Tor model.
    TorModel {
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_browser(s: &str) -> Result<BrowserFamily, String> {
    match s {
        "chrome" => Ok(BrowserFamily::Chrome),
        "firefox" => Ok(BrowserFamily::Firefox),
        _ => Err(format!("expected chrome or firefox, got `{s}`")),
    }
}

fn parse_strategy(s: &str) -> Result<SpoofStrategy, String> {
    let (cap, q) = s
        .split_once('/')
        .ok_or_else(|| format!("expected CAPWxCAPH/QWxQH, got `{s}`"))?;
    let (cw, ch) = parse_dims(cap)?;
    let (qw, qh) = parse_dims(q)?;
    SpoofStrategy::new(cw, ch, qw, qh).map_err(|e| e.to_string())
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            2
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| execute(cli.command))
        }
        None => execute(cli.command),
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn load_models(paths: &[PathBuf]) -> Result<Vec<MaskModel>> {
    paths.iter().map(|p| MaskModel::load(p)).collect()
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ingest { input, format, out_dir } => ingest(&input, format, &out_dir),
        Command::Infer {
            log,
            pet,
            f,
            alpha,
            browser,
            out,
            table,
        } => {
            let params = StatParams::new(f, alpha)?;
            let log = ObservationLog::load(&log)?;
            for (platform, subject, boundary) in crate::maskinfer::skipped_groups(&log) {
                eprintln!("note: {platform}/{subject} has fewer than 2 {boundary} epochs; variation not tested there");
            }
            let mut model = infer_model(&log, &pet, &params)?;
            model.browser = browser;
            model.save(&out)?;
            if table {
                print!("{}", verdict_table(&model));
            }
            Ok(())
        }
        Command::Rank { models, json } => {
            let p = rank_preorder(&load_models(&models)?);
            let mut out = String::new();
            for (pet, n) in &p.masked_counts {
                let _ = writeln!(out, "{pet}\t{n}");
            }
            for (i, j) in &p.covers {
                let _ = writeln!(out, "{} > {}", p.classes[*i].join(" = "), p.classes[*j].join(" = "));
            }
            let _ = writeln!(out, "chain: {}", if p.is_chain() { "yes" } else { "no" });
            print!("{out}");
            if let Some(path) = json {
                write_atomic(&path, &json_bytes(&p))?;
            }
            Ok(())
        }
        Command::Evaluate {
            data,
            models,
            browser,
            policy,
            out,
            json,
        } => {
            let d = data.load()?;
            let rows = evaluate_all(&d, browser, &load_models(&models)?, policy)?;
            print!("{}", table_text(&rows));
            if let Some(path) = out {
                write_atomic(&path, table_csv(&rows).as_bytes())?;
            }
            if let Some(path) = json {
                write_atomic(&path, &json_bytes(&rows))?;
            }
            Ok(())
        }
        Command::Popeval {
            data,
            models,
            popularity,
            samples,
            seed,
            policy,
            out,
        } => {
            let d = data.load()?;
            let models = load_models(&models)?;
            let table = load_popularity(&popularity)?;
            let mut rows = Vec::new();
            for entry in table {
                let outcome = match (entry.users, models.iter().find(|m| m.pet == entry.pet)) {
                    (_, None) => PopOutcome::NoModel,
                    (None, _) => PopOutcome::UnknownUsers,
                    (Some(u), Some(m)) => match popularity_evaluate(&d, m, policy, u, samples, seed) {
                        Ok(est) => PopOutcome::Estimate(est),
                        Err(Error::SampleTooLarge { .. }) => PopOutcome::TooLarge,
                        Err(e) => return Err(e),
                    },
                };
                rows.push((entry.pet, entry.users, outcome));
            }
            print!("{}", popularity_text(&rows));
            if let Some(path) = out {
                write_atomic(&path, popularity_csv(&rows).as_bytes())?;
            }
            Ok(())
        }
        Command::Sweep {
            data,
            model,
            caps,
            mut quanta,
            exclude,
            out,
            reference,
            pareto,
        } => {
            let d = data.load()?;
            let baseline = match model {
                Some(p) => MaskModel::load(&p)?,
                None => tor_handcrafted_model(),
            };
            quanta.exclude = exclude;
            let results = sweep(&d, &baseline, &caps, &quanta)?;
            write_atomic(&out, sweep_csv(&results).as_bytes())?;
            let reference_score = score_strategy(&d, &baseline, &reference)?;
            let better = pareto_improvements(&results, &reference_score);
            println!(
                "{} strategies scored; {} strictly better than {reference}",
                results.len(),
                better.len()
            );
            if let Some(path) = pareto {
                write_atomic(&path, sweep_csv(&better).as_bytes())?;
            }
            Ok(())
        }
        Command::Gen(g) => generate(g),
    }
}

#[derive(Serialize)]
struct IngestReport {
    input: usize,
    after_dedupe: usize,
    sanitize: SanitizeReport,
    chrome: usize,
    firefox: usize,
    other: usize,
}

fn ingest(input: &Path, format: Option<DatasetFormat>, out_dir: &Path) -> Result<()> {
    let d = load_dataset(input, format.unwrap_or_else(|| DatasetFormat::from_path(input)))?;
    let deduped = dedupe_by_cookie(&d);
    let (clean, report) = sanitize(&deduped);
    let (chrome, firefox) = split_by_browser(&clean);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    save_dataset(&clean, &out_dir.join("sanitized.jsonl"), DatasetFormat::Jsonl)?;
    save_dataset(&chrome, &out_dir.join("chrome.jsonl"), DatasetFormat::Jsonl)?;
    save_dataset(&firefox, &out_dir.join("firefox.jsonl"), DatasetFormat::Jsonl)?;
    let summary = IngestReport {
        input: d.len(),
        after_dedupe: deduped.len(),
        other: clean.len() - chrome.len() - firefox.len(),
        chrome: chrome.len(),
        firefox: firefox.len(),
        sanitize: report,
    };
    write_atomic(&out_dir.join("ingest-report.json"), &json_bytes(&summary))?;
    println!(
        "{} records: {} after dedupe, {} kept ({} chrome, {} firefox)",
        summary.input, summary.after_dedupe, summary.sanitize.kept, summary.chrome, summary.firefox
    );
    Ok(())
}

fn generate(g: GenCommand) -> Result<()> {
    match g {
        GenCommand::Corpus {
            preset: name,
            spec,
            n,
            seed,
            out,
            format,
            truth,
        } => {
            let spec = match (name, spec) {
                (Some(name), _) => preset(&name, n, seed)?,
                (None, Some(path)) => CorpusSpec::load(&path)?,
                (None, None) => {
                    return Err(Error::Config(format!(
                        "need --preset ({}) or --spec",
                        PRESETS.join(", ")
                    )))
                }
            };
            let (d, t) = generate_corpus(&spec)?;
            save_dataset(&d, &out, format.unwrap_or_else(|| DatasetFormat::from_path(&out)))?;
            if let Some(path) = truth {
                write_atomic(&path, &json_bytes(&t))?;
            }
            Ok(())
        }
        GenCommand::Log {
            pets,
            platforms,
            epochs,
            seed,
            f,
            alpha,
            out,
            truth,
        } => {
            let params = StatParams::new(f, alpha)?;
            let text = read_utf8(&pets)?;
            let requested: BTreeMap<String, BTreeMap<AttributeName, VerdictStatus>> =
                serde_json::from_str(&text).map_err(|e| Error::format(pets.display().to_string(), e.to_string()))?;
            let requested: Vec<_> = requested.into_iter().collect();
            let (log, t) = generate_log(&requested, platforms, epochs, seed, &params)?;
            log.save(&out)?;
            if let Some(path) = truth {
                write_atomic(&path, &json_bytes(&t))?;
            }
            Ok(())
        }
        GenCommand::TorModel { out } => tor_handcrafted_model().save(&out),
    }
}

/// One line per attribute: symbol, name and status.
pub fn verdict_table(m: &MaskModel) -> String {
    let width = m.verdicts.keys().map(|a| a.as_str().chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (attr, v) in &m.verdicts {
        let _ = writeln!(out, "{}  {:<width$}  {}", v.status.symbol(), attr.as_str(), v.status);
    }
    out
}

enum PopOutcome {
    Estimate(SampledEstimate),
    UnknownUsers,
    TooLarge,
    NoModel,
}

impl PopOutcome {
    fn status(&self) -> &'static str {
        match self {
            PopOutcome::Estimate(_) => "ok",
            PopOutcome::UnknownUsers => "unknown-users",
            PopOutcome::TooLarge => "sample-too-large",
            PopOutcome::NoModel => "no-model",
        }
    }
}

type PopRow = (String, Option<usize>, PopOutcome);

fn popularity_csv(rows: &[PopRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["pet".to_owned(), "users".to_owned(), "status".to_owned()];
    for m in Metric::ALL {
        let name = m.as_str();
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_sem"));
    }
    w.write_record(&header).expect("in-memory write");
    for (pet, users, outcome) in rows {
        let mut rec = vec![
            pet.clone(),
            users.map_or("NA".to_owned(), |u| u.to_string()),
            outcome.status().to_owned(),
        ];
        for m in Metric::ALL {
            match outcome {
                PopOutcome::Estimate(e) => {
                    rec.push(e.mean(m).to_string());
                    rec.push(e.sem(m).to_string());
                }
                _ => rec.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn popularity_text(rows: &[PopRow]) -> String {
    let width = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(3).max(3);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>7}  {:>15}  {:>15}  {:>15}",
        "PET", "users", "H", "%≤1", "%≤10"
    );
    for (pet, users, outcome) in rows {
        let users = users.map_or("NA".to_owned(), |u| u.to_string());
        match outcome {
            PopOutcome::Estimate(e) => {
                let cell = |m| format!("{:.3}±{:.3}", e.mean(m), e.sem(m));
                let _ = writeln!(
                    out,
                    "{pet:<width$}  {users:>7}  {:>15}  {:>15}  {:>15}",
                    cell(Metric::Entropy),
                    cell(Metric::PctLe1),
                    cell(Metric::PctLe10)
                );
            }
            other => {
                let _ = writeln!(out, "{pet:<width$}  {users:>7}  skipped ({})", other.status());
            }
        }
    }
    out
}
