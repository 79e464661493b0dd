#![allow(dead_code)]

use std::collections::BTreeMap;

use fpeval::fpmodel::{AttributeName, AttributeValue, Dataset, Fingerprint, Record};
use fpeval::maskinfer::{MaskModel, VerdictStatus};

/// Shannon entropy in bits straight from the definition, over labels.
pub fn brute_entropy<T: PartialEq>(items: &[T]) -> f64 {
    let n = items.len() as f64;
    let mut h = 0.0;
    for (i, x) in items.iter().enumerate() {
        if items[..i].contains(x) {
            continue;
        }
        let c = items.iter().filter(|y| *y == x).count() as f64;
        h -= (c / n) * (c / n).log2();
    }
    h
}

/// Group sizes by pairwise comparison, sorted ascending.
pub fn brute_group_sizes<T: PartialEq>(items: &[T]) -> Vec<usize> {
    let mut assigned = vec![false; items.len()];
    let mut sizes = Vec::new();
    for i in 0..items.len() {
        if assigned[i] {
            continue;
        }
        let mut size = 0;
        for j in i..items.len() {
            if !assigned[j] && items[i] == items[j] {
                assigned[j] = true;
                size += 1;
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable();
    sizes
}

pub fn brute_pct_le<T: PartialEq>(items: &[T], k: usize) -> f64 {
    let small = items
        .iter()
        .filter(|x| items.iter().filter(|y| y == x).count() <= k)
        .count();
    small as f64 / items.len() as f64
}

pub fn record(pairs: &[(&str, AttributeValue)]) -> Record {
    let fp = pairs
        .iter()
        .fold(Fingerprint::new(), |fp, (k, v)| fp.with(*k, v.clone()));
    Record::new(fp, None, true)
}

pub fn int_dataset(rows: &[Vec<i64>]) -> Dataset {
    let recs = rows
        .iter()
        .map(|row| {
            let fp = row.iter().enumerate().fold(Fingerprint::new(), |fp, (i, v)| {
                fp.with(format!("a{i}"), AttributeValue::Integer(*v))
            });
            Record::new(fp, None, true)
        })
        .collect();
    Dataset::new(recs, "test")
}

pub fn model_from(pet: &str, statuses: &[(&str, VerdictStatus)]) -> MaskModel {
    statuses
        .iter()
        .fold(MaskModel::new(pet), |m, (a, s)| m.with_status(*a, *s))
}

pub fn masking(pet: &str, masked: &[String], universe: &[String]) -> MaskModel {
    universe.iter().fold(MaskModel::new(pet), |m, a| {
        let s = if masked.contains(a) {
            VerdictStatus::MaskedStandardize
        } else {
            VerdictStatus::Unmasked
        };
        m.with_status(a.as_str(), s)
    })
}

pub fn verdict_map(pairs: &[(&str, VerdictStatus)]) -> BTreeMap<AttributeName, VerdictStatus> {
    pairs.iter().map(|(a, s)| (AttributeName::from(*a), *s)).collect()
}

pub mod cli {
    use std::collections::BTreeMap;
    use std::path::Path;
    use std::process::{Command, Output};

    pub fn fpeval(dir: &Path, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_fpeval"))
            .args(args)
            .current_dir(dir)
            .env_remove("FPEVAL_THREADS")
            .output()
            .expect("spawn fpeval")
    }

    /// Runs and panics with stderr unless the exit code is 0.
    pub fn ok(dir: &Path, args: &[&str]) -> String {
        let out = fpeval(dir, args);
        assert!(
            out.status.success(),
            "fpeval {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).expect("utf-8 stdout")
    }

    pub const PETS_JSON: &str = r#"{
  "tor": {"canvas fingerprint": "masked_standardize", "timezone": "masked_standardize", "webGL.Data Hash": "masked_vary",
          "platform": "unmasked", "plugins": "inconclusive_insufficient_diversity", "language": "masked_standardize"},
  "brave": {"canvas fingerprint": "masked_vary", "timezone": "unmasked", "webGL.Data Hash": "unmasked",
          "platform": "unmasked", "plugins": "inconclusive_insufficient_diversity", "language": "unmasked"}
}"#;

    /// gen → ingest → infer → evaluate → sweep inside `dir`; returns every
    /// artifact by relative path.
    pub fn pipeline(dir: &Path, seed: &str) -> BTreeMap<String, Vec<u8>> {
        std::fs::write(dir.join("pets.json"), PETS_JSON).unwrap();
        ok(
            dir,
            &[
                "gen",
                "corpus",
                "--preset",
                "firefox-like",
                "--n",
                "1500",
                "--seed",
                seed,
                "--out",
                "corpus.jsonl",
                "--truth",
                "corpus-truth.json",
            ],
        );
        ok(
            dir,
            &[
                "gen",
                "log",
                "--pets",
                "pets.json",
                "--seed",
                seed,
                "--out",
                "log.jsonl",
                "--truth",
                "log-truth.json",
            ],
        );
        ok(dir, &["ingest", "--input", "corpus.jsonl", "--out-dir", "ingest"]);
        ok(
            dir,
            &[
                "infer",
                "--log",
                "log.jsonl",
                "--pet",
                "tor",
                "--browser",
                "firefox",
                "--out",
                "tor.json",
            ],
        );
        ok(
            dir,
            &["infer", "--log", "log.jsonl", "--pet", "brave", "--out", "brave.json"],
        );
        ok(
            dir,
            &[
                "evaluate",
                "--data",
                "ingest/firefox.jsonl",
                "--model",
                "tor.json",
                "brave.json",
                "--out",
                "table.csv",
                "--json",
                "table.json",
            ],
        );
        ok(
            dir,
            &[
                "sweep",
                "--data",
                "ingest/firefox.jsonl",
                "--quanta",
                "190x90..200x100",
                "--out",
                "sweep.csv",
                "--pareto",
                "pareto.csv",
            ],
        );
        let mut out = BTreeMap::new();
        collect(dir, dir, &mut out);
        out
    }

    fn collect(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                collect(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
}
