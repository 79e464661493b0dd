//! Compiles and runs a small C program against the generated header and
//! the static library. Skipped when no C compiler is on the path.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "fpeval.h"

int main(void) {
    size_t counts[2] = {2, 1};
    double h = 0.0;
    if (fp_entropy_from_counts(counts, 2, &h) != FP_STATUS_OK) return 1;
    if (h < 0.918295834054489 || h > 0.91829583405449) return 2;

    FpSpoofStrategy s = fp_strategy_tor_default();
    uint32_t w = 0, hh = 0;
    if (fp_spoof(&s, 1440, 900, &w, &hh) != FP_STATUS_OK || w != 1000 || hh != 900) return 3;

    FpDataset *d = NULL;
    if (fp_dataset_load("/nonexistent/x.jsonl", FP_FORMAT_JSONL, &d) != FP_STATUS_IO) return 4;
    if (d != NULL || fp_last_error_message()[0] == '\0') return 5;

    FpMaskModel *m = NULL;
    if (fp_model_tor_handcrafted(&m) != FP_STATUS_OK) return 6;
    if (fp_model_masked_count(m) != 21) return 7;
    fp_model_free(m);
    printf("ok %s\n", fp_version());
    return 0;
}
"#;

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc)
        .arg("--version")
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|_| cc)
}

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

/// Directory holding the library artifacts of the current profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_is_valid_c() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(&src, "#include \"fpeval.h\"\n").unwrap();
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_dir())
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let lib = artifact_dir().join("libfpeval_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-I"])
        .arg(header_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
