use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use fpeval::fpmodel::{save_dataset, DatasetFormat};
use fpeval::hybrid::{evaluate_pet, InconclusivePolicy};
use fpeval::maskinfer::{StatParams, VerdictStatus};
use fpeval::resolution::{score_strategy, tor_handcrafted_model, SpoofStrategy};
use fpeval::syngen::{generate_corpus, generate_log, preset};
use fpeval_ffi::*;

fn cstr(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fp_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn write_corpus(dir: &Path, n: usize) -> std::path::PathBuf {
    let mut spec = preset("firefox-like", n, 3).unwrap();
    spec.js_disabled_fraction = 0.1;
    let (d, _) = generate_corpus(&spec).unwrap();
    let p = dir.join("corpus.jsonl");
    save_dataset(&d, &p, DatasetFormat::Jsonl).unwrap();
    p
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(fp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn entropy_and_errors() {
    let mut h = 0.0;
    let counts = [2usize, 1];
    assert_eq!(
        unsafe { fp_entropy_from_counts(counts.as_ptr(), 2, &mut h) },
        FpStatus::Ok
    );
    assert_eq!(h, 0.9182958340544896);
    assert_eq!(
        unsafe { fp_entropy_from_counts(counts.as_ptr(), 0, &mut h) },
        FpStatus::Domain
    );
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { fp_entropy_from_counts(ptr::null(), 2, &mut h) },
        FpStatus::NullArgument
    );
}

#[test]
fn dataset_lifecycle_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = cstr(&write_corpus(dir.path(), 400));
    let mut d: *mut FpDataset = ptr::null_mut();
    assert_eq!(
        unsafe { fp_dataset_load(path.as_ptr(), FpFormat::Auto, &mut d) },
        FpStatus::Ok
    );
    assert_eq!(unsafe { fp_dataset_len(d) }, 400);

    let mut prepared: *mut FpDataset = ptr::null_mut();
    assert_eq!(unsafe { fp_dataset_prepare(d, &mut prepared) }, FpStatus::Ok);
    let kept = unsafe { fp_dataset_len(prepared) };
    assert!(kept < 400 && kept > 300, "{kept}");

    let (mut chrome, mut firefox) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(
        unsafe { fp_dataset_split(prepared, &mut chrome, &mut firefox) },
        FpStatus::Ok
    );
    assert_eq!(unsafe { fp_dataset_len(chrome) }, 0);
    assert_eq!(unsafe { fp_dataset_len(firefox) }, kept);

    let mut t = FpTrackability {
        n: 0,
        entropy_bits: 0.0,
        pct_le_1: 0.0,
        pct_le_10: 0.0,
    };
    assert_eq!(unsafe { fp_trackability(firefox, &mut t) }, FpStatus::Ok);
    assert_eq!(t.n, kept);

    let mut tor: *mut FpMaskModel = ptr::null_mut();
    assert_eq!(unsafe { fp_model_tor_handcrafted(&mut tor) }, FpStatus::Ok);
    assert_eq!(unsafe { fp_model_masked_count(tor) }, 21);

    let mut r = FpHybridReport {
        before: t,
        after: t,
        eff_entropy: 0.0,
        eff_pct_le_1: 0.0,
        eff_pct_le_10: 0.0,
    };
    assert_eq!(
        unsafe { fp_evaluate_pet(firefox, tor, FpPolicy::InconclusiveAsMasked, &mut r) },
        FpStatus::Ok
    );

    let lib = fpeval::fpmodel::load_dataset(&dir.path().join("corpus.jsonl"), DatasetFormat::Jsonl).unwrap();
    let lib =
        fpeval::fpmodel::split_by_browser(&fpeval::fpmodel::sanitize(&fpeval::fpmodel::dedupe_by_cookie(&lib)).0).1;
    let want = evaluate_pet(&lib, &tor_handcrafted_model(), InconclusivePolicy::AsMasked).unwrap();
    assert_eq!(r.after.entropy_bits, want.after.entropy_bits);
    assert_eq!(r.eff_entropy, want.before.entropy_bits - want.after.entropy_bits);

    let s = fp_strategy_tor_default();
    let mut score = FpStrategyScore {
        entropy_bits: 0.0,
        pct_le_1: 0.0,
        pct_le_10: 0.0,
        abs_loss: 0.0,
        pct_loss: 0.0,
    };
    assert_eq!(unsafe { fp_score_strategy(firefox, tor, &s, &mut score) }, FpStatus::Ok);
    let want = score_strategy(&lib, &tor_handcrafted_model(), &SpoofStrategy::TOR_DEFAULT).unwrap();
    assert_eq!(score.abs_loss, want.abs_loss);
    assert_eq!(score.entropy_bits, want.entropy_bits);

    let mut est = std::mem::MaybeUninit::<FpEstimate>::uninit();
    assert_eq!(
        unsafe {
            fp_popularity_evaluate(
                firefox,
                tor,
                FpPolicy::InconclusiveAsMasked,
                kept + 1,
                10,
                0,
                est.as_mut_ptr(),
            )
        },
        FpStatus::SampleTooLarge
    );
    assert_eq!(
        unsafe {
            fp_popularity_evaluate(
                firefox,
                tor,
                FpPolicy::InconclusiveAsMasked,
                50,
                10,
                0,
                est.as_mut_ptr(),
            )
        },
        FpStatus::Ok
    );
    let est = unsafe { est.assume_init() };
    assert_eq!((est.samples, est.sample_size), (10, 50));

    let out = cstr(&dir.path().join("out.csv"));
    assert_eq!(
        unsafe { fp_dataset_save(firefox, out.as_ptr(), FpFormat::Auto) },
        FpStatus::Ok
    );
    assert!(dir.path().join("out.csv").exists());

    unsafe {
        fp_model_free(tor);
        for h in [d, prepared, chrome, firefox] {
            fp_dataset_free(h);
        }
        fp_dataset_free(ptr::null_mut());
    }
}

#[test]
fn load_errors_carry_messages() {
    let dir = tempfile::tempdir().unwrap();
    let missing = cstr(&dir.path().join("missing.jsonl"));
    let mut d: *mut FpDataset = ptr::null_mut();
    assert_eq!(
        unsafe { fp_dataset_load(missing.as_ptr(), FpFormat::Jsonl, &mut d) },
        FpStatus::Io
    );
    assert!(d.is_null());
    assert!(last_error().contains("missing.jsonl"), "{}", last_error());

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{}").unwrap();
    let mut m: *mut FpMaskModel = ptr::null_mut();
    assert_eq!(unsafe { fp_model_load(cstr(&bad).as_ptr(), &mut m) }, FpStatus::Format);
    assert_eq!(
        unsafe { fp_dataset_load(ptr::null(), FpFormat::Jsonl, &mut d) },
        FpStatus::NullArgument
    );
}

#[test]
fn inference_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let map = [("a", VerdictStatus::MaskedVary), ("b", VerdictStatus::Unmasked)]
        .iter()
        .map(|(a, s)| (a.to_string().into(), *s))
        .collect();
    let (log, _) = generate_log(&[("p".into(), map)], 3, 2, 1, &StatParams::default()).unwrap();
    let lp = dir.path().join("log.jsonl");
    log.save(&lp).unwrap();

    let mut l: *mut FpObservationLog = ptr::null_mut();
    assert_eq!(unsafe { fp_log_load(cstr(&lp).as_ptr(), &mut l) }, FpStatus::Ok);
    let pet = CString::new("p").unwrap();
    let mut m: *mut FpMaskModel = ptr::null_mut();
    assert_eq!(
        unsafe { fp_infer_model(l, pet.as_ptr(), 0.75, 0.1, &mut m) },
        FpStatus::Ok
    );
    assert_eq!(unsafe { fp_model_masked_count(m) }, 1);
    assert_eq!(
        unsafe { fp_infer_model(l, pet.as_ptr(), 1.5, 0.1, &mut m) },
        FpStatus::Config
    );
    let other = CString::new("q").unwrap();
    let mut m2: *mut FpMaskModel = ptr::null_mut();
    assert_eq!(
        unsafe { fp_infer_model(l, other.as_ptr(), 0.75, 0.1, &mut m2) },
        FpStatus::InsufficientData
    );

    let mp = dir.path().join("m.json");
    assert_eq!(unsafe { fp_model_save(m, cstr(&mp).as_ptr()) }, FpStatus::Ok);
    assert_eq!(
        fpeval::maskinfer::MaskModel::load(&mp).unwrap().status("a"),
        Some(VerdictStatus::MaskedVary)
    );
    unsafe {
        fp_model_free(m);
        fp_log_free(l);
    }
}

#[test]
fn spoofing() {
    let s = fp_strategy_tor_default();
    let (mut w, mut h) = (0, 0);
    assert_eq!(unsafe { fp_spoof(&s, 1440, 900, &mut w, &mut h) }, FpStatus::Ok);
    assert_eq!((w, h), (1000, 900));
    assert_eq!(unsafe { fp_spoof(&s, 0, 900, &mut w, &mut h) }, FpStatus::Domain);
    let mut n = 0;
    assert_eq!(unsafe { fp_strategy_sets(&s, &mut n) }, FpStatus::Ok);
    assert_eq!(n, 50);
    let bad = FpSpoofStrategy {
        cap_w: 100,
        cap_h: 100,
        quant_w: 0,
        quant_h: 10,
    };
    assert_eq!(unsafe { fp_strategy_sets(&bad, &mut n) }, FpStatus::Config);
}
