mod common;

use std::collections::BTreeMap;
use std::path::Path;

use common::{masking, verdict_map};
use fpeval::fpmodel::{AttributeName, AttributeValue, Fingerprint};
use fpeval::maskinfer::{
    baseline_varies, classify, infer_model, rank_preorder, Boundary, MaskModel, Observation, ObservationLog,
    StatParams, Subject, VerdictStatus,
};
use fpeval::syngen::generate_log;
use fpeval::Error;

use VerdictStatus::*;

fn obs(platform: &str, subject: Subject, b: Boundary, epoch: u32, value: AttributeValue) -> Observation {
    Observation {
        platform: platform.into(),
        subject,
        boundary: b,
        epoch,
        fingerprint: Fingerprint::new().with("x", value),
    }
}

fn pet() -> Subject {
    Subject::Pet("p".into())
}

/// Both subjects on each platform over two reload epochs, with the given
/// (baseline, pet) values per platform.
fn paired(values: &[(AttributeValue, AttributeValue)]) -> ObservationLog {
    let mut out = Vec::new();
    for (i, (b, p)) in values.iter().enumerate() {
        let name = format!("pl{i}");
        for e in 0..2 {
            out.push(obs(&name, Subject::Baseline, Boundary::Reload, e, b.clone()));
            out.push(obs(&name, pet(), Boundary::Reload, e, p.clone()));
        }
    }
    ObservationLog::new(out)
}

fn t(s: &str) -> AttributeValue {
    AttributeValue::text(s)
}

#[test]
fn cross_platform_difference_is_not_variation() {
    let log = paired(&[(t("a"), t("a")), (t("b"), t("b"))]);
    assert!(!baseline_varies(&log, "x").unwrap());
    let mut log = log;
    log.observations
        .push(obs("pl0", Subject::Baseline, Boundary::Reload, 2, t("w")));
    assert!(baseline_varies(&log, "x").unwrap());
    assert!(matches!(baseline_varies(&log, "nope"), Err(Error::NotObserved(_))));
}

#[test]
fn geometric_threshold() {
    let p = StatParams::default();
    let k1 = paired(&[(t("a"), t("a")), (t("a"), t("a"))]);
    assert_eq!(
        classify(&k1, "p", "x", &p).unwrap().status,
        InconclusiveInsufficientDiversity
    );
    let k2 = paired(&[(t("a"), t("a")), (t("b"), t("b"))]);
    let v = classify(&k2, "p", "x", &p).unwrap();
    assert_eq!((v.status, v.confidence), (Unmasked, Some(0.1)));
}

#[test]
fn pet_variation_wins_over_standardization() {
    let mut log = paired(&[(t("a"), t("z")), (t("b"), t("b"))]);
    log.observations.push(obs("pl1", pet(), Boundary::Domain, 0, t("r0")));
    log.observations.push(obs("pl1", pet(), Boundary::Domain, 1, t("r1")));
    assert_eq!(
        classify(&log, "p", "x", &StatParams::default()).unwrap().status,
        MaskedVary
    );
}

#[test]
fn partial_standardization_on_one_of_six() {
    let mut v: Vec<_> = (0..6).map(|i| (t(&format!("v{i}")), t(&format!("v{i}")))).collect();
    v[4].1 = t("spoofed");
    let verdict = classify(&paired(&v), "p", "x", &StatParams::default()).unwrap();
    assert_eq!(verdict.status, MaskedStandardize);
    assert!(!verdict.evidence.is_empty());
}

#[test]
fn suppression_is_standardization() {
    let log = paired(&[(t("a"), AttributeValue::Missing), (t("b"), t("b"))]);
    assert_eq!(
        classify(&log, "p", "x", &StatParams::default()).unwrap().status,
        MaskedStandardize
    );
}

#[test]
fn null_pet_is_all_unmasked() {
    let m = verdict_map(&[("a", Unmasked), ("b", Unmasked), ("c", Unmasked)]);
    let (log, _) = generate_log(&[("null".into(), m.clone())], 4, 2, 3, &StatParams::default()).unwrap();
    let model = infer_model(&log, "null", &StatParams::default()).unwrap();
    assert_eq!(model.statuses(), m);
    assert!(model.verdicts.values().all(|v| v.confidence == Some(0.1)));
}

#[test]
fn tor_column_pattern_replayed() {
    // + masked, × unmasked, · inconclusive, shaped like a Firefox tool column.
    let pattern = [
        ("canvas fingerprint", MaskedStandardize),
        ("h.User-Agent", MaskedStandardize),
        ("timezone", MaskedStandardize),
        ("screen.Width", MaskedStandardize),
        ("webGL.Renderer", MaskedStandardize),
        ("javascript fonts", MaskedStandardize),
        ("platform", Unmasked),
        ("h.Accept", InconclusiveInsufficientDiversity),
        ("plugins", InconclusiveInsufficientDiversity),
        ("screen.Left", InconclusiveBaselineVaries),
        ("webGL.Data Hash", MaskedVary),
    ];
    let m = verdict_map(&pattern);
    let (log, truth) = generate_log(&[("tor".into(), m.clone())], 6, 3, 17, &StatParams::default()).unwrap();
    let model = infer_model(&log, "tor", &StatParams::default()).unwrap();
    assert_eq!(model.statuses(), truth.verdicts["tor"]);
    let symbols: String = model.verdicts.values().map(|v| v.status.symbol()).collect();
    assert_eq!(symbols.chars().filter(|c| *c == '+').count(), 7);
}

#[test]
fn log_file_round_trip_and_errors() {
    let m = verdict_map(&[("a", MaskedVary), ("b", Unmasked)]);
    let (log, _) = generate_log(&[("x".into(), m)], 3, 2, 1, &StatParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("log.jsonl");
    log.save(&p).unwrap();
    assert_eq!(ObservationLog::load(&p).unwrap(), log);

    let bad =
        "{\"platform\":\"p\",\"subject\":\"baseline\",\"boundary\":\"reload\",\"epoch\":0,\"attrs\":{},\"extra\":1}\n";
    match ObservationLog::parse(bad, Path::new("mem")) {
        Err(e @ Error::Format { .. }) => assert!(e.to_string().contains("mem:1"), "{e}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_pet_or_pairing_is_insufficient_data() {
    let log = ObservationLog::new(vec![
        obs("a", Subject::Baseline, Boundary::Reload, 0, t("v")),
        obs("b", pet(), Boundary::Reload, 0, t("v")),
    ]);
    assert!(matches!(
        classify(&log, "p", "x", &StatParams::default()),
        Err(Error::InsufficientData(_))
    ));
    assert!(matches!(
        infer_model(&log, "q", &StatParams::default()),
        Err(Error::InsufficientData(_))
    ));
    let model = infer_model(&log, "p", &StatParams::default()).unwrap();
    let v = &model.verdicts[&AttributeName::from("x")];
    assert_eq!(v.status, InconclusiveInsufficientDiversity);
    assert!(v.reason.as_deref().unwrap().contains("no platform"));
}

#[test]
fn model_file_contract() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    std::fs::write(
        &p,
        r#"{"pet":"x","params":{"f":0.5,"alpha":0.05},"verdicts":{"a":{"status":"unmasked"},"b":{"status":"masked_vary","reason":"r"}}}"#,
    )
    .unwrap();
    let m = MaskModel::load(&p).unwrap();
    assert_eq!(m.verdicts[&AttributeName::from("a")].confidence, Some(0.05));
    assert_eq!(m.status("b"), Some(MaskedVary));
    std::fs::write(&p, r#"{"pet":"x","verdicts":{"a":{"status":"maybe"}}}"#).unwrap();
    assert!(matches!(MaskModel::load(&p), Err(Error::Format { .. })));
}

#[test]
fn nested_seven_tool_chain() {
    let universe: Vec<String> = (0..28).map(|i| format!("attr{i:02}")).collect();
    let counts = [("tor", 21), ("a", 9), ("b", 8), ("c", 6), ("d", 4), ("e", 2), ("f", 0)];
    let models: Vec<MaskModel> = counts
        .iter()
        .rev()
        .map(|(p, n)| masking(p, &universe[..*n], &universe))
        .collect();
    let r = rank_preorder(&models);
    let got: BTreeMap<_, _> = r.masked_counts.iter().cloned().collect();
    for (p, n) in counts {
        assert_eq!(got[p], n);
    }
    assert_eq!(r.classes.len(), 7);
    assert!(r.is_chain());
    assert_eq!(r.classes[0], vec!["tor".to_owned()]);
    assert_eq!(r.dominance.len(), 7 * 8 / 2);
}
