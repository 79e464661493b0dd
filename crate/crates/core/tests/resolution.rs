mod common;

use std::collections::BTreeSet;

use common::record;
use fpeval::fpmodel::{AttributeValue, Dataset, SCREEN_HEIGHT, SCREEN_WIDTH};
use fpeval::hybrid::{evaluate_pet, InconclusivePolicy};
use fpeval::maskinfer::{MaskModel, VerdictStatus};
use fpeval::resolution::{
    candidates, pareto_improvements, parse_sweep_csv, score_strategy, strategy_model, strategy_sets, sweep, sweep_csv,
    tor_handcrafted_model, QuantaRange, SpoofStrategy, StrategyScore, SCREEN_ATTRIBUTES,
};
use fpeval::syngen::{generate_corpus, preset, CorpusSpec, Weighted};
use fpeval::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Floor to a multiple, cap, clamp up; written out longhand.
fn oracle_dim(x: u64, cap: u64, q: u64) -> u64 {
    let mut v = 0;
    while v + q <= x {
        v += q;
    }
    if v == 0 {
        q
    } else if v > cap {
        cap
    } else {
        v
    }
}

fn screen_record(w: i64, h: i64, extra: i64) -> fpeval::fpmodel::Record {
    record(&[
        (SCREEN_WIDTH, AttributeValue::Integer(w)),
        (SCREEN_HEIGHT, AttributeValue::Integer(h)),
        ("other", AttributeValue::Integer(extra)),
    ])
}

#[test]
fn spoof_examples() {
    let t = SpoofStrategy::TOR_DEFAULT;
    assert_eq!(t.spoof(1440, 900), (1000, 900));
    assert_eq!(t.spoof(6000, 3000), (1000, 1000));
    assert_eq!(t.spoof(450, 721), (400, 700));
    assert_eq!(t.spoof(150, 50), (200, 100));
    assert_eq!(strategy_sets(&t), 50);
    assert_eq!(strategy_sets(&SpoofStrategy::new(1000, 1000, 1000, 1000).unwrap()), 1);
    assert!(matches!(SpoofStrategy::new(100, 100, 0, 10), Err(Error::Config(_))));
    assert!(matches!(SpoofStrategy::new(100, 100, 200, 10), Err(Error::Config(_))));
}

fn enumerate_outputs(s: &SpoofStrategy) -> usize {
    let ws: BTreeSet<u64> = (1..=3 * u64::from(s.cap_w))
        .map(|w| oracle_dim(w, s.cap_w.into(), s.quant_w.into()))
        .collect();
    let hs: BTreeSet<u64> = (1..=3 * u64::from(s.cap_h))
        .map(|h| oracle_dim(h, s.cap_h.into(), s.quant_h.into()))
        .collect();
    ws.len() * hs.len()
}

#[test]
fn strategy_sets_match_enumeration() {
    let fixed = [
        SpoofStrategy::TOR_DEFAULT,
        SpoofStrategy::new(1350, 1000, 269, 160).unwrap(),
        SpoofStrategy::new(1550, 1000, 200, 193).unwrap(),
        SpoofStrategy::new(7, 5, 3, 5).unwrap(),
    ];
    for s in fixed {
        assert_eq!(strategy_sets(&s), enumerate_outputs(&s) as u64, "{s}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (cw, ch) = (rng.gen_range(1..400), rng.gen_range(1..400));
        let s = SpoofStrategy::new(cw, ch, rng.gen_range(1..=cw), rng.gen_range(1..=ch)).unwrap();
        assert_eq!(strategy_sets(&s), enumerate_outputs(&s) as u64, "{s}");
    }
}

/// 1,000 platforms uniform over a fixed resolution list.
fn uniform_platforms(n: usize, seed: u64) -> (Dataset, Vec<(u32, u32)>) {
    let known = [
        (1920, 1080),
        (1366, 768),
        (1440, 900),
        (1536, 864),
        (1280, 1024),
        (2560, 1440),
        (800, 600),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res: Vec<(u32, u32)> = (0..n).map(|_| known[rng.gen_range(0..known.len())]).collect();
    let recs = res
        .iter()
        .map(|&(w, h)| screen_record(w.into(), h.into(), rng.gen_range(0..50)))
        .collect();
    (Dataset::new(recs, "uniform"), res)
}

#[test]
fn loss_matches_per_record_recomputation() {
    let (d, res) = uniform_platforms(1000, 1);
    for s in [
        SpoofStrategy::TOR_DEFAULT,
        SpoofStrategy::new(1350, 1000, 269, 160).unwrap(),
        SpoofStrategy::new(3000, 3000, 7, 13).unwrap(),
    ] {
        let score = score_strategy(&d, &MaskModel::new("b"), &s).unwrap();
        let (mut abs, mut pct) = (0.0, 0.0);
        for &(w, h) in &res {
            let (w, h) = (u64::from(w), u64::from(h));
            let area =
                oracle_dim(w, s.cap_w.into(), s.quant_w.into()) * oracle_dim(h, s.cap_h.into(), s.quant_h.into());
            let lost = (w * h) as f64 - area as f64;
            abs += lost;
            pct += lost / (w * h) as f64;
        }
        assert!((score.abs_loss - abs / 1000.0).abs() < 1e-6, "{s}");
        assert!((score.pct_loss - pct / 1000.0).abs() < 1e-12, "{s}");
    }
}

#[test]
fn identity_spoof_reveals_true_resolution() {
    let d = generate_corpus(&preset("firefox-like", 800, 2).unwrap()).unwrap().0;
    let max_w = d.records.iter().map(|r| r.screen_w.unwrap()).max().unwrap();
    let max_h = d.records.iter().map(|r| r.screen_h.unwrap()).max().unwrap();
    let tor = tor_handcrafted_model();
    let s = SpoofStrategy::new(max_w, max_h, 1, 1).unwrap();
    let score = score_strategy(&d, &tor, &s).unwrap();
    assert_eq!((score.abs_loss, score.pct_loss), (0.0, 0.0));

    let mut reveal = tor.clone();
    for a in SCREEN_ATTRIBUTES {
        reveal.transforms.remove(a);
        reveal = reveal.with_status(a, VerdictStatus::Unmasked);
    }
    let truth = evaluate_pet(&d, &reveal, InconclusivePolicy::AsMasked).unwrap().after;
    assert_eq!(score.entropy_bits, truth.entropy_bits);
    assert_eq!(score.pct_le_1, truth.pct_le_1);
    assert_eq!(score.pct_le_10, truth.pct_le_10);
}

#[test]
fn default_strategy_reproduces_bundled_model() {
    let tor = tor_handcrafted_model();
    assert_eq!(strategy_model(&tor, &SpoofStrategy::TOR_DEFAULT), tor);
    let d = generate_corpus(&preset("firefox-like", 500, 9).unwrap()).unwrap().0;
    let via_model = evaluate_pet(&d, &tor, InconclusivePolicy::AsMasked).unwrap().after;
    let score = score_strategy(&d, &tor, &SpoofStrategy::TOR_DEFAULT).unwrap();
    assert_eq!(score.entropy_bits, via_model.entropy_bits);
}

#[test]
fn missing_resolution_lists_records() {
    let d = Dataset::new(
        vec![
            screen_record(800, 600, 0),
            screen_record(0, 600, 0),
            screen_record(800, -1, 0),
        ],
        "bad",
    );
    match score_strategy(&d, &MaskModel::new("b"), &SpoofStrategy::TOR_DEFAULT) {
        Err(Error::MissingResolution { records }) => assert_eq!(records, vec![1, 2]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sweep_agrees_with_direct_scoring() {
    let spec = CorpusSpec::new(600, 4)
        .with_attribute("a", Weighted::zipf((0..6).map(serde_json::Value::from).collect()))
        .with_attribute("b", Weighted::zipf((0..3).map(serde_json::Value::from).collect()));
    let d = generate_corpus(&spec).unwrap().0;
    let base = MaskModel::new("b").with_status("b", VerdictStatus::MaskedVary);
    let q: QuantaRange = "90x40..110x60".parse().unwrap();
    let caps = [(1000, 1000), (1350, 1000)];
    let fast = sweep(&d, &base, &caps, &q).unwrap();
    assert_eq!(fast.len(), 2 * 21 * 21);
    for (s, score) in &fast {
        assert_eq!(*score, score_strategy(&d, &base, s).unwrap(), "{s}");
    }
}

#[test]
fn candidate_counts() {
    let mut q: QuantaRange = "1x1..200x100".parse().unwrap();
    q.exclude.push((200, 100));
    assert_eq!(candidates(&[(1000, 1000)], &q).unwrap().len(), 19_999);
    let q: QuantaRange = "200x100..300x200".parse().unwrap();
    let c = candidates(&[(1350, 1000)], &q).unwrap();
    assert_eq!(c.len(), 10_201);
    assert_eq!((c[0].quant_w, c[0].quant_h), (200, 100));
    assert_eq!((c[1].quant_w, c[1].quant_h), (200, 101));
    assert_eq!(
        candidates(&[(1000, 1000)], &QuantaRange::point(200, 100))
            .unwrap()
            .len(),
        1
    );
    assert!(matches!(candidates(&[], &q), Err(Error::Config(_))));
}

fn score(h: f64) -> StrategyScore {
    StrategyScore {
        entropy_bits: h,
        pct_le_1: 0.1,
        pct_le_10: 0.2,
        abs_loss: 1000.0,
        pct_loss: 0.3,
    }
}

#[test]
fn pareto_is_strict_in_every_field() {
    let s = SpoofStrategy::TOR_DEFAULT;
    let reference = score(3.0);
    assert!(pareto_improvements(&[(s, reference)], &reference).is_empty());
    assert!(pareto_improvements(&[(s, score(2.9))], &reference).is_empty());
    let all_lower = StrategyScore {
        entropy_bits: 2.9,
        pct_le_1: 0.09,
        pct_le_10: 0.19,
        abs_loss: 999.0,
        pct_loss: 0.29,
    };
    assert_eq!(
        pareto_improvements(&[(s, reference), (s, all_lower)], &reference).len(),
        1
    );
}

#[test]
fn planted_dominating_strategies_survive() {
    // 1 record at width 600, 11 at 1000. The reference keeps them apart and
    // loses pixels on the wide ones; any quantum above 875 merges them
    // while losing fewer pixels on average.
    let mut recs = vec![screen_record(600, 1000, 0)];
    recs.extend((0..11).map(|_| screen_record(1000, 1000, 0)));
    let d = Dataset::new(recs, "planted");
    let base = MaskModel::new("b");
    let reference = score_strategy(&d, &base, &SpoofStrategy::new(1000, 1000, 300, 1000).unwrap()).unwrap();
    let q: QuantaRange = "300x1000..1000x1000".parse().unwrap();
    let results = sweep(&d, &base, &[(1000, 1000)], &q).unwrap();
    let kept: Vec<u32> = pareto_improvements(&results, &reference)
        .iter()
        .map(|(s, _)| s.quant_w)
        .collect();
    assert_eq!(kept, (876..=1000).collect::<Vec<_>>());
}

#[test]
fn sweep_csv_round_trip() {
    let (d, _) = uniform_platforms(200, 5);
    let q: QuantaRange = "100x50..104x53".parse().unwrap();
    let results = sweep(&d, &MaskModel::new("b"), &[(1000, 1000)], &q).unwrap();
    let text = sweep_csv(&results);
    assert_eq!(parse_sweep_csv(&text, "mem").unwrap(), results);
    assert!(parse_sweep_csv("a,b\n", "mem").is_err());
}
