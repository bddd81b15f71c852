use funcprobe_core::annotate::*;
use funcprobe_core::corpus::Payload;
use funcprobe_core::task::{Label, Task, TaskFormat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Likert oracle written out as a table lookup rather than a range match.
fn oracle_likert(n: u8) -> &'static str {
    ["", "c", "c", "n", "e", "e"][n as usize]
}

fn label_code(l: Label) -> &'static str {
    match l {
        Label::Entailment => "e",
        Label::Neutral => "n",
        Label::Contradiction => "c",
        Label::Natural => "natural",
        Label::Unnatural => "unnatural",
    }
}

/// Count-based majority: the value appearing at least twice.
fn oracle_majority<'a>(xs: &[&'a str]) -> Option<&'a str> {
    xs.iter().copied().find(|x| xs.iter().filter(|y| *y == x).count() >= 2)
}

#[test]
fn all_likert_triples() {
    let mut checked = 0;
    for a in 1..=5u8 {
        for b in 1..=5u8 {
            for c in 1..=5u8 {
                let vals = [ResponseValue::Likert(a), ResponseValue::Likert(b), ResponseValue::Likert(c)];
                let got = aggregate_nli("x", &vals).unwrap();
                let want = oracle_majority(&[oracle_likert(a), oracle_likert(b), oracle_likert(c)]);
                match want {
                    Some(l) => assert_eq!(got.final_label().map(label_code), Some(l), "{a}{b}{c}"),
                    None => assert_eq!(got.discard_reason(), Some(DiscardReason::NoMajority), "{a}{b}{c}"),
                }
                let rotated = aggregate_nli("x", &[vals[2], vals[0], vals[1]]).unwrap();
                assert_eq!(rotated, got);
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 125);
}

#[test]
fn all_acceptability_triples() {
    let options = [("natural", ResponseValue::Natural), ("unnatural", ResponseValue::Unnatural), ("neither", ResponseValue::Neither)];
    let mut checked = 0;
    for expected in [Label::Natural, Label::Unnatural] {
        for a in options {
            for b in options {
                for c in options {
                    let got = aggregate_acceptability("x", &[a.1, b.1, c.1], expected).unwrap();
                    match oracle_majority(&[a.0, b.0, c.0]) {
                        None => assert_eq!(got.discard_reason(), Some(DiscardReason::NoMajority)),
                        Some(m) if m == label_code(expected) => assert_eq!(got.final_label(), Some(expected)),
                        Some(_) => assert_eq!(got.discard_reason(), Some(DiscardReason::LabelMismatch)),
                    }
                    assert_eq!(got.unanimous, a.0 == b.0 && b.0 == c.0);
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 54);
}

#[test]
fn nonsense_always_discards() {
    for n in 1..=5 {
        let r = aggregate_nli("x", &[ResponseValue::Likert(n), ResponseValue::Nonsense, ResponseValue::Likert(n)]).unwrap();
        assert_eq!(r.discard_reason(), Some(DiscardReason::NonsenseFlagged));
    }
}

fn response(item: &str, k: usize, value: ResponseValue) -> AnnotationResponse {
    AnnotationResponse { annotator_id: format!("a{k}"), item_id: item.into(), value, timestamp: k as u64 }
}

/// Agreement from every ordered pair of distinct responses.
fn oracle_agreement(items: &[(Vec<&str>, &str)]) -> (f64, f64, f64) {
    let n = items.len() as f64;
    let mut pair = 0.0;
    let mut unan = 0.0;
    let mut acc = 0.0;
    for (rs, fin) in items {
        let mut agree = 0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j && rs[i] == rs[j] {
                    agree += 1;
                }
            }
        }
        pair += agree as f64 / 6.0;
        unan += if agree == 6 { 1.0 } else { 0.0 };
        acc += rs.iter().filter(|r| *r == fin).count() as f64 / 3.0;
    }
    (pair / n, unan / n, acc / n)
}

#[test]
fn agreement_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for set in 0..1000 {
        let n_items = rng.random_range(1..40);
        let mut results = Vec::new();
        let mut responses = Vec::new();
        let mut oracle_items = Vec::new();
        for i in 0..n_items {
            let id = format!("s{set}-{i}");
            let vals: Vec<ResponseValue> = (0..3).map(|_| ResponseValue::Likert(rng.random_range(1..=5))).collect();
            let res = aggregate_nli(&id, &vals).unwrap();
            let Some(fin) = res.final_label() else { continue };
            oracle_items.push((vals.iter().map(|v| match v {
                ResponseValue::Likert(n) => oracle_likert(*n),
                _ => unreachable!(),
            }).collect::<Vec<_>>(), label_code(fin)));
            responses.extend(vals.iter().enumerate().map(|(k, v)| response(&id, k, *v)));
            results.push(res);
        }
        if results.is_empty() {
            continue;
        }
        let got = compute_agreement(&results, &responses).unwrap();
        let (p, u, a) = oracle_agreement(&oracle_items);
        assert!((got.pairwise_agreement - p).abs() < 1e-12);
        assert!((got.unanimous_fraction - u).abs() < 1e-12);
        assert!((got.individual_accuracy - a).abs() < 1e-12);
        assert_eq!(got.dataset_size, results.len());
    }
}

#[test]
fn report_row_fixture() {
    // 238 unanimous items and 353 with a 2/3 majority.
    let mut results = Vec::new();
    let mut responses = Vec::new();
    for i in 0..591 {
        let id = format!("neg-{i}");
        let vals = if i < 238 {
            [ResponseValue::Likert(5); 3]
        } else {
            [ResponseValue::Likert(5), ResponseValue::Likert(4), ResponseValue::Likert(1)]
        };
        results.push(aggregate_nli(&id, &vals).unwrap());
        responses.extend(vals.iter().enumerate().map(|(k, v)| response(&id, k, *v)));
    }
    let stats = compute_agreement(&results, &responses).unwrap();
    assert_eq!(stats.format_row(), "60.2 40.3 80.1 591");
}

fn acceptability_items(n: usize) -> Vec<AnnotationItem> {
    (0..n)
        .map(|i| AnnotationItem {
            item_id: format!("coordination-{i}"),
            task: Task::Coordination,
            payload: Payload::Single { text: format!("sentence {i}") },
            expected_label: Some(if i % 2 == 1 { Label::Unnatural } else { Label::Natural }),
        })
        .collect()
}

#[test]
fn simulated_retention_follows_binomial() {
    let items = acceptability_items(500);
    let profile = AnnotatorProfile::uniform(8, 0.8);
    let mut pooled = 0.0;
    for seed in 0..20 {
        let rs = simulate_responses(&items, &profile, seed).unwrap();
        let f = aggregate_all(&items, &rs).unwrap().retained_fraction();
        assert!((0.80..=0.95).contains(&f), "seed {seed}: {f}");
        pooled += f / 20.0;
    }
    assert!((pooled - 0.896).abs() <= 0.04, "{pooled}");
}

#[test]
fn perfect_annotators_give_balanced_set() {
    let items = acceptability_items(500);
    let rs = simulate_responses(&items, &AnnotatorProfile::uniform(5, 1.0), 7).unwrap();
    let agg = aggregate_all(&items, &rs).unwrap();
    assert_eq!(agg.retained_fraction(), 1.0);
    let b = balance_dataset(&agg.results, TaskFormat::AcceptabilitySingle, 250, 7);
    let unnatural = b.kept.iter().filter(|r| r.final_label() == Some(Label::Unnatural)).count();
    assert_eq!((unnatural, b.kept.len() - unnatural), (250, 250));
    let stats = compute_agreement(&b.kept, &rs).unwrap();
    assert_eq!(stats.format_row(), "100.0 100.0 100.0 500");
}

#[test]
fn over_collection_and_pending() {
    let items = acceptability_items(2);
    let mut rs: Vec<AnnotationResponse> =
        (0..3).map(|k| response("coordination-0", k, ResponseValue::Natural)).collect();
    // A late fourth response does not count.
    rs.push(AnnotationResponse { timestamp: 99, ..response("coordination-0", 9, ResponseValue::Unnatural) });
    rs.push(response("coordination-1", 0, ResponseValue::Unnatural));
    let agg = aggregate_all(&items, &rs).unwrap();
    assert_eq!(agg.results.len(), 1);
    assert!(agg.results[0].unanimous);
    assert_eq!(agg.pending, ["coordination-1"]);
    rs.push(response("nope", 0, ResponseValue::Natural));
    assert!(matches!(aggregate_all(&items, &rs), Err(AnnotateError::UnknownItem(_))));
}
