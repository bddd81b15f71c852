use std::collections::HashSet;
use std::time::Instant;

use funcprobe_core::corpus::{
    tokenize, ChangedSpan, Corpus, NliRecord, Paragraph, Payload, Sentence, Side, SourceKind,
};
use funcprobe_core::mutate::*;
use funcprobe_core::Task;
use proptest::prelude::*;

fn lex() -> Lexicons {
    Lexicons::bundled()
}

fn single(r: &MutationRecord) -> &str {
    match &r.mutated {
        Payload::Single { text } => text,
        other => panic!("unexpected payload {other:?}"),
    }
}

fn nli(p: &Payload) -> (&str, &str) {
    match p {
        Payload::Nli { premise, hypothesis } => (premise, hypothesis),
        other => panic!("unexpected payload {other:?}"),
    }
}

/// Rebuild the mutated tokens from the original tokens and the recorded
/// spans alone. Spans are applied right to left; at equal positions a
/// replacement goes before an insertion.
fn replay(original: &[String], spans: &[&ChangedSpan]) -> Vec<String> {
    let mut spans: Vec<&&ChangedSpan> = spans.iter().collect();
    spans.sort_by_key(|s| (std::cmp::Reverse(s.position), std::cmp::Reverse(s.old.len())));
    let mut out = original.to_vec();
    for s in spans {
        assert_eq!(&out[s.position..s.position + s.old.len()], s.old.as_slice(), "span {s:?}");
        out.splice(s.position..s.position + s.old.len(), s.new.iter().cloned());
    }
    out
}

fn assert_complement_untouched(r: &MutationRecord) {
    let originals: Vec<String> = r.original.texts().into_iter().map(|t| t.to_string()).collect();
    let mutated: Vec<String> = r.mutated.texts().into_iter().map(|t| t.to_string()).collect();
    for (k, (o, m)) in originals.iter().zip(&mutated).enumerate() {
        let side = match (&r.original, k) {
            (Payload::Nli { .. }, 0) => Some(Side::Premise),
            (Payload::Nli { .. }, _) => Some(Side::Hypothesis),
            _ => None,
        };
        let spans: Vec<&ChangedSpan> = r.changed_spans.iter().filter(|s| s.side == side).collect();
        let rebuilt = replay(&tokenize(o).unwrap().tokens, &spans);
        assert_eq!(rebuilt, tokenize(m).unwrap().tokens, "{} side {k}", r.example_id);
    }
}

#[test]
fn table_examples_with_pinned_seeds() {
    let lex = lex();

    let wh = tokenize("He became a Mr. Nice Guy like Melcher, who is now 46").unwrap();
    let r = mutate_wh(&wh, &lex, 2).unwrap();
    assert_eq!(single(&r), "He became a Mr. Nice Guy like Melcher, what is now 46");

    let why = tokenize("Why did he leave?").unwrap();
    let how = (0..50).find(|&s| mutate_wh(&why, &lex, s).unwrap().mutation_kind == "why->how").unwrap();
    assert_eq!(single(&mutate_wh(&why, &lex, how).unwrap()), "How did he leave?");

    let def = tokenize("the case is remarkable for the cooperation").unwrap();
    assert_eq!(single(&mutate_articles(&def, &lex, 0).unwrap()), "a case is remarkable for a cooperation");
    let def = tokenize("the apple and the hour").unwrap();
    assert_eq!(single(&mutate_articles(&def, &lex, 0).unwrap()), "an apple and an hour");

    let coord = tokenize("Rooms very clean and smelled very fresh.").unwrap();
    assert_eq!(single(&mutate_conjunction(&coord, &lex, 2).unwrap()), "Rooms very clean but smelled very fresh.");

    let p = Paragraph {
        id: "wiki:1".into(),
        sentences: vec![
            Sentence::new("wiki:1", "The forehead is gathered in a frown.", SourceKind::ParagraphCorpus).unwrap(),
            Sentence::new("wiki:2", "The mouth is slightly parted to reveal the teeth.", SourceKind::ParagraphCorpus)
                .unwrap(),
        ],
    };
    let split = |r: MutationRecord| match r.mutated {
        Payload::Pair { sentences } => sentences,
        _ => unreachable!(),
    };
    let cfg = EosConfig::default();
    assert_eq!(
        split(make_eos_example(&p, 0, false, &cfg, 2).unwrap()),
        ["the forehead is gathered in a frown", "the mouth is slightly parted to reveal the teeth"]
    );
    let r = make_eos_example(&p, 0, true, &cfg, 2).unwrap();
    assert_eq!(r.mutation_kind, "eos-offset:+2");
    assert_eq!(split(r), ["the forehead is gathered in a frown the mouth", "is slightly parted to reveal the teeth"]);

    let rec = NliRecord::new(
        "mnli:1",
        "With a single jerk the man's head tore free.",
        "The man's head tore free from a single jerk.",
    )
    .unwrap();
    let r = mutate_preposition(&rec, Side::Hypothesis, &lex, 35).unwrap();
    assert_eq!(nli(&r.mutated).1, "The man's head tore free without a single jerk.");

    let neg = |t: &str| negate_sentence(&tokenize(t).unwrap(), &lex).unwrap().sentence.text;
    assert_eq!(neg("There are still some left"), "There are not still some left");
    assert_eq!(neg("Turn right up the alleyway"), "do not turn right up the alleyway");
    assert_eq!(neg("Today there are less than 300,000."), "Today there are not less than 300,000.");

    let rec = NliRecord::new("mnli:2", "This is a common problem.", "This is an uncommon issue we are facing.").unwrap();
    let m = find_antonym_match(&rec, &lex).unwrap();
    let set = generate_negation_patterns(&rec, &m, &lex, 0);
    let by = |code: &str| set.records.iter().find(|r| r.mutation_kind == format!("negation:{code}")).unwrap();
    assert_eq!(nli(&by("explicit-none").mutated).0, "This is not a common problem.");
    assert_eq!(nli(&by("none-explicit").mutated).1, "This is not an uncommon issue we are facing.");
    assert_eq!(
        nli(&by("explicit-explicit").mutated),
        ("This is not a common problem.", "This is not an uncommon issue we are facing.")
    );
}

fn negation_fixture() -> Vec<NliRecord> {
    include_str!("fixtures/negation_pairs.tsv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            let (p, h) = l.split_once('\t').unwrap();
            NliRecord::new(&format!("neg:{i}"), p, h).unwrap()
        })
        .collect()
}

#[test]
fn negation_fixture_yields_sixteen_distinct_variants() {
    let lex = lex();
    let pairs = negation_fixture();
    assert_eq!(pairs.len(), 50);
    let start = Instant::now();
    for r in &pairs {
        let m = find_antonym_match(r, &lex).unwrap_or_else(|| panic!("no antonym in {}", r.id));
        let set = generate_negation_patterns(r, &m, &lex, 7);
        assert!(set.dropped.is_empty(), "{}: {:?}", r.id, set.dropped);
        assert_eq!(set.records.len(), 16);
        let codes: HashSet<&str> = set.records.iter().map(|r| r.mutation_kind.as_str()).collect();
        assert_eq!(codes.len(), 16);
        let texts: HashSet<(&str, &str)> = set.records.iter().map(|r| nli(&r.mutated)).collect();
        assert_eq!(texts.len(), 16, "{}", r.id);
        let plain = set.records.iter().find(|r| r.mutation_kind == "negation:none-none").unwrap();
        assert!(!plain.is_mutated);
        assert_eq!(nli(&plain.mutated), (r.premise.text.as_str(), r.hypothesis.text.as_str()));
        for rec in &set.records {
            assert_eq!(rec.is_mutated, !rec.changed_spans.is_empty());
            assert_complement_untouched(rec);
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn hypothesis_negation_tasks() {
    let lex = lex();
    let rec = NliRecord::new("q", "all taken up yeah", "There are still some left").unwrap();
    let r = negate_hypothesis(&rec, Task::Quantification, &lex, 1).unwrap();
    assert_eq!(nli(&r.mutated), ("all taken up yeah", "There are not still some left"));
    assert_complement_untouched(&r);
}

fn wh_corpus(n: usize) -> Corpus {
    Corpus::Sentences(
        (0..n)
            .map(|i| {
                Sentence::new(format!("c:{i}"), &format!("They asked why item {i} was late."), SourceKind::SentenceCorpus)
                    .unwrap()
            })
            .collect(),
    )
}

#[test]
fn hundred_candidates_split_evenly() {
    let cfg = GenerateConfig { target_size: 100, ..Default::default() };
    let out = build_probing_set(Task::Wh, &wh_corpus(100), &cfg, &lex(), 5).unwrap();
    assert_eq!(out.iter().filter(|r| r.is_mutated).count(), 50);
    assert_eq!(out.iter().filter(|r| !r.is_mutated).count(), 50);
    for r in &out {
        assert_complement_untouched(r);
        if !r.is_mutated {
            assert_eq!(r.original, r.mutated);
        }
    }
}

#[test]
fn three_candidates_are_not_enough() {
    let cfg = GenerateConfig { target_size: 100, ..Default::default() };
    match build_probing_set(Task::Wh, &wh_corpus(3), &cfg, &lex(), 5) {
        Err(MutateError::InsufficientCandidates { found: 3, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn same_seed_same_bytes() {
    let lex = lex();
    let c = wh_corpus(300);
    let render = |threads| {
        let cfg = GenerateConfig { target_size: 200, threads: Some(threads), ..Default::default() };
        let recs = build_probing_set(Task::Wh, &c, &cfg, &lex, 11).unwrap();
        serde_json::to_string(&recs).unwrap()
    };
    let a = render(1);
    assert_eq!(a, render(1));
    assert_eq!(a, render(8));
    let cfg = GenerateConfig { target_size: 200, ..Default::default() };
    let other = serde_json::to_string(&build_probing_set(Task::Wh, &c, &cfg, &lex, 12).unwrap()).unwrap();
    assert_ne!(a, other);
}

#[test]
fn negation_build_emits_whole_groups() {
    let records = negation_fixture();
    let cfg = GenerateConfig { target_size: 100, ..Default::default() };
    let out = build_probing_set(Task::Negation, &Corpus::Nli(records), &cfg, &lex(), 3).unwrap();
    assert_eq!(out.len(), 96);
    assert_eq!(out.iter().filter(|r| !r.is_mutated).count(), 6);
}

const WORDS: [&str; 16] = [
    "the", "a", "an", "dog", "apple", "saw", "and", "but", "or", "who", "what", "why", "house", "is", "hour", "big",
];

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS.to_vec()), 1..14).prop_map(|w| format!("{}.", w.join(" ")))
}

proptest! {
    #[test]
    fn single_sentence_mutators_touch_only_their_spans(text in sentence(), seed in any::<u64>()) {
        let lex = lex();
        let s = tokenize(&text).unwrap();
        for r in [mutate_wh(&s, &lex, seed), mutate_conjunction(&s, &lex, seed), mutate_articles(&s, &lex, seed)]
            .into_iter()
            .flatten()
        {
            prop_assert!(r.is_mutated && !r.changed_spans.is_empty());
            assert_complement_untouched(&r);
            for span in &r.changed_spans {
                prop_assert_ne!(&span.old, &span.new);
            }
        }
    }

    #[test]
    fn articles_leave_no_source_class(text in sentence(), seed in any::<u64>()) {
        let lex = lex();
        let s = tokenize(&text).unwrap();
        if let Ok(r) = mutate_articles(&s, &lex, seed) {
            let out = tokenize(single(&r)).unwrap().lowercase_tokens();
            let from_definite = r.changed_spans[0].old[0].eq_ignore_ascii_case("the");
            if from_definite {
                prop_assert!(!out.iter().any(|t| t == "the"));
                for w in out.windows(2) {
                    if w[0] == "a" || w[0] == "an" {
                        prop_assert_eq!(w[0].as_str(), lex.indefinite_for(&w[1]));
                    }
                }
            } else {
                prop_assert!(!out.iter().any(|t| t == "a" || t == "an"));
            }
        }
    }

    #[test]
    fn reruns_reproduce(text in sentence(), seed in any::<u64>()) {
        let lex = lex();
        let s = tokenize(&text).unwrap();
        prop_assert_eq!(mutate_wh(&s, &lex, seed), mutate_wh(&s, &lex, seed));
        prop_assert_eq!(mutate_conjunction(&s, &lex, seed), mutate_conjunction(&s, &lex, seed));
    }
}
