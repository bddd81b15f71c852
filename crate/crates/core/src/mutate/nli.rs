//! NLI-pair selection and preposition swapping.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::edit::{apply, match_case, Edit};
use super::{rng_for, Lexicons, MutateError, MutationRecord, Side};
use crate::corpus::{NliRecord, Payload, TokenizedSentence};
use crate::task::Task;

/// Non-overlapping preposition occurrences as `(token index, lexicon index)`,
/// preferring the longest item at each position.
pub fn find_prepositions(tokens: &[String], lex: &Lexicons) -> Vec<(usize, usize)> {
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lower.len() {
        let best = lex
            .prepositions
            .iter()
            .enumerate()
            .filter(|(_, p)| lower[i..].starts_with(p))
            .max_by_key(|(_, p)| p.len());
        match best {
            Some((idx, p)) => {
                out.push((i, idx));
                i += p.len();
            }
            None => i += 1,
        }
    }
    out
}

pub(crate) fn side_sentence(r: &NliRecord, side: Side) -> TokenizedSentence {
    match side {
        Side::Premise => r.premise.tokenize(),
        Side::Hypothesis => r.hypothesis.tokenize(),
    }
}

pub(crate) fn nli_payload(premise: &str, hypothesis: &str) -> Payload {
    Payload::Nli { premise: premise.to_string(), hypothesis: hypothesis.to_string() }
}

/// Replace one uniformly chosen preposition on `side` with a different
/// list item, itself chosen uniformly.
pub fn mutate_preposition(
    r: &NliRecord,
    side: Side,
    lex: &Lexicons,
    seed: u64,
) -> Result<MutationRecord, MutateError> {
    let s = side_sentence(r, side);
    let found = find_prepositions(&s.tokens, lex);
    if found.is_empty() {
        return Err(MutateError::NoCandidate(format!("no listed preposition in `{}`", s.text)));
    }
    let mut rng = rng_for(seed);
    let (at, which) = found[rng.random_range(0..found.len())];
    let old = &lex.prepositions[which];
    let others: Vec<&Vec<String>> = lex.prepositions.iter().filter(|p| *p != old).collect();
    let pick = others.choose(&mut rng).expect("more than one preposition");
    let mut new: Vec<String> = (*pick).clone();
    new[0] = match_case(&s.tokens[at], &new[0]);
    let applied = apply(&s, &[Edit { start: at, end: at + old.len(), new }], Some(side));
    let original = nli_payload(&r.premise.text, &r.hypothesis.text);
    let mutated = match side {
        Side::Premise => nli_payload(&applied.text, &r.hypothesis.text),
        Side::Hypothesis => nli_payload(&r.premise.text, &applied.text),
    };
    Ok(MutationRecord::changed(
        format!("{}-{}", Task::Preposition, r.id),
        r.id.clone(),
        Task::Preposition,
        original,
        mutated,
        applied.spans,
        format!("{}->{}", old.join(" "), pick.join(" ")),
        seed,
    ))
}

fn contains_any(tokens: &[String], words: &[Vec<String>]) -> bool {
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    (0..lower.len()).any(|i| words.iter().any(|w| lower[i..].starts_with(w)))
}

pub(crate) fn lexicon_phrases<S: AsRef<str>>(lexicon: &[S]) -> Vec<Vec<String>> {
    lexicon
        .iter()
        .map(|w| w.as_ref().to_lowercase().split_whitespace().map(str::to_string).collect())
        .filter(|w: &Vec<String>| !w.is_empty())
        .collect()
}

pub(crate) fn pair_matches(r: &NliRecord, phrases: &[Vec<String>], require_both: bool) -> bool {
    contains_any(&r.hypothesis.tokenize().tokens, phrases)
        && (!require_both || contains_any(&r.premise.tokenize().tokens, phrases))
}

/// Records whose hypothesis (and, with `require_both`, premise) contains a
/// lexicon word, matched case-insensitively on token boundaries.
pub fn select_pairs<'a, S: AsRef<str>>(
    records: &'a [NliRecord],
    lexicon: &[S],
    require_both: bool,
) -> Vec<&'a NliRecord> {
    let phrases = lexicon_phrases(lexicon);
    records.iter().filter(|r| pair_matches(r, &phrases, require_both)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, p: &str, h: &str) -> NliRecord {
        NliRecord::new(id, p, h).unwrap()
    }

    #[test]
    fn longest_match_first() {
        let lex = Lexicons::bundled();
        let tokens: Vec<String> = "He stood in front of the house in May".split(' ').map(String::from).collect();
        let found = find_prepositions(&tokens, &lex);
        let items: Vec<String> = found.iter().map(|&(_, i)| lex.prepositions[i].join(" ")).collect();
        assert_eq!(items, ["in front of", "in"]);
        assert_eq!(found[0].0, 2);
        assert_eq!(found[1].0, 7);
    }

    #[test]
    fn no_preposition() {
        let lex = Lexicons::bundled();
        let r = rec("n1", "Dogs bark.", "Cats meow loudly.");
        assert!(matches!(
            mutate_preposition(&r, Side::Hypothesis, &lex, 0),
            Err(MutateError::NoCandidate(_))
        ));
    }

    #[test]
    fn replacement_is_a_different_list_item() {
        let lex = Lexicons::bundled();
        let r = rec("n1", "With a single jerk the man's head tore free.", "The man's head tore free from a single jerk.");
        for seed in 0..100 {
            let m = mutate_preposition(&r, Side::Hypothesis, &lex, seed).unwrap();
            let span = &m.changed_spans[0];
            assert_eq!(span.old, ["from"]);
            assert_ne!(span.new, ["from"]);
            assert!(lex.prepositions.contains(&span.new.iter().map(|w| w.to_lowercase()).collect()));
            let Payload::Nli { premise, .. } = &m.mutated else { unreachable!() };
            assert_eq!(premise, &r.premise.text);
        }
    }

    #[test]
    fn premise_side_keeps_capitalization() {
        let lex = Lexicons::bundled();
        let r = rec("n1", "With a single jerk the man's head tore free.", "x");
        let m = mutate_preposition(&r, Side::Premise, &lex, 4).unwrap();
        let Payload::Nli { premise, hypothesis } = &m.mutated else { unreachable!() };
        assert_eq!(hypothesis, "x");
        assert!(premise.chars().next().unwrap().is_uppercase());
        assert_eq!(m.changed_spans[0].side, Some(Side::Premise));
    }

    #[test]
    fn select_comparatives_in_both() {
        let lex = Lexicons::bundled();
        let records = vec![rec("a", "more than 300,000", "less than 300,000"), rec("b", "a dog", "a cat")];
        let got = select_pairs(&records, &lex.comparative_words(), true);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].id, "a");
        assert!(select_pairs(&[], &lex.comparative_words(), true).is_empty());
    }

    #[test]
    fn select_quantifiers() {
        let records = vec![rec("q", "all taken up yeah", "There are still some left")];
        assert_eq!(select_pairs(&records, &["all", "some"], true).len(), 1);
        assert_eq!(select_pairs(&records, &["ALL"], true).len(), 0);
        assert_eq!(select_pairs(&records, &["some"], false).len(), 1);
        // token boundaries: "some" must not match "someone"
        let records = vec![rec("r", "all", "someone left")];
        assert!(select_pairs(&records, &["some"], false).is_empty());
    }
}
