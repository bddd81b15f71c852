//! Single-sentence mutators: wh-words, articles and conjunctions.

use rand::seq::IndexedRandom;

use super::edit::{apply, match_case, Edit};
use super::{rng_for, Lexicons, MutateError, MutationRecord};
use crate::corpus::{Payload, TokenizedSentence};
use crate::task::Task;

fn positions_in(s: &TokenizedSentence, set: &[String]) -> Vec<usize> {
    s.tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| set.iter().any(|w| w.eq_ignore_ascii_case(t)))
        .map(|(i, _)| i)
        .collect()
}

fn single_swap(
    s: &TokenizedSentence,
    task: Task,
    set: &[String],
    what: &str,
    seed: u64,
) -> Result<MutationRecord, MutateError> {
    let hits = positions_in(s, set);
    let at = match hits.as_slice() {
        [i] => *i,
        [] => return Err(MutateError::NoCandidate(format!("no {what} in `{}`", s.text))),
        _ => return Err(MutateError::NoCandidate(format!("{} {what}s in `{}`", hits.len(), s.text))),
    };
    let old = &s.tokens[at];
    let others: Vec<&String> = set.iter().filter(|w| !w.eq_ignore_ascii_case(old)).collect();
    let mut rng = rng_for(seed);
    let pick = others.choose(&mut rng).expect("lexicon has alternatives");
    let applied = apply(s, &[Edit::replace(at, match_case(old, pick))], None);
    Ok(MutationRecord::changed(
        format!("{task}-{}", s.sentence_id),
        s.sentence_id.clone(),
        task,
        Payload::Single { text: s.text.clone() },
        Payload::Single { text: applied.text },
        applied.spans,
        format!("{}->{}", old.to_lowercase(), pick),
        seed,
    ))
}

/// Swap the sentence's only wh-word for one of the other five.
pub fn mutate_wh(s: &TokenizedSentence, lex: &Lexicons, seed: u64) -> Result<MutationRecord, MutateError> {
    single_swap(s, Task::Wh, &lex.wh_words, "wh-word", seed)
}

/// Swap the sentence's only coordinating conjunction for one of the other two.
pub fn mutate_conjunction(s: &TokenizedSentence, lex: &Lexicons, seed: u64) -> Result<MutationRecord, MutateError> {
    single_swap(s, Task::Coordination, &lex.conjunctions, "conjunction", seed)
}

/// Swap every article of a sentence that uses only one article class
/// (at least twice) to the other class. Deterministic; `seed` is recorded.
pub fn mutate_articles(s: &TokenizedSentence, lex: &Lexicons, seed: u64) -> Result<MutationRecord, MutateError> {
    let lower = s.lowercase_tokens();
    let definite: Vec<usize> = (0..lower.len()).filter(|&i| lower[i] == "the").collect();
    let indefinite: Vec<usize> = (0..lower.len()).filter(|&i| lower[i] == "a" || lower[i] == "an").collect();
    let (edits, kind): (Vec<Edit>, &str) = match (definite.len(), indefinite.len()) {
        (d, 0) if d >= 2 => {
            // Right to left, so an article followed by another article sees
            // the replacement it will actually precede.
            let mut out: Vec<String> = s.tokens.clone();
            let mut edits: Vec<Edit> = definite
                .iter()
                .rev()
                .map(|&i| {
                    let next = out.get(i + 1).map(String::as_str).unwrap_or("");
                    let article = match_case(&s.tokens[i], lex.indefinite_for(next));
                    out[i] = article.clone();
                    Edit::replace(i, article)
                })
                .collect();
            edits.reverse();
            (edits, "definite->indefinite")
        }
        (0, n) if n >= 2 => (
            indefinite.iter().map(|&i| Edit::replace(i, match_case(&s.tokens[i], "the"))).collect(),
            "indefinite->definite",
        ),
        (d, n) => {
            return Err(MutateError::NoCandidate(format!(
                "needs two or more articles of a single class, found {d} definite and {n} indefinite in `{}`",
                s.text
            )))
        }
    };
    let applied = apply(s, &edits, None);
    Ok(MutationRecord::changed(
        format!("{}-{}", Task::Definiteness, s.sentence_id),
        s.sentence_id.clone(),
        Task::Definiteness,
        Payload::Single { text: s.text.clone() },
        Payload::Single { text: applied.text },
        applied.spans,
        kind.to_string(),
        seed,
    ))
}
