//! Explicit and lexical negation, and the sixteen-pattern negation generator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::edit::{apply, match_case, Edit};
use super::nli::{nli_payload, side_sentence};
use super::{Lexicons, MutateError, MutationRecord, VerbForm};
use crate::corpus::{ChangedSpan, NliRecord, Side, TokenizedSentence};
use crate::task::Task;

const AUXILIARIES: [&str; 21] = [
    "is", "are", "was", "were", "am", "be", "been", "has", "have", "had", "will", "would", "can", "could", "may",
    "might", "must", "should", "do", "does", "did",
];

const PLAIN_SUBJECTS: [&str; 4] = ["i", "you", "we", "they"];

/// A sentence after a rewrite, with the spans that changed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub sentence: TokenizedSentence,
    pub spans: Vec<ChangedSpan>,
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

fn rewrite(s: &TokenizedSentence, edits: &[Edit], side: Option<Side>) -> Rewrite {
    let applied = apply(s, edits, side);
    Rewrite { sentence: applied.sentence(&s.sentence_id), spans: applied.spans }
}

/// Insert "not" after the first auxiliary, or fall back to do-support on
/// the first verb the inflection table recognises.
pub fn negate_sentence(s: &TokenizedSentence, lex: &Lexicons) -> Result<Rewrite, MutateError> {
    let toks: Vec<String> = s.tokens.iter().map(|t| lower(t)).collect();
    if let Some(i) = toks.iter().position(|t| AUXILIARIES.contains(&t.as_str())) {
        let at = if toks.get(i + 1).is_some_and(|t| t == "n't") { i + 2 } else { i + 1 };
        return Ok(rewrite(s, &[Edit::insert(at, vec!["not".into()])], None));
    }
    for (i, tok) in toks.iter().enumerate() {
        for (bare, form) in lex.verbs.lookup(tok) {
            let aux = match form {
                VerbForm::Bare if i == 0 => "do",
                VerbForm::Bare if PLAIN_SUBJECTS.contains(&toks[i - 1].as_str()) => "do",
                VerbForm::Bare => continue,
                VerbForm::ThirdSingular => "does",
                VerbForm::Past => "did",
            };
            let aux = if i == 0 { aux.to_string() } else { match_case(&s.tokens[i], aux) };
            let edit = Edit { start: i, end: i + 1, new: vec![aux, "not".into(), bare.clone()] };
            return Ok(rewrite(s, &[edit], None));
        }
    }
    Err(MutateError::NoVerb(s.text.clone()))
}

/// Replace the token at `position` with `antonym`, repairing a preceding
/// indefinite article.
pub fn lexical_swap(
    s: &TokenizedSentence,
    position: usize,
    antonym: &str,
    lex: &Lexicons,
) -> Result<Rewrite, MutateError> {
    let Some(old) = s.tokens.get(position) else {
        return Err(MutateError::IndexOutOfRange { paragraph: s.sentence_id.clone(), index: position, len: s.len() });
    };
    let mut edits = Vec::with_capacity(2);
    if position > 0 {
        let prev = &s.tokens[position - 1];
        if matches!(lower(prev).as_str(), "a" | "an") {
            let article = lex.indefinite_for(antonym);
            if lower(prev) != article {
                edits.push(Edit::replace(position - 1, match_case(prev, article)));
            }
        }
    }
    edits.push(Edit::replace(position, match_case(old, antonym)));
    Ok(rewrite(s, &edits, None))
}

/// Explicitly negate the hypothesis of a pair, the mutation shared by the
/// comparative, quantification and spatial tasks.
pub fn negate_hypothesis(r: &NliRecord, task: Task, lex: &Lexicons, seed: u64) -> Result<MutationRecord, MutateError> {
    let rewritten = with_side(negate_sentence(&r.hypothesis.tokenize(), lex)?, Side::Hypothesis);
    Ok(MutationRecord::changed(
        format!("{task}-{}", r.id),
        r.id.clone(),
        task,
        nli_payload(&r.premise.text, &r.hypothesis.text),
        nli_payload(&r.premise.text, &rewritten.sentence.text),
        rewritten.spans,
        "negate-hypothesis".into(),
        seed,
    ))
}

/// An antonym pair split across premise and hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntonymMatch {
    pub premise_position: usize,
    pub hypothesis_position: usize,
    /// Lowercased premise-side word.
    pub premise_word: String,
    /// Lowercased hypothesis-side word.
    pub hypothesis_word: String,
}

/// The first premise token (then first hypothesis token) forming a lexicon
/// antonym pair with a token on the other side.
pub fn find_antonym_match(r: &NliRecord, lex: &Lexicons) -> Option<AntonymMatch> {
    let p = r.premise.tokenize();
    let h = r.hypothesis.tokenize();
    for (i, pw) in p.lowercase_tokens().into_iter().enumerate() {
        if lex.antonyms_of(&pw).is_empty() {
            continue;
        }
        for (j, hw) in h.lowercase_tokens().into_iter().enumerate() {
            if lex.are_antonyms(&pw, &hw) {
                return Some(AntonymMatch {
                    premise_position: i,
                    hypothesis_position: j,
                    premise_word: pw,
                    hypothesis_word: hw,
                });
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideMutation {
    None,
    Lexical,
    Explicit,
    Both,
}

impl SideMutation {
    pub const ALL: [SideMutation; 4] = [SideMutation::None, SideMutation::Lexical, SideMutation::Explicit, SideMutation::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            SideMutation::None => "none",
            SideMutation::Lexical => "lexical",
            SideMutation::Explicit => "explicit",
            SideMutation::Both => "both",
        }
    }

    pub fn is_lexical(self) -> bool {
        matches!(self, SideMutation::Lexical | SideMutation::Both)
    }

    pub fn is_explicit(self) -> bool {
        matches!(self, SideMutation::Explicit | SideMutation::Both)
    }
}

impl FromStr for SideMutation {
    type Err = MutateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SideMutation::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MutateError::Config(format!("unknown side mutation `{s}`")))
    }
}

/// What happens to each side of a pair; rendered as `premise-hypothesis`,
/// e.g. `explicit-none`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NegationPattern {
    pub premise: SideMutation,
    pub hypothesis: SideMutation,
}

impl NegationPattern {
    pub fn all() -> impl Iterator<Item = NegationPattern> {
        SideMutation::ALL
            .into_iter()
            .flat_map(|p| SideMutation::ALL.into_iter().map(move |h| NegationPattern { premise: p, hypothesis: h }))
    }

    pub fn code(self) -> String {
        self.to_string()
    }

    /// Read the pattern back from a `negation:<code>` mutation kind.
    pub fn from_kind(kind: &str) -> Option<Self> {
        kind.strip_prefix("negation:").and_then(|c| c.parse().ok())
    }
}

impl fmt::Display for NegationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.premise.as_str(), self.hypothesis.as_str())
    }
}

impl FromStr for NegationPattern {
    type Err = MutateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, h) = s
            .split_once('-')
            .ok_or_else(|| MutateError::Config(format!("malformed negation pattern `{s}`")))?;
        Ok(NegationPattern { premise: p.parse()?, hypothesis: h.parse()? })
    }
}

/// Patterns produced for one pair, plus those whose rewrite failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegationSet {
    pub records: Vec<MutationRecord>,
    pub dropped: Vec<(NegationPattern, MutateError)>,
}

/// The four variants of one side, each possibly failed.
struct SideVariants {
    original: TokenizedSentence,
    lexical: Result<Rewrite, MutateError>,
    explicit: Result<Rewrite, MutateError>,
    both: Result<Rewrite, MutateError>,
}

fn with_side(mut r: Rewrite, side: Side) -> Rewrite {
    r.spans.iter_mut().for_each(|s| s.side = Some(side));
    r
}

/// One span covering everything between the common prefix and suffix.
fn diff_span(before: &[String], after: &[String], side: Side) -> Vec<ChangedSpan> {
    let prefix = before.iter().zip(after).take_while(|(a, b)| a == b).count();
    let max_suffix = before.len().min(after.len()) - prefix;
    let suffix = before.iter().rev().zip(after.iter().rev()).take(max_suffix).take_while(|(a, b)| a == b).count();
    if prefix == before.len() && prefix == after.len() {
        return Vec::new();
    }
    vec![ChangedSpan {
        side: Some(side),
        position: prefix,
        old: before[prefix..before.len() - suffix].to_vec(),
        new: after[prefix..after.len() - suffix].to_vec(),
    }]
}

impl SideVariants {
    fn new(s: TokenizedSentence, position: usize, antonym: &str, side: Side, lex: &Lexicons) -> Self {
        let lexical = lexical_swap(&s, position, antonym, lex).map(|r| with_side(r, side));
        let explicit = negate_sentence(&s, lex).map(|r| with_side(r, side));
        let both = match &lexical {
            Ok(l) => negate_sentence(&l.sentence, lex).map(|r| Rewrite {
                spans: diff_span(&s.tokens, &r.sentence.tokens, side),
                sentence: r.sentence,
            }),
            Err(e) => Err(e.clone()),
        };
        SideVariants { original: s, lexical, explicit, both }
    }

    fn get(&self, m: SideMutation) -> Result<(String, Vec<ChangedSpan>), MutateError> {
        let r = match m {
            SideMutation::None => return Ok((self.original.text.clone(), Vec::new())),
            SideMutation::Lexical => &self.lexical,
            SideMutation::Explicit => &self.explicit,
            SideMutation::Both => &self.both,
        };
        r.as_ref().map(|r| (r.sentence.text.clone(), r.spans.clone())).map_err(Clone::clone)
    }
}

/// Apply every combination of {none, lexical, explicit, both} to premise and
/// hypothesis. Patterns whose explicit negation fails are dropped and
/// reported.
pub fn generate_negation_patterns(r: &NliRecord, m: &AntonymMatch, lex: &Lexicons, seed: u64) -> NegationSet {
    let premise = SideVariants::new(
        side_sentence(r, Side::Premise),
        m.premise_position,
        &m.hypothesis_word,
        Side::Premise,
        lex,
    );
    let hypothesis = SideVariants::new(
        side_sentence(r, Side::Hypothesis),
        m.hypothesis_position,
        &m.premise_word,
        Side::Hypothesis,
        lex,
    );
    let original = nli_payload(&r.premise.text, &r.hypothesis.text);
    let gold = r.gold_label.map(|g| g.label());
    let mut records = Vec::with_capacity(16);
    let mut dropped = Vec::new();
    for pattern in NegationPattern::all() {
        let example_id = format!("{}-{}-{}", Task::Negation, r.id, pattern);
        let sides = premise.get(pattern.premise).and_then(|p| Ok((p, hypothesis.get(pattern.hypothesis)?)));
        let ((p_text, p_spans), (h_text, h_spans)) = match sides {
            Ok(s) => s,
            Err(e) => {
                log::debug!("dropping negation pattern {pattern} for `{}`: {e}", r.id);
                dropped.push((pattern, e));
                continue;
            }
        };
        let record = if p_spans.is_empty() && h_spans.is_empty() {
            let mut rec =
                MutationRecord::unchanged(example_id, r.id.clone(), Task::Negation, original.clone(), seed, gold);
            rec.mutation_kind = format!("negation:{pattern}");
            rec
        } else {
            MutationRecord::changed(
                example_id,
                r.id.clone(),
                Task::Negation,
                original.clone(),
                nli_payload(&p_text, &h_text),
                p_spans.into_iter().chain(h_spans).collect(),
                format!("negation:{pattern}"),
                seed,
            )
        };
        records.push(record);
    }
    NegationSet { records, dropped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Payload};

    fn neg(text: &str) -> Result<String, MutateError> {
        let lex = Lexicons::bundled();
        negate_sentence(&tokenize(text).unwrap(), &lex).map(|r| r.sentence.text)
    }

    #[test]
    fn auxiliary_insertion() {
        assert_eq!(neg("There are still some left").unwrap(), "There are not still some left");
        assert_eq!(neg("Today there are less than 300,000.").unwrap(), "Today there are not less than 300,000.");
        assert_eq!(neg("This is a common problem.").unwrap(), "This is not a common problem.");
        assert_eq!(neg("He will be there.").unwrap(), "He will not be there.");
        assert_eq!(neg("It isn't here.").unwrap(), "It isn't not here.");
        assert_eq!(neg("She is not happy.").unwrap(), "She is not not happy.");
    }

    #[test]
    fn do_support() {
        assert_eq!(neg("Turn right up the alleyway").unwrap(), "do not turn right up the alleyway");
        assert_eq!(neg("The road turns left.").unwrap(), "The road does not turn left.");
        assert_eq!(neg("He left early.").unwrap(), "He did not leave early.");
        assert_eq!(neg("They walk home.").unwrap(), "They do not walk home.");
    }

    #[test]
    fn no_verb() {
        assert!(matches!(neg("Green ideas."), Err(MutateError::NoVerb(_))));
    }

    #[test]
    fn swap_repairs_article() {
        let lex = Lexicons::bundled();
        let s = tokenize("This is a common problem.").unwrap();
        let r = lexical_swap(&s, 3, "uncommon", &lex).unwrap();
        assert_eq!(r.sentence.text, "This is an uncommon problem.");
        assert_eq!(r.spans.len(), 2);
        let s = tokenize("Common sense").unwrap();
        assert_eq!(lexical_swap(&s, 0, "uncommon", &lex).unwrap().sentence.text, "Uncommon sense");
    }

    #[test]
    fn antonym_match_both_directions() {
        let lex = Lexicons::bundled();
        let r = NliRecord::new("x", "This is a common problem.", "This is an uncommon issue we are facing.").unwrap();
        let m = find_antonym_match(&r, &lex).unwrap();
        assert_eq!((m.premise_position, m.hypothesis_position), (3, 3));
        assert_eq!(m.premise_word, "common");
        let r = NliRecord::new("y", "The room is dirty.", "The room is clean.").unwrap();
        assert!(find_antonym_match(&r, &lex).is_some());
        let r = NliRecord::new("z", "A dog.", "A cat.").unwrap();
        assert!(find_antonym_match(&r, &lex).is_none());
    }

    #[test]
    fn pattern_codes_round_trip() {
        let all: Vec<NegationPattern> = NegationPattern::all().collect();
        assert_eq!(all.len(), 16);
        for p in &all {
            assert_eq!(p.code().parse::<NegationPattern>().unwrap(), *p);
            assert_eq!(NegationPattern::from_kind(&format!("negation:{p}")), Some(*p));
        }
        assert!("none".parse::<NegationPattern>().is_err());
        assert!("none-sideways".parse::<NegationPattern>().is_err());
    }

    #[test]
    fn sixteen_patterns() {
        let lex = Lexicons::bundled();
        let r = NliRecord::new("x", "This is a common problem.", "This is an uncommon issue we are facing.").unwrap();
        let m = find_antonym_match(&r, &lex).unwrap();
        let set = generate_negation_patterns(&r, &m, &lex, 1);
        assert!(set.dropped.is_empty());
        assert_eq!(set.records.len(), 16);
        let first = &set.records[0];
        assert!(!first.is_mutated);
        assert_eq!(first.mutated, first.original);
        let by_kind = |k: &str| set.records.iter().find(|r| r.mutation_kind == format!("negation:{k}")).unwrap();
        let Payload::Nli { premise, hypothesis } = &by_kind("explicit-none").mutated else { unreachable!() };
        assert_eq!(premise, "This is not a common problem.");
        assert_eq!(hypothesis, "This is an uncommon issue we are facing.");
        let Payload::Nli { premise, hypothesis } = &by_kind("both-lexical").mutated else { unreachable!() };
        assert_eq!(premise, "This is not an uncommon problem.");
        assert_eq!(hypothesis, "This is a common issue we are facing.");
    }

    #[test]
    fn failing_negation_drops_patterns() {
        let lex = Lexicons::bundled();
        let r = NliRecord::new("x", "Dirty rooms everywhere.", "The rooms were clean.").unwrap();
        let m = find_antonym_match(&r, &lex).unwrap();
        let set = generate_negation_patterns(&r, &m, &lex, 1);
        // The verbless premise cannot be negated, but its swapped form
        // "Clean rooms everywhere." reads as an imperative and can.
        assert_eq!(set.dropped.len(), 4);
        assert!(set.dropped.iter().all(|(p, e)| p.premise == SideMutation::Explicit && matches!(e, MutateError::NoVerb(_))));
        assert_eq!(set.records.len(), 12);
    }
}
