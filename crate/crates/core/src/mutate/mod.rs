//! Targeted mutation of corpus items into probing examples.

mod acceptability;
mod build;
mod edit;
mod eos;
mod lexicon;
mod negation;
mod nli;

use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetRecord, MutationMeta, Payload};
use crate::task::{Label, Task};

pub use crate::corpus::{ChangedSpan, Side};
pub use acceptability::{mutate_articles, mutate_conjunction, mutate_wh};
pub use build::{build_probing_set, candidate_count, GenerateConfig};
pub use edit::match_case;
pub use eos::{make_eos_example, sample_eos_offset, strip_for_eos, EosConfig};
pub use lexicon::{LexiconError, Lexicons, VerbForm, VerbTable, ARTICLES, CONJUNCTIONS, WH_WORDS};
pub use negation::{
    find_antonym_match, generate_negation_patterns, lexical_swap, negate_hypothesis, negate_sentence, AntonymMatch,
    NegationPattern, NegationSet, Rewrite, SideMutation,
};
pub use nli::{find_prepositions, mutate_preposition, select_pairs};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum MutateError {
    #[error("no candidate: {0}")]
    NoCandidate(String),
    #[error("sentence index {index} out of range for paragraph `{paragraph}` with {len} sentences")]
    IndexOutOfRange { paragraph: String, index: usize, len: usize },
    #[error("no finite verb found in `{0}`")]
    NoVerb(String),
    #[error("task `{task}`: found {found} candidates, need {needed}")]
    InsufficientCandidates { task: Task, found: usize, needed: usize },
    #[error("task `{task}` needs a {expected} corpus")]
    WrongCorpus { task: Task, expected: &'static str },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Full provenance of one generated example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub example_id: String,
    pub source_id: String,
    pub task: Task,
    pub original: Payload,
    pub mutated: Payload,
    pub is_mutated: bool,
    pub changed_spans: Vec<ChangedSpan>,
    pub mutation_kind: String,
    pub rng_seed: u64,
    /// Label implied by mutation status (acceptability) or the source gold
    /// label for unmutated NLI pairs.
    pub expected_label: Option<Label>,
}

impl MutationRecord {
    pub(crate) fn unchanged(
        example_id: String,
        source_id: String,
        task: Task,
        payload: Payload,
        seed: u64,
        gold: Option<Label>,
    ) -> Self {
        let expected = if task.format().is_acceptability() { Some(Label::Natural) } else { gold };
        MutationRecord {
            example_id,
            source_id,
            task,
            original: payload.clone(),
            mutated: payload,
            is_mutated: false,
            changed_spans: Vec::new(),
            mutation_kind: "original".into(),
            rng_seed: seed,
            expected_label: expected,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn changed(
        example_id: String,
        source_id: String,
        task: Task,
        original: Payload,
        mutated: Payload,
        spans: Vec<ChangedSpan>,
        kind: String,
        seed: u64,
    ) -> Self {
        let expected = task.format().is_acceptability().then_some(Label::Unnatural);
        MutationRecord {
            example_id,
            source_id,
            task,
            original,
            mutated,
            is_mutated: true,
            changed_spans: spans,
            mutation_kind: kind,
            rng_seed: seed,
            expected_label: expected,
        }
    }

    pub fn mutated_text(&self) -> String {
        self.mutated.texts().join(" // ")
    }

    pub fn to_dataset_record(&self) -> DatasetRecord {
        DatasetRecord {
            id: self.example_id.clone(),
            task: self.task,
            payload: self.mutated.clone(),
            expected_label: self.expected_label,
            mutation: MutationMeta {
                source_id: self.source_id.clone(),
                is_mutated: self.is_mutated,
                kind: self.mutation_kind.clone(),
                seed: self.rng_seed,
                original: self.original.clone(),
                changed_spans: self.changed_spans.clone(),
            },
            annotation: None,
        }
    }
}

pub(crate) fn rng_for(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
