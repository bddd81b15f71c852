//! Candidate selection and assembly of a whole probing set.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::negation::{find_antonym_match, generate_negation_patterns, negate_hypothesis};
use super::nli::{find_prepositions, lexicon_phrases, mutate_preposition, nli_payload, pair_matches, side_sentence};
use super::{
    make_eos_example, mutate_articles, mutate_conjunction, mutate_wh, EosConfig, Lexicons, MutateError,
    MutationRecord, Side,
};
use crate::corpus::{Corpus, NliRecord, Paragraph, Payload, Sentence};
use crate::hash::item_seed;
use crate::task::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateConfig {
    /// Number of records to emit; for negation, rounded down to whole
    /// groups of sixteen.
    pub target_size: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub eos: EosConfig,
    pub preposition_side: Side,
    /// Worker threads; `None` uses the global pool. Output does not depend
    /// on this.
    pub threads: Option<usize>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            target_size: 500,
            min_tokens: 1,
            max_tokens: crate::corpus::DEFAULT_MAX_TOKENS,
            eos: EosConfig::default(),
            preposition_side: Side::Hypothesis,
            threads: None,
        }
    }
}

impl GenerateConfig {
    pub fn validate(&self) -> Result<(), MutateError> {
        if self.target_size == 0 {
            return Err(MutateError::Config("target_size must be positive".into()));
        }
        if self.min_tokens > self.max_tokens {
            return Err(MutateError::Config(format!(
                "min_tokens {} exceeds max_tokens {}",
                self.min_tokens, self.max_tokens
            )));
        }
        self.eos.validate()
    }

    fn fits(&self, s: &Sentence) -> bool {
        s.tokenize().within_length(self.min_tokens, self.max_tokens)
    }
}

/// One unit of source material that a task can turn into an example.
#[derive(Debug, Clone, Copy)]
enum Candidate<'a> {
    Sentence(&'a Sentence),
    Boundary(&'a Paragraph, usize),
    Pair(&'a NliRecord),
}

impl Candidate<'_> {
    fn id(&self) -> &str {
        match self {
            Candidate::Sentence(s) => &s.id,
            Candidate::Boundary(p, i) => &p.sentences[*i].id,
            Candidate::Pair(r) => &r.id,
        }
    }
}

fn sentences(task: Task, corpus: &Corpus) -> Result<Vec<&Sentence>, MutateError> {
    match corpus {
        Corpus::Sentences(s) => Ok(s.iter().collect()),
        Corpus::Paragraphs(ps) => Ok(ps.iter().flat_map(|p| &p.sentences).collect()),
        Corpus::Nli(_) => Err(MutateError::WrongCorpus { task, expected: "sentence or paragraph" }),
    }
}

fn records(task: Task, corpus: &Corpus) -> Result<&[NliRecord], MutateError> {
    match corpus {
        Corpus::Nli(r) => Ok(r),
        _ => Err(MutateError::WrongCorpus { task, expected: "NLI" }),
    }
}

/// Produce one example from a candidate, mutated or not.
fn realize(
    task: Task,
    c: Candidate<'_>,
    mutate: bool,
    cfg: &GenerateConfig,
    lex: &Lexicons,
    seed: u64,
) -> Result<MutationRecord, MutateError> {
    match (c, mutate) {
        (Candidate::Sentence(s), false) => Ok(MutationRecord::unchanged(
            format!("{task}-{}", s.id),
            s.id.clone(),
            task,
            Payload::Single { text: s.text.clone() },
            seed,
            None,
        )),
        (Candidate::Sentence(s), true) => {
            let t = s.tokenize();
            match task {
                Task::Wh => mutate_wh(&t, lex, seed),
                Task::Definiteness => mutate_articles(&t, lex, seed),
                Task::Coordination => mutate_conjunction(&t, lex, seed),
                _ => unreachable!("sentence candidates only feed acceptability tasks"),
            }
        }
        (Candidate::Boundary(p, i), m) => make_eos_example(p, i, m, &cfg.eos, seed),
        (Candidate::Pair(r), false) => Ok(MutationRecord::unchanged(
            format!("{task}-{}", r.id),
            r.id.clone(),
            task,
            nli_payload(&r.premise.text, &r.hypothesis.text),
            seed,
            r.gold_label.map(|g| g.label()),
        )),
        (Candidate::Pair(r), true) => match task {
            Task::Preposition => mutate_preposition(r, cfg.preposition_side, lex, seed),
            _ => negate_hypothesis(r, task, lex, seed),
        },
    }
}

/// Items satisfying the task's precondition, in corpus order.
fn candidates<'a>(
    task: Task,
    corpus: &'a Corpus,
    cfg: &GenerateConfig,
    lex: &Lexicons,
) -> Result<Vec<Candidate<'a>>, MutateError> {
    let viable = |c: &Candidate<'_>| realize(task, *c, true, cfg, lex, 0).is_ok();
    let out: Vec<Candidate<'a>> = match task {
        Task::Wh | Task::Definiteness | Task::Coordination => sentences(task, corpus)?
            .into_par_iter()
            .filter(|s| cfg.fits(s))
            .map(Candidate::Sentence)
            .filter(viable)
            .collect(),
        Task::Eos => {
            let Corpus::Paragraphs(ps) = corpus else {
                return Err(MutateError::WrongCorpus { task, expected: "paragraph" });
            };
            ps.par_iter()
                .flat_map_iter(|p| (0..p.sentences.len().saturating_sub(1)).map(move |i| Candidate::Boundary(p, i)))
                .filter(|c| {
                    let Candidate::Boundary(p, i) = c else { unreachable!() };
                    cfg.fits(&p.sentences[*i]) && cfg.fits(&p.sentences[*i + 1])
                })
                .filter(viable)
                .collect()
        }
        Task::Preposition => records(task, corpus)?
            .par_iter()
            .filter(|r| cfg.fits(&r.premise) && cfg.fits(&r.hypothesis))
            .filter(|r| !find_prepositions(&side_sentence(r, cfg.preposition_side).tokens, lex).is_empty())
            .map(Candidate::Pair)
            .collect(),
        Task::Comparative | Task::Quantification | Task::Spatial => {
            let (words, both) = match task {
                Task::Comparative => (lex.comparative_words(), true),
                Task::Quantification => (lex.quantifiers.clone(), true),
                _ => (lex.spatial_words.clone(), false),
            };
            let phrases = lexicon_phrases(&words);
            records(task, corpus)?
                .par_iter()
                .filter(|r| cfg.fits(&r.premise) && cfg.fits(&r.hypothesis))
                .filter(|r| pair_matches(r, &phrases, both))
                .map(Candidate::Pair)
                .filter(viable)
                .collect()
        }
        Task::Negation => records(task, corpus)?
            .par_iter()
            .filter(|r| cfg.fits(&r.premise) && cfg.fits(&r.hypothesis))
            .filter(|r| {
                find_antonym_match(r, lex)
                    .is_some_and(|m| generate_negation_patterns(r, &m, lex, 0).dropped.is_empty())
            })
            .map(Candidate::Pair)
            .collect(),
    };
    Ok(out)
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, MutateError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| MutateError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Number of items in `corpus` that `task` could use.
pub fn candidate_count(task: Task, corpus: &Corpus, cfg: &GenerateConfig, lex: &Lexicons) -> Result<usize, MutateError> {
    with_pool(cfg.threads, || candidates(task, corpus, cfg, lex).map(|c| c.len()))?
}

/// Select, shuffle and mutate candidates into a probing set.
///
/// Positions alternate unmutated/mutated, so exactly half (rounded down)
/// of the records are mutated. Negation instead emits whole groups of
/// sixteen pattern variants. Each record is seeded from `(seed, item id)`,
/// so the output does not depend on the thread count.
pub fn build_probing_set(
    task: Task,
    corpus: &Corpus,
    cfg: &GenerateConfig,
    lex: &Lexicons,
    seed: u64,
) -> Result<Vec<MutationRecord>, MutateError> {
    cfg.validate()?;
    with_pool(cfg.threads, || {
        let mut pool = candidates(task, corpus, cfg, lex)?;
        let needed = if task == Task::Negation {
            if cfg.target_size < 16 {
                return Err(MutateError::Config("negation target_size must be at least 16".into()));
            }
            cfg.target_size / 16
        } else {
            cfg.target_size
        };
        if pool.len() < needed {
            return Err(MutateError::InsufficientCandidates { task, found: pool.len(), needed });
        }
        pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        pool.truncate(needed);

        if task == Task::Negation {
            let groups: Vec<Vec<MutationRecord>> = pool
                .par_iter()
                .map(|c| {
                    let Candidate::Pair(r) = c else { unreachable!() };
                    let m = find_antonym_match(r, lex).expect("candidate has a match");
                    generate_negation_patterns(r, &m, lex, item_seed(seed, &r.id)).records
                })
                .collect();
            return Ok(groups.into_iter().flatten().collect());
        }
        pool.par_iter()
            .enumerate()
            .map(|(j, c)| realize(task, *c, j % 2 == 1, cfg, lex, item_seed(seed, c.id())))
            .collect()
    })?
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SourceKind;

    fn corpus(n: usize) -> Corpus {
        Corpus::Sentences(
            (0..n)
                .map(|i| {
                    Sentence::new(format!("s:{i}"), &format!("I wonder who saw item {i} today."), SourceKind::SentenceCorpus)
                        .unwrap()
                })
                .collect(),
        )
    }

    #[test]
    fn half_mutated() {
        let cfg = GenerateConfig { target_size: 100, ..Default::default() };
        let out = build_probing_set(Task::Wh, &corpus(120), &cfg, &Lexicons::bundled(), 3).unwrap();
        assert_eq!(out.len(), 100);
        assert_eq!(out.iter().filter(|r| r.is_mutated).count(), 50);
        let cfg = GenerateConfig { target_size: 7, ..Default::default() };
        let out = build_probing_set(Task::Wh, &corpus(7), &cfg, &Lexicons::bundled(), 3).unwrap();
        assert_eq!(out.iter().filter(|r| r.is_mutated).count(), 3);
    }

    #[test]
    fn insufficient() {
        let cfg = GenerateConfig { target_size: 100, ..Default::default() };
        let err = build_probing_set(Task::Wh, &corpus(3), &cfg, &Lexicons::bundled(), 3).unwrap_err();
        assert_eq!(err, MutateError::InsufficientCandidates { task: Task::Wh, found: 3, needed: 100 });
        assert!(err.to_string().contains("found 3"));
    }

    #[test]
    fn wrong_corpus() {
        let cfg = GenerateConfig::default();
        assert!(matches!(
            build_probing_set(Task::Negation, &corpus(3), &cfg, &Lexicons::bundled(), 3),
            Err(MutateError::WrongCorpus { .. })
        ));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let lex = Lexicons::bundled();
        let c = corpus(200);
        let run = |threads| {
            let cfg = GenerateConfig { target_size: 150, threads: Some(threads), ..Default::default() };
            build_probing_set(Task::Wh, &c, &cfg, &lex, 99).unwrap()
        };
        assert_eq!(run(1), run(4));
    }
}
