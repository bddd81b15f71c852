//! Sentence-boundary (EOS) examples from adjacent paragraph sentences.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{rng_for, MutateError, MutationRecord};
use crate::corpus::{ChangedSpan, Paragraph, Payload};
use crate::task::Task;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EosConfig {
    /// Standard deviation of the split-index perturbation.
    pub sigma: f64,
    pub max_resamples: usize,
}

impl Default for EosConfig {
    fn default() -> Self {
        EosConfig { sigma: 2.0, max_resamples: 100 }
    }
}

impl EosConfig {
    pub fn validate(&self) -> Result<(), MutateError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(MutateError::Config(format!("eos sigma must be positive, got {}", self.sigma)));
        }
        if self.max_resamples == 0 {
            return Err(MutateError::Config("eos max_resamples must be positive".into()));
        }
        Ok(())
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '“' | '”' | '‘' | '’' | '…' | '—' | '–' | '«' | '»')
}

/// Lowercase and remove punctuation, dropping tokens left empty.
pub fn strip_for_eos(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.chars().filter(|&c| !is_punct(c)).collect::<String>().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// One draw of `round(N(0, sigma))`, the offset of a sampled split from
/// the true one before any exclusion.
pub fn sample_eos_offset<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> i64 {
    let normal = Normal::new(0.0, sigma).expect("sigma validated positive");
    normal.sample(rng).round() as i64
}

/// Join sentences `index` and `index + 1` of `paragraph` into running text and
/// split it either at the true boundary or at a perturbed one.
pub fn make_eos_example(
    paragraph: &Paragraph,
    index: usize,
    mutate: bool,
    cfg: &EosConfig,
    seed: u64,
) -> Result<MutationRecord, MutateError> {
    cfg.validate()?;
    let len = paragraph.sentences.len();
    if index + 1 >= len {
        return Err(MutateError::IndexOutOfRange { paragraph: paragraph.id.clone(), index, len });
    }
    let first = strip_for_eos(&paragraph.sentences[index].text);
    let second = strip_for_eos(&paragraph.sentences[index + 1].text);
    if first.is_empty() || second.is_empty() {
        return Err(MutateError::NoCandidate(format!(
            "sentence {index} or {} of `{}` has no words",
            index + 1,
            paragraph.id
        )));
    }
    let k = first.len();
    let stream: Vec<String> = first.into_iter().chain(second).collect();
    let total = stream.len();
    let split = |at: usize| Payload::Pair { sentences: [stream[..at].join(" "), stream[at..].join(" ")] };
    let source_id = paragraph.sentences[index].id.clone();
    let example_id = format!("{}-{source_id}", Task::Eos);
    let correct = split(k);
    if !mutate {
        return Ok(MutationRecord::unchanged(example_id, source_id, Task::Eos, correct, seed, None));
    }
    if total < 3 {
        return Err(MutateError::NoCandidate(format!("`{}` has no incorrect split", paragraph.id)));
    }

    let mut rng = rng_for(seed);
    let valid = |at: i64| at != k as i64 && at >= 1 && at <= total as i64 - 1;
    let mut chosen = None;
    for _ in 0..cfg.max_resamples {
        let at = k as i64 + sample_eos_offset(&mut rng, cfg.sigma);
        if valid(at) {
            chosen = Some((at, "eos-offset"));
            break;
        }
    }
    let (at, tag) = match chosen {
        Some(c) => c,
        None => {
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            let at = [k as i64 + sign, k as i64 - sign]
                .into_iter()
                .find(|&a| valid(a))
                .expect("total >= 3 leaves a neighbour split");
            log::warn!("eos resampling exhausted for `{}`, falling back to {at}", paragraph.id);
            (at, "eos-fallback")
        }
    };
    let at = at as usize;
    let spans = vec![ChangedSpan { side: None, position: at, old: Vec::new(), new: vec!["//".into()] }];
    let kind = format!("{tag}:{:+}", at as i64 - k as i64);
    Ok(MutationRecord::changed(example_id, source_id, Task::Eos, correct, split(at), spans, kind, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Sentence, SourceKind};

    fn paragraph(lines: &[&str]) -> Paragraph {
        Paragraph {
            id: "wiki:1".into(),
            sentences: lines
                .iter()
                .enumerate()
                .map(|(i, l)| Sentence::new(format!("wiki:{}", i + 1), l, SourceKind::ParagraphCorpus).unwrap())
                .collect(),
        }
    }

    fn halves(r: &MutationRecord) -> [String; 2] {
        match &r.mutated {
            Payload::Pair { sentences } => sentences.clone(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn strips_punctuation_and_case() {
        assert_eq!(strip_for_eos("The U.S. grew, \"fast\"!"), ["the", "us", "grew", "fast"]);
        assert_eq!(strip_for_eos("-- ..."), Vec::<String>::new());
    }

    #[test]
    fn correct_split() {
        let p = paragraph(&["The forehead is gathered in a frown.", "The mouth is slightly parted to reveal the teeth."]);
        let r = make_eos_example(&p, 0, false, &EosConfig::default(), 0).unwrap();
        assert_eq!(
            halves(&r),
            ["the forehead is gathered in a frown", "the mouth is slightly parted to reveal the teeth"]
        );
        assert!(!r.is_mutated);
        assert_eq!(r.original, r.mutated);
    }

    #[test]
    fn mutated_split_differs_and_concatenates() {
        let p = paragraph(&["One two three.", "Four five six seven."]);
        for seed in 0..200 {
            let r = make_eos_example(&p, 0, true, &EosConfig::default(), seed).unwrap();
            let [a, b] = halves(&r);
            assert_eq!(format!("{a} {b}"), "one two three four five six seven");
            assert_ne!(a, "one two three");
            assert!(!a.is_empty() && !b.is_empty());
        }
    }

    #[test]
    fn fallback_when_resampling_exhausted() {
        let p = paragraph(&["a b", "c"]);
        // A tiny sigma always rounds to the true index.
        let cfg = EosConfig { sigma: 1e-6, max_resamples: 3 };
        let r = make_eos_example(&p, 0, true, &cfg, 5).unwrap();
        assert!(r.mutation_kind.starts_with("eos-fallback:"));
        assert_eq!(halves(&r), ["a", "b c"]);
    }

    #[test]
    fn errors() {
        let p = paragraph(&["only one."]);
        assert!(matches!(
            make_eos_example(&p, 0, false, &EosConfig::default(), 0),
            Err(MutateError::IndexOutOfRange { .. })
        ));
        let p = paragraph(&["a", "b"]);
        assert!(make_eos_example(&p, 0, true, &EosConfig::default(), 0).is_err());
        let bad = EosConfig { sigma: 0.0, max_resamples: 1 };
        assert!(matches!(make_eos_example(&p, 0, false, &bad, 0), Err(MutateError::Config(_))));
    }

    #[test]
    fn offset_distribution() {
        let mut rng = rng_for(11);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_eos_offset(&mut rng, 2.0) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!(mean.abs() <= 0.05, "{mean}");
        assert!((1.95..=2.10).contains(&sd), "{sd}");
    }
}
