//! Synthetic annotators for exercising the pipeline without people.

use rand::seq::{index::sample, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AnnotateError, AnnotationItem, AnnotationResponse, ResponseValue, RESPONSES_PER_ITEM};
use crate::hash::item_seed;
use crate::task::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// A wrong answer is the opposite label (natural/unnatural,
    /// entailment/contradiction; neutral goes to either).
    Opposite,
    /// A wrong answer is drawn uniformly from the other options.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorProfile {
    /// Probability that each annotator answers with the expected label.
    pub accuracies: Vec<f64>,
    pub noise: NoiseModel,
    /// Chance an NLI response is the "does not make sense" flag.
    #[serde(default)]
    pub nonsense_rate: f64,
}

impl AnnotatorProfile {
    /// `n` annotators sharing one accuracy, with opposite-label noise.
    pub fn uniform(n: usize, accuracy: f64) -> Self {
        AnnotatorProfile { accuracies: vec![accuracy; n], noise: NoiseModel::Opposite, nonsense_rate: 0.0 }
    }

    pub fn validate(&self) -> Result<(), AnnotateError> {
        if self.accuracies.len() < RESPONSES_PER_ITEM {
            return Err(AnnotateError::Profile(format!(
                "need at least {RESPONSES_PER_ITEM} annotators, got {}",
                self.accuracies.len()
            )));
        }
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !self.accuracies.iter().copied().all(prob) || !prob(self.nonsense_rate) {
            return Err(AnnotateError::Profile("probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn annotator_id(i: usize) -> String {
        format!("sim-{i:02}")
    }
}

fn value_for(label: Label, rng: &mut ChaCha8Rng) -> ResponseValue {
    match label {
        Label::Natural => ResponseValue::Natural,
        Label::Unnatural => ResponseValue::Unnatural,
        Label::Entailment => ResponseValue::Likert(rng.random_range(4..=5)),
        Label::Neutral => ResponseValue::Likert(3),
        Label::Contradiction => ResponseValue::Likert(rng.random_range(1..=2)),
    }
}

/// A response other than the one for `truth`, following the noise model.
fn wrong(truth: Label, noise: NoiseModel, rng: &mut ChaCha8Rng) -> ResponseValue {
    use Label::*;
    let others: &[Label] = match (truth, noise) {
        (Natural, NoiseModel::Opposite) => &[Unnatural],
        (Unnatural, NoiseModel::Opposite) => &[Natural],
        (Natural, NoiseModel::Uniform) => {
            return *[ResponseValue::Unnatural, ResponseValue::Neither].choose(rng).expect("non-empty")
        }
        (Unnatural, NoiseModel::Uniform) => {
            return *[ResponseValue::Natural, ResponseValue::Neither].choose(rng).expect("non-empty")
        }
        (Entailment, NoiseModel::Opposite) => &[Contradiction],
        (Contradiction, NoiseModel::Opposite) => &[Entailment],
        (Neutral, _) => &[Entailment, Contradiction],
        (Entailment, NoiseModel::Uniform) => &[Neutral, Contradiction],
        (Contradiction, NoiseModel::Uniform) => &[Entailment, Neutral],
    };
    let l = *others.choose(rng).expect("non-empty");
    value_for(l, rng)
}

/// Three responses per item from three distinct simulated annotators.
/// Each item draws from its own generator seeded by `(seed, item id)`.
pub fn simulate_responses(
    items: &[AnnotationItem],
    profile: &AnnotatorProfile,
    seed: u64,
) -> Result<Vec<AnnotationResponse>, AnnotateError> {
    profile.validate()?;
    let mut out = Vec::with_capacity(items.len() * RESPONSES_PER_ITEM);
    for (n, item) in items.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(item_seed(seed, &item.item_id));
        let acceptability = item.task.format().is_acceptability();
        let truth = match item.expected_label {
            Some(l) => l,
            None if acceptability => return Err(AnnotateError::NoExpectedLabel(item.item_id.clone())),
            // Mutated NLI pairs carry no expected label; pick a stand-in truth.
            None => *[Label::Entailment, Label::Neutral, Label::Contradiction].choose(&mut rng).expect("non-empty"),
        };
        let who = sample(&mut rng, profile.accuracies.len(), RESPONSES_PER_ITEM);
        for (k, a) in who.into_iter().enumerate() {
            let value = if !acceptability && rng.random_bool(profile.nonsense_rate) {
                ResponseValue::Nonsense
            } else if rng.random_bool(profile.accuracies[a]) {
                value_for(truth, &mut rng)
            } else {
                wrong(truth, profile.noise, &mut rng)
            };
            out.push(AnnotationResponse {
                annotator_id: AnnotatorProfile::annotator_id(a),
                item_id: item.item_id.clone(),
                value,
                timestamp: (n * RESPONSES_PER_ITEM + k) as u64,
            });
        }
    }
    Ok(out)
}
