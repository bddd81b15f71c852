//! Accuracy on lexically versus explicitly negated pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_ids, EvalError, PredictionSet};
use crate::corpus::DatasetRecord;
use crate::mutate::NegationPattern;
use crate::task::Label;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubsetScore {
    pub correct: usize,
    pub count: usize,
}

impl SubsetScore {
    /// `None` for an empty subset.
    pub fn accuracy(&self) -> Option<f64> {
        (self.count > 0).then(|| self.correct as f64 / self.count as f64)
    }

    fn add(&mut self, hit: bool) {
        self.count += 1;
        self.correct += usize::from(hit);
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NegationSubsets {
    pub all: SubsetScore,
    /// Some side negated with an antonym, no side with "not".
    pub lexical_only: SubsetScore,
    /// Some side negated with "not", no side with an antonym.
    pub explicit_only: SubsetScore,
}

fn classify(p: NegationPattern) -> (bool, bool) {
    let lexical = p.premise.is_lexical() || p.hypothesis.is_lexical();
    let explicit = p.premise.is_explicit() || p.hypothesis.is_explicit();
    (lexical && !explicit, explicit && !lexical)
}

/// Score predictions on the whole negation set and on its lexical-only
/// and explicit-only subsets.
pub fn negation_subsets(dataset: &[DatasetRecord], pred: &PredictionSet) -> Result<NegationSubsets, EvalError> {
    let gold: BTreeMap<&String, (Label, NegationPattern)> = dataset
        .iter()
        .map(|r| {
            let label = r.gold_label().ok_or_else(|| EvalError::MissingLabel(r.id.clone()))?;
            let pattern =
                NegationPattern::from_kind(&r.mutation.kind).ok_or_else(|| EvalError::MissingPattern(r.id.clone()))?;
            Ok((&r.id, (label, pattern)))
        })
        .collect::<Result<_, EvalError>>()?;
    check_ids(gold.keys().copied(), pred.predictions.keys())?;
    let mut out = NegationSubsets::default();
    for (id, (label, pattern)) in gold {
        let hit = pred.predictions[id] == label;
        out.all.add(hit);
        let (lexical_only, explicit_only) = classify(pattern);
        debug_assert!(!(lexical_only && explicit_only));
        if lexical_only {
            out.lexical_only.add(hit);
        }
        if explicit_only {
            out.explicit_only.add(hit);
        }
    }
    Ok(out)
}
