//! Stratified k-fold splitting and the cross-validation loop.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::task::Label;

pub type TrainerError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub folds: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FoldAssignment {
    pub fn fold_of(&self, item_id: &str) -> Option<usize> {
        self.folds.get(item_id).copied()
    }

    /// Item ids in fold `f`, in id order.
    pub fn members(&self, f: usize) -> Vec<&str> {
        self.folds.iter().filter(|(_, &g)| g == f).map(|(id, _)| id.as_str()).collect()
    }
}

/// Assign items to `k` folds so each fold holds every class in near-equal
/// measure.
///
/// Each class is shuffled and dealt round-robin. The dealing position
/// carries over from one class to the next (classes in label order), so
/// fold sizes also differ by at most one.
pub fn stratified_folds<'a>(
    items: impl IntoIterator<Item = (&'a str, Label)>,
    k: usize,
    seed: u64,
) -> Result<FoldAssignment, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidK { k, min: 2 });
    }
    let mut by_class: BTreeMap<Label, Vec<&str>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for (id, label) in items {
        if !seen.insert(id) {
            return Err(EvalError::DuplicateId(id.to_string()));
        }
        by_class.entry(label).or_default().push(id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut next = 0;
    for (label, mut ids) in by_class {
        if ids.len() < k {
            let w = format!("class {label} has {} items, fewer than {k} folds", ids.len());
            log::warn!("{w}");
            warnings.push(w);
        }
        // Sort first so the result does not depend on input order.
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        for id in ids {
            folds.insert(id.to_string(), next % k);
            next += 1;
        }
    }
    Ok(FoldAssignment { k, folds, warnings })
}

/// An item taking part in cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CvItem<T> {
    pub id: String,
    pub label: Label,
    pub data: T,
}

/// One round of cross-validation: test on fold `fold`, select on the next.
#[derive(Debug)]
pub struct FoldSplit<'a, T> {
    pub fold: usize,
    pub train: Vec<&'a CvItem<T>>,
    pub dev: Vec<&'a CvItem<T>>,
    pub test: Vec<&'a CvItem<T>>,
}

/// Fits on `train` (using `dev` for model selection) and labels `test`,
/// one prediction per test item in order.
pub trait Trainer<T>: Sync {
    fn fit_predict(&self, split: &FoldSplit<'_, T>) -> Result<Vec<Label>, TrainerError>;
}

impl<T, F> Trainer<T> for F
where
    F: Fn(&FoldSplit<'_, T>) -> Result<Vec<Label>, TrainerError> + Sync,
{
    fn fit_predict(&self, split: &FoldSplit<'_, T>) -> Result<Vec<Label>, TrainerError> {
        self(split)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Each item's prediction from the round where it was tested.
    pub predictions: BTreeMap<String, Label>,
}

/// Run every fold as the test set once, with dev fold `(test + 1) mod k`
/// and the rest for training. Folds run in parallel.
pub fn cross_validate<T: Sync>(
    items: &[CvItem<T>],
    folds: &FoldAssignment,
    trainer: &impl Trainer<T>,
) -> Result<CvResult, EvalError> {
    let k = folds.k;
    if k < 3 {
        return Err(EvalError::InvalidK { k, min: 3 });
    }
    super::check_ids(folds.folds.keys(), items.iter().map(|i| &i.id))?;
    let fold_of: Vec<usize> = items.iter().map(|i| folds.folds[&i.id]).collect();
    let rounds: Vec<(f64, Vec<(&str, Label)>)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let dev_fold = (f + 1) % k;
            let mut split = FoldSplit { fold: f, train: Vec::new(), dev: Vec::new(), test: Vec::new() };
            for (item, &g) in items.iter().zip(&fold_of) {
                match g {
                    g if g == f => split.test.push(item),
                    g if g == dev_fold => split.dev.push(item),
                    _ => split.train.push(item),
                }
            }
            let preds = trainer.fit_predict(&split).map_err(|source| EvalError::Trainer { fold: f, source })?;
            if preds.len() != split.test.len() {
                return Err(EvalError::PredictionCount { fold: f, expected: split.test.len(), found: preds.len() });
            }
            let correct = split.test.iter().zip(&preds).filter(|(i, p)| i.label == **p).count();
            let acc = if split.test.is_empty() { 0.0 } else { correct as f64 / split.test.len() as f64 };
            Ok((acc, split.test.iter().map(|i| i.id.as_str()).zip(preds).collect()))
        })
        .collect::<Result<_, _>>()?;
    let mut predictions = BTreeMap::new();
    let mut fold_accuracies = Vec::with_capacity(k);
    for (acc, preds) in rounds {
        fold_accuracies.push(acc);
        for (id, p) in preds {
            let first = predictions.insert(id.to_string(), p).is_none();
            assert!(first, "item {id} tested twice");
        }
    }
    assert_eq!(predictions.len(), items.len(), "every item is tested exactly once");
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
    Ok(CvResult { fold_accuracies, mean_accuracy, predictions })
}
