//! Probing runs: cross-validated acceptability classifiers and zero-shot
//! NLI evaluation.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{embed_sentence, pair_features, train_mlp, EpochLog, Examples, ModelError, TrainConfig, DEFAULT_DIM};
use crate::corpus::{tokenize, DatasetRecord, NliRecord, Payload};
use crate::evaluate::{cross_validate, stratified_folds, CvItem, CvResult, FoldSplit, PredictionSet, TrainerError};
use crate::task::{Label, Task, TaskFormat};

#[derive(Debug, Clone, Copy)]
pub enum ProbeMode<'a> {
    /// Train and test on the probing set under k-fold cross-validation.
    Acceptability,
    /// Train a pair classifier on `train`, then label the probing set.
    Nli { train: &'a [NliRecord] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub dim: usize,
    pub folds: usize,
    /// Share of the NLI training file held out for model selection.
    pub nli_dev_fraction: f64,
    pub train: TrainConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { dim: DEFAULT_DIM, folds: 10, nli_dev_fraction: 0.1, train: TrainConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub predictions: PredictionSet,
    /// Cross-validation details (acceptability mode).
    pub cv: Option<CvResult>,
    /// Best checkpoint of the NLI classifier.
    pub nli_best: Option<EpochLog>,
    /// How many probing-set gold labels the run looked at.
    pub label_reads: usize,
}

/// Counts every read of a probing-set label.
#[derive(Debug, Default)]
struct LabelReader(AtomicUsize);

impl LabelReader {
    fn read(&self, r: &DatasetRecord) -> Result<Label, ModelError> {
        self.0.fetch_add(1, Ordering::Relaxed);
        r.gold_label().ok_or_else(|| ModelError::MissingLabel(r.id.clone()))
    }
}

fn embed_text(text: &str, dim: usize) -> Result<super::SentenceVector, ModelError> {
    let t = tokenize(text).map_err(|_| ModelError::EmptyInput)?;
    embed_sentence(&t.tokens, dim)
}

/// Feature row of a probing item: the pooled vector, the two pooled
/// vectors side by side for pairs, or the matching features for NLI.
pub fn item_features(payload: &Payload, dim: usize) -> Result<Vec<f64>, ModelError> {
    match payload {
        Payload::Single { text } => Ok(embed_text(text, dim)?.values),
        Payload::Pair { sentences } => {
            let mut v = embed_text(&sentences[0], dim)?.values;
            v.extend(embed_text(&sentences[1], dim)?.values);
            Ok(v)
        }
        Payload::Nli { premise, hypothesis } => pair_features(&embed_text(premise, dim)?, &embed_text(hypothesis, dim)?),
    }
}

fn check_format(task: Task, r: &DatasetRecord) -> Result<(), ModelError> {
    let ok = r.task == task
        && matches!(
            (task.format(), &r.payload),
            (TaskFormat::AcceptabilitySingle, Payload::Single { .. })
                | (TaskFormat::AcceptabilityPair, Payload::Pair { .. })
                | (TaskFormat::Nli, Payload::Nli { .. })
        );
    if ok {
        Ok(())
    } else {
        Err(ModelError::TaskMismatch { item_id: r.id.clone(), task })
    }
}

fn class_index(labels: &[Label], l: Label) -> Result<usize, ModelError> {
    labels.iter().position(|x| *x == l).ok_or_else(|| ModelError::Config(format!("label {l} outside the task")))
}

/// Run the reference classifier on one probing set.
pub fn run_probing(
    task: Task,
    dataset: &[DatasetRecord],
    mode: ProbeMode<'_>,
    cfg: &ProbeConfig,
    model_id: &str,
) -> Result<ProbeOutcome, ModelError> {
    if dataset.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    for r in dataset {
        check_format(task, r)?;
    }
    let labels = task.format().labels();
    let features: Vec<Vec<f64>> = dataset.iter().map(|r| item_features(&r.payload, cfg.dim)).collect::<Result<_, _>>()?;
    let reader = LabelReader::default();
    let mut predictions = PredictionSet::new(model_id, task);

    match mode {
        ProbeMode::Acceptability => {
            if !task.format().is_acceptability() {
                return Err(ModelError::Config(format!("{task} is an NLI task; use NLI mode")));
            }
            let items: Vec<CvItem<Vec<f64>>> = dataset
                .iter()
                .zip(features)
                .map(|(r, data)| Ok(CvItem { id: r.id.clone(), label: reader.read(r)?, data }))
                .collect::<Result<_, ModelError>>()?;
            let folds = stratified_folds(items.iter().map(|i| (i.id.as_str(), i.label)), cfg.folds, cfg.train.seed)?;
            let trainer = |split: &FoldSplit<'_, Vec<f64>>| -> Result<Vec<Label>, TrainerError> {
                let rows = |xs: &[&CvItem<Vec<f64>>]| -> Result<(Vec<Vec<f64>>, Vec<usize>), ModelError> {
                    let x = xs.iter().map(|i| i.data.clone()).collect();
                    let y = xs.iter().map(|i| class_index(labels, i.label)).collect::<Result<_, _>>()?;
                    Ok((x, y))
                };
                let (tx, ty) = rows(&split.train)?;
                let (dx, dy) = rows(&split.dev)?;
                let fold_cfg = TrainConfig { seed: cfg.train.seed.wrapping_add(split.fold as u64), ..cfg.train.clone() };
                let trained =
                    train_mlp(Examples { x: &tx, y: &ty }, Examples { x: &dx, y: &dy }, labels.len(), &fold_cfg)?;
                Ok(split.test.iter().map(|i| labels[trained.params.predict(&i.data)]).collect())
            };
            let cv = cross_validate(&items, &folds, &trainer)?;
            predictions.predictions = cv.predictions.clone();
            Ok(ProbeOutcome { predictions, cv: Some(cv), nli_best: None, label_reads: reader.0.into_inner() })
        }
        ProbeMode::Nli { train } => {
            if task.format() != TaskFormat::Nli {
                return Err(ModelError::Config(format!("{task} is an acceptability task; use acceptability mode")));
            }
            let mut labeled: Vec<(&NliRecord, Label)> =
                train.iter().filter_map(|r| r.gold_label.map(|g| (r, g.label()))).collect();
            if labeled.is_empty() {
                return Err(ModelError::MissingTrainingData);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
            labeled.shuffle(&mut rng);
            let n_dev = ((labeled.len() as f64 * cfg.nli_dev_fraction).round() as usize).min(labeled.len() - 1);
            let mut x = Vec::with_capacity(labeled.len());
            let mut y = Vec::with_capacity(labeled.len());
            for (r, l) in &labeled {
                let p = embed_sentence(&r.premise.tokenize().tokens, cfg.dim)?;
                let h = embed_sentence(&r.hypothesis.tokenize().tokens, cfg.dim)?;
                x.push(pair_features(&p, &h)?);
                y.push(class_index(labels, *l)?);
            }
            let dev = Examples { x: &x[..n_dev], y: &y[..n_dev] };
            let fit = Examples { x: &x[n_dev..], y: &y[n_dev..] };
            let trained = train_mlp(fit, dev, labels.len(), &cfg.train)?;
            for (r, f) in dataset.iter().zip(&features) {
                predictions.predictions.insert(r.id.clone(), labels[trained.params.predict(f)]);
            }
            let best = trained.best().clone();
            Ok(ProbeOutcome { predictions, cv: None, nli_best: Some(best), label_reads: reader.0.into_inner() })
        }
    }
}
