//! Measurement and analysis over model predictions.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::DatasetRecord;
use crate::task::{Label, Task};

mod folds;
mod metrics;
mod negation;
mod report;
mod stats;

pub use folds::{cross_validate, stratified_folds, CvItem, CvResult, FoldAssignment, FoldSplit, Trainer, TrainerError};
pub use metrics::{
    accuracy, aggregate_overlap, majority_baseline, overlap_matrix, prediction_overlap, restart_stats, vocab_overlap,
    vocab_regression, vocabulary, OverlapMatrix, Pooling, RestartStats, VocabPoint, VocabRegression,
};
pub use negation::{negation_subsets, NegationSubsets, SubsetScore};
pub use report::{render_heatmap, write_report, AccuracyRow, Report};
pub use stats::{bonferroni, incomplete_beta, ln_gamma, regress, t_two_sided_p, RegressionResult};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("need at least {min} folds, got {k}")]
    InvalidK { k: usize, min: usize },
    #[error("duplicate item id `{0}`")]
    DuplicateId(String),
    #[error("item ids differ: {} missing ({}), {} extra ({})", missing.len(), preview(missing), extra.len(), preview(extra))]
    IdMismatch { missing: Vec<String>, extra: Vec<String> },
    #[error("prediction sets are for different tasks ({0} and {1})")]
    TaskMismatch(Task, Task),
    #[error("label {label} is not valid for task {task} (item `{item_id}`)")]
    InvalidLabel { item_id: String, label: Label, task: Task },
    #[error("item `{0}` has no gold label")]
    MissingLabel(String),
    #[error("item `{0}` has no negation pattern in its mutation kind")]
    MissingPattern(String),
    #[error("empty input")]
    Empty,
    #[error("need at least {needed} values, got {found}")]
    TooFewValues { needed: usize, found: usize },
    #[error("x values are constant")]
    DegenerateX,
    #[error("fold {fold}: {source}")]
    Trainer {
        fold: usize,
        #[source]
        source: TrainerError,
    },
    #[error("fold {fold}: trainer returned {found} predictions for {expected} test items")]
    PredictionCount { fold: usize, expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("cannot name a prediction file after `{0}`; expected <model>.<task>.jsonl")]
    PredictionFileName(PathBuf),
    #[error("image: {0}")]
    Image(String),
}

fn preview(ids: &[String]) -> String {
    let mut s = ids.iter().take(5).cloned().collect::<Vec<_>>().join(", ");
    if ids.len() > 5 {
        s.push_str(", ...");
    }
    s
}

impl EvalError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        EvalError::Io { path: path.to_path_buf(), source }
    }
}

/// Compare two id sets, returning ids only in `want` and only in `got`.
pub(crate) fn check_ids<'a>(
    want: impl IntoIterator<Item = &'a String>,
    got: impl IntoIterator<Item = &'a String>,
) -> Result<(), EvalError> {
    let want: BTreeSet<&String> = want.into_iter().collect();
    let got: BTreeSet<&String> = got.into_iter().collect();
    if want == got {
        return Ok(());
    }
    Err(EvalError::IdMismatch {
        missing: want.difference(&got).map(|s| s.to_string()).collect(),
        extra: got.difference(&want).map(|s| s.to_string()).collect(),
    })
}

/// Gold label per item id for a labeled dataset.
pub fn gold_labels(records: &[DatasetRecord]) -> Result<BTreeMap<String, Label>, EvalError> {
    let mut out = BTreeMap::new();
    for r in records {
        let label = r.gold_label().ok_or_else(|| EvalError::MissingLabel(r.id.clone()))?;
        if out.insert(r.id.clone(), label).is_some() {
            return Err(EvalError::DuplicateId(r.id.clone()));
        }
    }
    Ok(out)
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionLine {
    pub item_id: String,
    pub predicted_label: Label,
}

/// One model's predicted label for every item of one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub model_id: String,
    pub task: Task,
    pub predictions: BTreeMap<String, Label>,
}

impl PredictionSet {
    pub fn new(model_id: impl Into<String>, task: Task) -> Self {
        PredictionSet { model_id: model_id.into(), task, predictions: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    /// Every label belongs to the task's label set.
    pub fn validate(&self) -> Result<(), EvalError> {
        let allowed = self.task.format().labels();
        match self.predictions.iter().find(|(_, l)| !allowed.contains(l)) {
            Some((id, &label)) => Err(EvalError::InvalidLabel { item_id: id.clone(), label, task: self.task }),
            None => Ok(()),
        }
    }

    /// Model and task named by a `<model>.<task>.jsonl` file.
    pub fn name_from_path(path: &Path) -> Result<(String, Task), EvalError> {
        let bad = || EvalError::PredictionFileName(path.to_path_buf());
        let stem = path.file_stem().and_then(|s| s.to_str()).ok_or_else(bad)?;
        let (model, task) = stem.rsplit_once('.').ok_or_else(bad)?;
        if model.is_empty() {
            return Err(bad());
        }
        Ok((model.to_string(), task.parse().map_err(|_| bad())?))
    }

    pub fn read(path: &Path, model_id: impl Into<String>, task: Task) -> Result<Self, EvalError> {
        let raw = fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
        let mut set = PredictionSet::new(model_id, task);
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let p: PredictionLine = serde_json::from_str(line).map_err(|e| EvalError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            if set.predictions.insert(p.item_id.clone(), p.predicted_label).is_some() {
                return Err(EvalError::DuplicateId(p.item_id));
            }
        }
        set.validate()?;
        Ok(set)
    }

    /// Read a file named `<model>.<task>.jsonl`.
    pub fn read_named(path: &Path) -> Result<Self, EvalError> {
        let (model, task) = Self::name_from_path(path)?;
        Self::read(path, model, task)
    }

    /// Write newline-delimited `{item_id, predicted_label}` records in id order.
    pub fn write(&self, path: &Path) -> Result<(), EvalError> {
        let mut out = Vec::new();
        for (id, &label) in &self.predictions {
            let line = PredictionLine { item_id: id.clone(), predicted_label: label };
            serde_json::to_writer(&mut out, &line).expect("prediction lines serialize");
            out.push(b'\n');
        }
        let mut f = fs::File::create(path).map_err(|e| EvalError::io(path, e))?;
        f.write_all(&out).map_err(|e| EvalError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names() {
        let (m, t) = PredictionSet::name_from_path(Path::new("out/elmo.lm.negation.jsonl")).unwrap();
        assert_eq!((m.as_str(), t), ("elmo.lm", Task::Negation));
        assert!(PredictionSet::name_from_path(Path::new("negation.jsonl")).is_err());
        assert!(PredictionSet::name_from_path(Path::new("m.nope.jsonl")).is_err());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.wh.jsonl");
        let mut set = PredictionSet::new("m", Task::Wh);
        set.predictions.insert("b".into(), Label::Natural);
        set.predictions.insert("a".into(), Label::Unnatural);
        set.write(&path).unwrap();
        let raw = fs::read_to_string(&path).unwrap();
        assert_eq!(raw.lines().next(), Some(r#"{"item_id":"a","predicted_label":"unnatural"}"#));
        assert_eq!(PredictionSet::read_named(&path).unwrap(), set);
    }

    #[test]
    fn wrong_label_set() {
        let mut set = PredictionSet::new("m", Task::Wh);
        set.predictions.insert("a".into(), Label::Neutral);
        assert!(matches!(set.validate(), Err(EvalError::InvalidLabel { .. })));
    }

    #[test]
    fn id_mismatch_lists_both_sides() {
        let a = ["x".to_string(), "y".to_string()];
        let b = ["y".to_string(), "z".to_string()];
        match check_ids(&a, &b) {
            Err(EvalError::IdMismatch { missing, extra }) => assert_eq!((missing, extra), (vec!["x".into()], vec!["z".into()])),
            other => panic!("{other:?}"),
        }
    }
}
