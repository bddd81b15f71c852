//! Accuracy, baselines, prediction overlap, restart variance and
//! vocabulary overlap.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_ids, regress, EvalError, PredictionSet, RegressionResult};
use crate::corpus::tokenize;
use crate::task::{Label, Task};

/// Fraction of items whose prediction equals the gold label.
pub fn accuracy(pred: &PredictionSet, gold: &BTreeMap<String, Label>) -> Result<f64, EvalError> {
    check_ids(gold.keys(), pred.predictions.keys())?;
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let correct = gold.iter().filter(|(id, l)| pred.predictions[*id] == **l).count();
    Ok(correct as f64 / gold.len() as f64)
}

/// Share of the most frequent label.
pub fn majority_baseline<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Result<f64, EvalError> {
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(*l).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    let top = counts.values().max().ok_or(EvalError::Empty)?;
    Ok(*top as f64 / total as f64)
}

fn same_items(a: &PredictionSet, b: &PredictionSet) -> Result<(), EvalError> {
    if a.task != b.task {
        return Err(EvalError::TaskMismatch(a.task, b.task));
    }
    check_ids(a.predictions.keys(), b.predictions.keys())
}

fn agreeing(a: &PredictionSet, b: &PredictionSet) -> usize {
    a.predictions.iter().filter(|(id, l)| b.predictions[*id] == **l).count()
}

/// Fraction of items where the two models predict the same label.
pub fn prediction_overlap(a: &PredictionSet, b: &PredictionSet) -> Result<f64, EvalError> {
    same_items(a, b)?;
    if a.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(agreeing(a, b) as f64 / a.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapMatrix {
    /// Row and column order, sorted.
    pub model_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl OverlapMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.model_ids.iter().position(|m| m == a)?;
        let j = self.model_ids.iter().position(|m| m == b)?;
        Some(self.values[i][j])
    }

    fn from_counts(model_ids: Vec<String>, agree: &[Vec<f64>], total: f64) -> Self {
        let values = agree.iter().map(|row| row.iter().map(|c| c / total).collect()).collect();
        OverlapMatrix { model_ids, values }
    }

    /// Tab-separated table with a header row.
    pub fn to_tsv(&self) -> String {
        let mut s = format!("model\t{}\n", self.model_ids.join("\t"));
        for (id, row) in self.model_ids.iter().zip(&self.values) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            s.push_str(&format!("{id}\t{}\n", cells.join("\t")));
        }
        s
    }
}

fn sorted_sets(sets: &[PredictionSet]) -> Result<Vec<&PredictionSet>, EvalError> {
    let mut sorted: Vec<&PredictionSet> = sets.iter().collect();
    sorted.sort_by(|a, b| a.model_id.cmp(&b.model_id));
    if let Some(w) = sorted.windows(2).find(|w| w[0].model_id == w[1].model_id) {
        return Err(EvalError::DuplicateId(w[0].model_id.clone()));
    }
    Ok(sorted)
}

/// Agreement counts between every pair of sets (upper triangle computed
/// once, mirrored).
fn agreement_counts(sorted: &[&PredictionSet]) -> Result<Vec<Vec<f64>>, EvalError> {
    let n = sorted.len();
    for s in &sorted[1..] {
        same_items(sorted[0], s)?;
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let counts: Vec<usize> = pairs.par_iter().map(|&(i, j)| agreeing(sorted[i], sorted[j])).collect();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = sorted[i].len() as f64;
    }
    for (&(i, j), c) in pairs.iter().zip(counts) {
        m[i][j] = c as f64;
        m[j][i] = c as f64;
    }
    Ok(m)
}

/// Pairwise overlap between models on one task.
pub fn overlap_matrix(sets: &[PredictionSet]) -> Result<OverlapMatrix, EvalError> {
    let sorted = sorted_sets(sets)?;
    let first = sorted.first().ok_or(EvalError::Empty)?;
    if first.is_empty() {
        return Err(EvalError::Empty);
    }
    let counts = agreement_counts(&sorted)?;
    let ids = sorted.iter().map(|s| s.model_id.clone()).collect();
    Ok(OverlapMatrix::from_counts(ids, &counts, first.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    /// Pool items across tasks, so larger tasks weigh more.
    #[default]
    Micro,
    /// Average the per-task matrices.
    Macro,
}

/// Overlap pooled over several tasks. Every task must cover the same models.
pub fn aggregate_overlap(per_task: &[Vec<PredictionSet>], pooling: Pooling) -> Result<OverlapMatrix, EvalError> {
    let mut ids: Option<Vec<String>> = None;
    let mut sum: Vec<Vec<f64>> = Vec::new();
    let mut total = 0.0;
    for sets in per_task {
        let sorted = sorted_sets(sets)?;
        let these: Vec<String> = sorted.iter().map(|s| s.model_id.clone()).collect();
        match &ids {
            None => {
                sum = vec![vec![0.0; these.len()]; these.len()];
                ids = Some(these);
            }
            Some(prev) if *prev != these => {
                return Err(EvalError::IdMismatch {
                    missing: prev.iter().filter(|m| !these.contains(m)).cloned().collect(),
                    extra: these.iter().filter(|m| !prev.contains(m)).cloned().collect(),
                })
            }
            Some(_) => {}
        }
        let n = sorted.first().map_or(0, |s| s.len()) as f64;
        if n == 0.0 {
            return Err(EvalError::Empty);
        }
        let counts = agreement_counts(&sorted)?;
        let (scale, weight) = match pooling {
            Pooling::Micro => (1.0, n),
            Pooling::Macro => (1.0 / n, 1.0),
        };
        for (srow, crow) in sum.iter_mut().zip(&counts) {
            for (s, c) in srow.iter_mut().zip(crow) {
                *s += c * scale;
            }
        }
        total += weight;
    }
    let ids = ids.ok_or(EvalError::Empty)?;
    Ok(OverlapMatrix::from_counts(ids, &sum, total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartStats {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std_dev: f64,
    pub n: usize,
}

impl fmt::Display for RestartStats {
    /// Percentages to two decimals: `46.14 (±0.89)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} (±{:.2})", 100.0 * self.mean, 100.0 * self.std_dev)
    }
}

/// Mean and sample standard deviation of accuracies across restarts.
pub fn restart_stats(accuracies: &[f64]) -> Result<RestartStats, EvalError> {
    let n = accuracies.len();
    if n < 2 {
        return Err(EvalError::TooFewValues { needed: 2, found: n });
    }
    let mean = accuracies.iter().sum::<f64>() / n as f64;
    let var = accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(RestartStats { mean, std_dev: var.sqrt(), n })
}

/// Lowercased word types of `texts`; tokens without a letter or digit
/// are punctuation and skipped.
pub fn vocabulary<'a>(texts: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    texts
        .into_iter()
        .filter_map(|t| tokenize(t).ok())
        .flat_map(|s| s.tokens)
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(|t| t.to_lowercase())
        .collect()
}

/// Fraction of probing types also present in the pretraining vocabulary.
pub fn vocab_overlap(pretraining: &BTreeSet<String>, probing: &BTreeSet<String>) -> Result<f64, EvalError> {
    if probing.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(probing.intersection(pretraining).count() as f64 / probing.len() as f64)
}

/// One (model, task) observation for the vocabulary regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabPoint {
    pub model_id: String,
    pub task: Task,
    pub overlap: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabRegression {
    pub overall: RegressionResult,
    /// Per-task fits, Bonferroni-adjusted for the number of tasks.
    pub per_task: Vec<(Task, RegressionResult)>,
    /// Tasks with too few points or constant overlap, and why.
    pub skipped: Vec<(Task, String)>,
}

impl VocabRegression {
    /// One tab-separated row per fit, overall last.
    pub fn rows(&self) -> Vec<String> {
        let row = |name: &str, r: &RegressionResult| {
            format!(
                "{name}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.3}\t{:.4}\t{:.4}",
                r.n, r.slope, r.intercept, r.slope_se, r.t, r.p_value, r.adjusted_p
            )
        };
        self.per_task
            .iter()
            .map(|(t, r)| row(t.name(), r))
            .chain(std::iter::once(row("overall", &self.overall)))
            .collect()
    }

    pub const HEADER: &'static str = "task\tn\tslope\tintercept\tse\tt\tp\tp_adj";
}

/// Regress accuracy on vocabulary overlap, over all points and per task.
pub fn vocab_regression(points: &[VocabPoint]) -> Result<VocabRegression, EvalError> {
    let xy = |ps: &[&VocabPoint]| ps.iter().map(|p| (p.overlap, p.accuracy)).collect::<Vec<_>>();
    let all: Vec<&VocabPoint> = points.iter().collect();
    let overall = regress(&xy(&all), 1)?;
    let mut by_task: BTreeMap<Task, Vec<&VocabPoint>> = BTreeMap::new();
    for p in points {
        by_task.entry(p.task).or_default().push(p);
    }
    let m = by_task.len();
    let mut per_task = Vec::new();
    let mut skipped = Vec::new();
    for (task, ps) in by_task {
        match regress(&xy(&ps), m) {
            Ok(r) => per_task.push((task, r)),
            Err(e @ (EvalError::TooFewValues { .. } | EvalError::DegenerateX)) => skipped.push((task, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    Ok(VocabRegression { overall, per_task, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(model: &str, labels: &[Label]) -> PredictionSet {
        let mut s = PredictionSet::new(model, Task::Wh);
        for (i, l) in labels.iter().enumerate() {
            s.predictions.insert(format!("i{i}"), *l);
        }
        s
    }

    use Label::{Natural as N, Unnatural as U};

    #[test]
    fn accuracy_cases() {
        let gold: BTreeMap<String, Label> = set("g", &[N, U, N, U]).predictions;
        assert_eq!(accuracy(&set("a", &[N, U, N, U]), &gold).unwrap(), 1.0);
        assert_eq!(accuracy(&set("a", &[N, N, N, N]), &gold).unwrap(), 0.5);
        assert_eq!(accuracy(&set("a", &[N, U, N, N]), &gold).unwrap(), 0.75);
        assert!(matches!(accuracy(&set("a", &[N, U, N]), &gold), Err(EvalError::IdMismatch { .. })));
    }

    #[test]
    fn baselines() {
        let labels: Vec<Label> = [N; 250].into_iter().chain([U; 250]).collect();
        assert_eq!(majority_baseline(&labels).unwrap(), 0.5);
        use Label::*;
        assert_eq!(majority_baseline(&[Entailment, Entailment, Neutral, Contradiction]).unwrap(), 0.5);
        assert_eq!(majority_baseline(&[Neutral]).unwrap(), 1.0);
        assert!(majority_baseline(&[]).is_err());
    }

    #[test]
    fn overlap_cases() {
        let a = set("a", &[N, U, N, U]);
        assert_eq!(prediction_overlap(&a, &a).unwrap(), 1.0);
        assert_eq!(prediction_overlap(&a, &set("b", &[U, N, U, N])).unwrap(), 0.0);
        assert_eq!(prediction_overlap(&a, &set("b", &[N, U, N, N])).unwrap(), 0.75);
        let m = overlap_matrix(&[a.clone(), set("b", &[N, U, N, U])]).unwrap();
        assert_eq!(m.values, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let mut other = a.clone();
        other.task = Task::Eos;
        assert!(matches!(prediction_overlap(&a, &other), Err(EvalError::TaskMismatch(..))));
    }

    #[test]
    fn matrix_sorted_by_model() {
        let m = overlap_matrix(&[set("z", &[N, N]), set("a", &[N, U])]).unwrap();
        assert_eq!(m.model_ids, ["a", "z"]);
        assert_eq!(m.get("a", "z"), Some(0.5));
        assert!(m.to_tsv().starts_with("model\ta\tz\na\t1.0000\t0.5000\n"));
    }

    #[test]
    fn micro_and_macro() {
        let t1 = vec![set("a", &[N, N]), set("b", &[N, U])];
        let mut t2 = vec![set("a", &[N, N, N, N, N, N]), set("b", &[N, N, N, N, N, N])];
        for s in &mut t2 {
            s.task = Task::Eos;
        }
        let micro = aggregate_overlap(&[t1.clone(), t2.clone()], Pooling::Micro).unwrap();
        // (1 + 6) / 8 agreeing
        assert_eq!(micro.get("a", "b"), Some(7.0 / 8.0));
        let mac = aggregate_overlap(&[t1, t2], Pooling::Macro).unwrap();
        assert_eq!(mac.get("a", "b"), Some(0.75));
        assert_eq!(mac.get("b", "b"), Some(1.0));
    }

    #[test]
    fn restarts() {
        let s = restart_stats(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!((s.mean, s.std_dev), (0.5, 0.0));
        let s = restart_stats(&[0.4, 0.6]).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-15);
        assert!((s.std_dev - 0.02f64.sqrt()).abs() < 1e-12);
        assert!(restart_stats(&[0.3]).is_err());
    }

    #[test]
    fn vocab_cases() {
        let v = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(vocab_overlap(&v(&["a", "b"]), &v(&["a", "b"])).unwrap(), 1.0);
        assert_eq!(vocab_overlap(&v(&["x"]), &v(&["a", "b"])).unwrap(), 0.0);
        assert_eq!(vocab_overlap(&v(&["a", "b", "x"]), &v(&["a", "b", "c", "d"])).unwrap(), 0.5);
        assert_eq!(vocabulary(["The cat, the DOG!", "Cats ."]), v(&["cat", "cats", "dog", "the"]));
    }
}
