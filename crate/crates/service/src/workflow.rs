//! Batch jobs behind the CLI subcommands, kept free of argument parsing so
//! tests can call them directly.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use funcprobe_core::annotate::{
    aggregate_all, apply_results, balance_dataset, compute_agreement, AgreementStats, AnnotationItem,
    AnnotationResponse,
};
use funcprobe_core::corpus::{load_corpus, CorpusFormat, DatasetRecord};
use funcprobe_core::evaluate::{
    accuracy, aggregate_overlap, gold_labels, majority_baseline, negation_subsets, overlap_matrix, restart_stats,
    vocab_overlap, vocab_regression, vocabulary, AccuracyRow, NegationSubsets, OverlapMatrix, Pooling,
    PredictionSet, RestartStats, VocabPoint, VocabRegression,
};
use funcprobe_core::mutate::{build_probing_set, GenerateConfig, Lexicons};
use funcprobe_core::task::{Task, TaskFormat};

/// The corpus layout a task reads.
pub fn corpus_format_for(task: Task) -> CorpusFormat {
    match task.format() {
        TaskFormat::AcceptabilitySingle => CorpusFormat::Lines,
        TaskFormat::AcceptabilityPair => CorpusFormat::Paragraphs,
        TaskFormat::Nli => CorpusFormat::NliTabular,
    }
}

/// Build a probing set from a corpus file.
pub fn generate(
    task: Task,
    corpus: &Path,
    format: Option<CorpusFormat>,
    cfg: &GenerateConfig,
    lexicons: &Lexicons,
    seed: u64,
) -> Result<Vec<DatasetRecord>> {
    let corpus = load_corpus(corpus, format.unwrap_or_else(|| corpus_format_for(task)))?;
    let records = build_probing_set(task, &corpus, cfg, lexicons, seed)?;
    Ok(records.iter().map(|r| r.to_dataset_record()).collect())
}

/// The single task of a dataset file.
pub fn dataset_task(records: &[DatasetRecord]) -> Result<Task> {
    let tasks: BTreeSet<Task> = records.iter().map(|r| r.task).collect();
    match tasks.len() {
        0 => bail!("dataset is empty"),
        1 => Ok(*tasks.first().expect("one task")),
        _ => bail!("dataset mixes tasks: {}", tasks.iter().map(|t| t.name()).collect::<Vec<_>>().join(", ")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateOutcome {
    /// Balanced, annotated records.
    pub dataset: Vec<DatasetRecord>,
    pub agreement: AgreementStats,
    /// Share of fully answered items that survived aggregation.
    pub retained_fraction: f64,
    /// Items still short of three responses.
    pub pending: usize,
    /// Retained items dropped because a reviewer rejected them.
    pub rejected: usize,
    pub warnings: Vec<String>,
}

/// Item ids, one per line; blank lines and `#` comments are skipped.
pub fn read_id_list(path: &Path) -> Result<BTreeSet<String>> {
    let raw = fs::read_to_string(path).with_context(|| path.display().to_string())?;
    Ok(raw.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect())
}

/// Majority-vote the responses, drop items a reviewer rejected, balance
/// labels and measure agreement on the final set.
pub fn aggregate(
    records: &[DatasetRecord],
    responses: &[AnnotationResponse],
    rejected: &BTreeSet<String>,
    target: usize,
    seed: u64,
) -> Result<AggregateOutcome> {
    let task = dataset_task(records)?;
    let items: Vec<AnnotationItem> = records.iter().map(AnnotationItem::from).collect();
    if let Some(id) = rejected.iter().find(|id| !items.iter().any(|i| &i.item_id == *id)) {
        bail!("rejected item `{id}` is not in the dataset");
    }
    let agg = aggregate_all(&items, responses)?;
    let (dropped, results): (Vec<_>, Vec<_>) =
        agg.results.iter().cloned().partition(|r| r.is_retained() && rejected.contains(&r.item_id));
    let balanced = balance_dataset(&results, task.format(), target, seed);
    let agreement = compute_agreement(&balanced.kept, responses)?;
    Ok(AggregateOutcome {
        dataset: apply_results(records, &balanced.kept),
        agreement,
        retained_fraction: agg.retained_fraction(),
        pending: agg.pending.len(),
        rejected: dropped.len(),
        warnings: balanced.warnings,
    })
}

/// Prediction files matching a glob, read as `<model>.<task>.jsonl`.
pub fn read_predictions(pattern: &str) -> Result<Vec<PredictionSet>> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .with_context(|| format!("bad glob `{pattern}`"))?
        .collect::<Result<_, _>>()?;
    paths.sort();
    if paths.is_empty() {
        bail!("no prediction files match `{pattern}`");
    }
    paths.iter().map(|p| PredictionSet::read_named(p).map_err(Into::into)).collect()
}

/// Datasets keyed by their task.
pub fn read_datasets(paths: &[PathBuf]) -> Result<BTreeMap<Task, Vec<DatasetRecord>>> {
    let mut out = BTreeMap::new();
    for p in paths {
        let records = funcprobe_core::corpus::read_dataset(p)?;
        let task = dataset_task(&records).with_context(|| p.display().to_string())?;
        if out.insert(task, records).is_some() {
            bail!("two datasets for task {task}");
        }
    }
    Ok(out)
}

fn dataset_for<'a>(datasets: &'a BTreeMap<Task, Vec<DatasetRecord>>, task: Task) -> Result<&'a [DatasetRecord]> {
    datasets.get(&task).map(Vec::as_slice).with_context(|| format!("no dataset given for task {task}"))
}

/// Accuracy and majority baseline of every prediction set.
pub fn accuracy_table(
    datasets: &BTreeMap<Task, Vec<DatasetRecord>>,
    predictions: &[PredictionSet],
) -> Result<Vec<AccuracyRow>> {
    let mut rows = Vec::new();
    for p in predictions {
        let gold = gold_labels(dataset_for(datasets, p.task)?)?;
        rows.push(AccuracyRow {
            model_id: p.model_id.clone(),
            task: p.task,
            accuracy: accuracy(p, &gold).with_context(|| format!("{} on {}", p.model_id, p.task))?,
            majority_baseline: majority_baseline(gold.values())?,
            n: gold.len(),
        });
    }
    rows.sort_by(|a, b| (a.task, &a.model_id).cmp(&(b.task, &b.model_id)));
    Ok(rows)
}

pub fn accuracy_tsv(rows: &[AccuracyRow]) -> String {
    let mut out = String::from("model\ttask\taccuracy\tbaseline\tn\n");
    for r in rows {
        out += &format!("{}\t{}\t{:.4}\t{:.4}\t{}\n", r.model_id, r.task, r.accuracy, r.majority_baseline, r.n);
    }
    out
}

fn by_task(predictions: &[PredictionSet]) -> BTreeMap<Task, Vec<PredictionSet>> {
    let mut out: BTreeMap<Task, Vec<PredictionSet>> = BTreeMap::new();
    for p in predictions {
        out.entry(p.task).or_default().push(p.clone());
    }
    out
}

/// One overlap matrix per task with at least two models, plus the pooled
/// matrix named `all` when more than one task qualifies.
pub fn overlap_matrices(predictions: &[PredictionSet], pooling: Pooling) -> Result<Vec<(String, OverlapMatrix)>> {
    let grouped: Vec<Vec<PredictionSet>> = by_task(predictions).into_values().filter(|v| v.len() >= 2).collect();
    let mut out = Vec::new();
    for sets in &grouped {
        out.push((sets[0].task.name().to_string(), overlap_matrix(sets)?));
    }
    if grouped.len() > 1 {
        out.push(("all".to_string(), aggregate_overlap(&grouped, pooling)?));
    }
    Ok(out)
}

/// Restart statistics, grouping model ids `<model><sep><run>` by `<model>`.
pub fn restart_table(rows: &[AccuracyRow], sep: char) -> Result<Vec<(String, Task, RestartStats)>> {
    let mut groups: BTreeMap<(String, Task), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let base = r.model_id.split_once(sep).map_or(r.model_id.as_str(), |(m, _)| m);
        groups.entry((base.to_string(), r.task)).or_default().push(r.accuracy);
    }
    let mut out = Vec::new();
    for ((model, task), accs) in groups {
        if accs.len() < 2 {
            log::warn!("{model} on {task}: a single run, no restart statistics");
            continue;
        }
        out.push((model, task, restart_stats(&accs)?));
    }
    Ok(out)
}

/// Vocabulary of a pretraining text file, one or more sentences per line.
pub fn pretraining_vocabulary(path: &Path) -> Result<BTreeSet<String>> {
    let raw = fs::read_to_string(path).with_context(|| path.display().to_string())?;
    Ok(vocabulary(raw.lines()))
}

/// Regress accuracy on vocabulary overlap. `pretraining` maps a model id
/// (before any restart suffix) to its pretraining vocabulary.
pub fn vocab_analysis(
    datasets: &BTreeMap<Task, Vec<DatasetRecord>>,
    rows: &[AccuracyRow],
    pretraining: &BTreeMap<String, BTreeSet<String>>,
    sep: char,
) -> Result<VocabRegression> {
    let probing: BTreeMap<Task, BTreeSet<String>> = datasets
        .iter()
        .map(|(t, recs)| (*t, vocabulary(recs.iter().flat_map(|r| r.payload.texts()))))
        .collect();
    let mut points = Vec::new();
    for r in rows {
        let base = r.model_id.split_once(sep).map_or(r.model_id.as_str(), |(m, _)| m);
        let Some(vocab) = pretraining.get(base) else {
            log::warn!("no pretraining vocabulary for {}; skipped", r.model_id);
            continue;
        };
        let probe = probing.get(&r.task).with_context(|| format!("no dataset for {}", r.task))?;
        points.push(VocabPoint {
            model_id: r.model_id.clone(),
            task: r.task,
            overlap: vocab_overlap(vocab, probe)?,
            accuracy: r.accuracy,
        });
    }
    Ok(vocab_regression(&points)?)
}

/// Negation subset scores for every negation prediction set.
pub fn negation_table(
    datasets: &BTreeMap<Task, Vec<DatasetRecord>>,
    predictions: &[PredictionSet],
) -> Result<Vec<(String, NegationSubsets)>> {
    let negation: Vec<&PredictionSet> = predictions.iter().filter(|p| p.task == Task::Negation).collect();
    if negation.is_empty() {
        return Ok(Vec::new());
    }
    let data = dataset_for(datasets, Task::Negation)?;
    negation.into_iter().map(|p| Ok((p.model_id.clone(), negation_subsets(data, p)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: &str, acc: f64) -> AccuracyRow {
        AccuracyRow { model_id: model.into(), task: Task::Wh, accuracy: acc, majority_baseline: 0.5, n: 10 }
    }

    #[test]
    fn restarts_group_by_prefix() {
        let rows = [row("elmo@1", 0.5), row("elmo@2", 0.7), row("cove", 0.6)];
        let t = restart_table(&rows, '@').unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].0, "elmo");
        assert!((t[0].2.mean - 0.6).abs() < 1e-12);
    }

    #[test]
    fn id_lists_skip_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reject.txt");
        fs::write(&path, "# ungrammatical\nneg:3\n\n  neg:9 \n").unwrap();
        let ids = read_id_list(&path).unwrap();
        assert_eq!(ids.into_iter().collect::<Vec<_>>(), ["neg:3", "neg:9"]);
    }

    #[test]
    fn task_formats() {
        assert_eq!(corpus_format_for(Task::Eos), CorpusFormat::Paragraphs);
        assert_eq!(corpus_format_for(Task::Spatial), CorpusFormat::NliTabular);
        assert_eq!(corpus_format_for(Task::Wh), CorpusFormat::Lines);
    }
}
