//! `funcprobe` command line.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use funcprobe_core::annotate::{simulate_responses, AnnotationItem, AnnotatorProfile, NoiseModel};
use funcprobe_core::corpus::{load_corpus, read_dataset, write_dataset, Corpus, CorpusFormat};
use funcprobe_core::evaluate::{write_report, Pooling, Report, VocabRegression};
use funcprobe_core::model::{run_probing, ProbeMode};
use funcprobe_core::mutate::Lexicons;
use funcprobe_core::task::Task;

use crate::api::{self, AppState};
use crate::config::Config;
use crate::store::{read_responses, write_responses};
use crate::workflow;

#[derive(Debug, Parser)]
#[command(name = "funcprobe", version, about = "Function-word probing sets: generate, annotate, probe, evaluate")]
pub struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a probing set from a corpus.
    Generate(GenerateArgs),
    /// Run the annotation service.
    Serve(ServeArgs),
    /// Produce synthetic annotator responses for a dataset.
    Simulate(SimulateArgs),
    /// Aggregate responses into a balanced, labeled dataset.
    Aggregate(AggregateArgs),
    /// Agreement statistics of a final dataset.
    Agreement(AgreementArgs),
    /// Train and run the reference probing classifier.
    Probe(ProbeArgs),
    /// Per-task accuracy and majority baselines.
    Evaluate(EvaluateArgs),
    /// Secondary analyses.
    #[command(subcommand)]
    Analyze(Analysis),
    /// Write the full report bundle.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub task: Task,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Corpus layout; defaults to the one the task reads.
    #[arg(long)]
    pub corpus_format: Option<CorpusFormat>,
    #[arg(long)]
    pub target_size: Option<usize>,
    /// Directory of lexicon files replacing the bundled lists.
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bind: Option<std::net::SocketAddr>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Dataset whose items are annotated.
    #[arg(long)]
    pub items: PathBuf,
    /// Shared accuracy for all annotators; overrides the config profile.
    #[arg(long)]
    pub accuracy: Option<f64>,
    #[arg(long)]
    pub annotators: Option<usize>,
    /// Where wrong answers go.
    #[arg(long)]
    pub noise: Option<Noise>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Noise {
    Opposite,
    Uniform,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Unnatural items to keep (acceptability tasks).
    #[arg(long)]
    pub target: Option<usize>,
    /// Item ids a reviewer rejected after annotation, one per line.
    #[arg(long)]
    pub reject: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub responses: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Acceptability,
    Nli,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub task: Task,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Labeled NLI training file (tab-separated), required in NLI mode.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long, default_value = "hashed-mlp")]
    pub model_id: String,
    /// Predictions file; name it `<model>.<task>.jsonl` for `evaluate`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalInputs {
    /// One final dataset per task.
    #[arg(long = "dataset", required = true)]
    pub datasets: Vec<PathBuf>,
    /// Glob of `<model>.<task>.jsonl` prediction files.
    #[arg(long)]
    pub predictions: String,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub inputs: EvalInputs,
    /// Also write the accuracy table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Analysis {
    /// Pairwise prediction overlap between models.
    Overlap(OverlapArgs),
    /// Mean and spread across restarts (`<model>@<run>` model ids).
    Restarts(RestartArgs),
    /// Regress accuracy on vocabulary overlap with pretraining data.
    Vocab(VocabArgs),
    /// Negation accuracy by lexical/explicit pattern subset.
    NegationSubsets(EvalInputs),
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    /// Glob of `<model>.<task>.jsonl` prediction files.
    #[arg(long)]
    pub predictions: String,
    #[arg(long)]
    pub pooling: Option<PoolingArg>,
    /// Directory for TSV and PNG output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PoolingArg {
    Micro,
    Macro,
}

impl From<PoolingArg> for Pooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::Micro => Pooling::Micro,
            PoolingArg::Macro => Pooling::Macro,
        }
    }
}

#[derive(Debug, Args)]
pub struct RestartArgs {
    #[command(flatten)]
    pub inputs: EvalInputs,
    #[arg(long, default_value_t = '@')]
    pub separator: char,
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    #[command(flatten)]
    pub inputs: EvalInputs,
    /// `<model>=<text file>` pairs naming each model's pretraining data.
    #[arg(long = "pretraining", required = true, value_parser = parse_pair)]
    pub pretraining: Vec<(String, PathBuf)>,
    #[arg(long, default_value_t = '@')]
    pub separator: char,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub inputs: EvalInputs,
    /// `<dataset>=<responses>` pairs for agreement statistics.
    #[arg(long = "annotations", value_parser = parse_pair)]
    pub annotations: Vec<(String, PathBuf)>,
    /// `<model>=<text file>` pairs; adds the vocabulary regression.
    #[arg(long = "pretraining", value_parser = parse_pair)]
    pub pretraining: Vec<(String, PathBuf)>,
    #[arg(long, default_value_t = '@')]
    pub separator: char,
    #[arg(long)]
    pub pooling: Option<PoolingArg>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_pair(s: &str) -> Result<(String, PathBuf), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=PATH, got `{s}`"))?;
    Ok((k.to_string(), PathBuf::from(v)))
}

/// Run a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::load_or_default(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.command {
        Command::Generate(a) => generate(&cfg, a),
        Command::Serve(a) => serve(&cfg, a),
        Command::Simulate(a) => simulate(&cfg, a),
        Command::Aggregate(a) => aggregate(&cfg, a),
        Command::Agreement(a) => agreement(a),
        Command::Probe(a) => probe(&cfg, a),
        Command::Evaluate(a) => evaluate(a),
        Command::Analyze(a) => analyze(&cfg, a),
        Command::Report(a) => report(&cfg, a),
    }
}

fn generate(cfg: &Config, a: GenerateArgs) -> Result<()> {
    let mut gen = cfg.generate.clone();
    gen.target_size = a.target_size.unwrap_or(gen.target_size);
    gen.threads = a.threads.or(gen.threads);
    let lex = match &a.lexicons {
        Some(dir) => Lexicons::load_dir(dir)?,
        None => Lexicons::bundled(),
    };
    let records = workflow::generate(a.task, &a.corpus, a.corpus_format, &gen, &lex, cfg.seed)?;
    write_dataset(&a.out, &records)?;
    let mutated = records.iter().filter(|r| r.mutation.is_mutated).count();
    println!("{}: wrote {} records ({mutated} mutated) to {}", a.task, records.len(), a.out.display());
    Ok(())
}

fn serve(cfg: &Config, a: ServeArgs) -> Result<()> {
    let bind = a.bind.unwrap_or(cfg.service.bind);
    let data_dir = a.data_dir.unwrap_or_else(|| cfg.service.data_dir.clone());
    let static_dir = a.static_dir.or_else(|| cfg.service.static_dir.clone());
    let state = Arc::new(AppState::with_defaults(data_dir, cfg.annotation.clone())?);
    let rt = tokio::runtime::Runtime::new().context("starting the async runtime")?;
    rt.block_on(api::serve(state, bind, static_dir.as_deref()))?;
    Ok(())
}

fn simulate(cfg: &Config, a: SimulateArgs) -> Result<()> {
    let records = read_dataset(&a.items)?;
    let items: Vec<AnnotationItem> = records.iter().map(AnnotationItem::from).collect();
    let mut profile = cfg.simulate.clone();
    if a.accuracy.is_some() || a.annotators.is_some() {
        let n = a.annotators.unwrap_or(profile.accuracies.len());
        let acc = a.accuracy.unwrap_or_else(|| profile.accuracies.first().copied().unwrap_or(0.8));
        profile = AnnotatorProfile { accuracies: vec![acc; n], ..profile };
    }
    if let Some(n) = a.noise {
        profile.noise = match n {
            Noise::Opposite => NoiseModel::Opposite,
            Noise::Uniform => NoiseModel::Uniform,
        };
    }
    let responses = simulate_responses(&items, &profile, cfg.seed)?;
    write_responses(&a.out, &responses)?;
    println!("wrote {} responses for {} items to {}", responses.len(), items.len(), a.out.display());
    Ok(())
}

fn aggregate(cfg: &Config, a: AggregateArgs) -> Result<()> {
    let records = read_dataset(&a.items)?;
    let responses = read_responses(&a.responses)?;
    let target = a.target.unwrap_or(cfg.annotation.balance_target);
    let rejected = match &a.reject {
        Some(path) => workflow::read_id_list(path)?,
        None => Default::default(),
    };
    let out = workflow::aggregate(&records, &responses, &rejected, target, cfg.seed)?;
    for w in &out.warnings {
        log::warn!("{w}");
    }
    if out.pending > 0 {
        log::warn!("{} items have fewer than three responses and were left out", out.pending);
    }
    if out.rejected > 0 {
        log::info!("{} items removed on review", out.rejected);
    }
    write_dataset(&a.out, &out.dataset)?;
    println!("retained {:.1}% of answered items; wrote {} to {}", 100.0 * out.retained_fraction, out.dataset.len(), a.out.display());
    println!("agreement\tunanimous\taccuracy\tsize");
    println!("{}", out.agreement.format_row());
    Ok(())
}

fn agreement(a: AgreementArgs) -> Result<()> {
    let records = read_dataset(&a.dataset)?;
    let responses = read_responses(&a.responses)?;
    let stats = agreement_of(&records, &responses)?;
    println!("agreement\tunanimous\taccuracy\tsize");
    println!("{}", stats.format_row());
    Ok(())
}

/// Agreement over an already aggregated dataset: its records are exactly
/// the retained items. Responses to items balancing dropped are ignored.
fn agreement_of(
    records: &[funcprobe_core::corpus::DatasetRecord],
    responses: &[funcprobe_core::annotate::AnnotationResponse],
) -> Result<funcprobe_core::annotate::AgreementStats> {
    let items: Vec<AnnotationItem> = records.iter().map(AnnotationItem::from).collect();
    let ids: std::collections::HashSet<&str> = items.iter().map(|i| i.item_id.as_str()).collect();
    let responses: Vec<_> = responses.iter().filter(|r| ids.contains(r.item_id.as_str())).cloned().collect();
    let agg = funcprobe_core::annotate::aggregate_all(&items, &responses)?;
    let kept: Vec<_> = agg.results.into_iter().filter(|r| r.is_retained()).collect();
    if kept.len() < records.len() {
        bail!("{} dataset items are not retained by their responses", records.len() - kept.len());
    }
    Ok(funcprobe_core::annotate::compute_agreement(&kept, &responses)?)
}

fn probe(cfg: &Config, a: ProbeArgs) -> Result<()> {
    let records = read_dataset(&a.dataset)?;
    let train;
    let mode = match a.mode {
        Mode::Acceptability => ProbeMode::Acceptability,
        Mode::Nli => {
            let path = a.train.as_deref().context("NLI mode needs --train")?;
            train = match load_corpus(path, CorpusFormat::NliTabular)? {
                Corpus::Nli(r) => r,
                _ => unreachable!("NLI format yields NLI records"),
            };
            ProbeMode::Nli { train: &train }
        }
    };
    let mut pc = cfg.probe.clone();
    if cfg.probe.train.seed == 0 {
        pc.train.seed = cfg.seed;
    }
    let out = run_probing(a.task, &records, mode, &pc, &a.model_id)?;
    out.predictions.write(&a.out)?;
    if let Some(cv) = &out.cv {
        println!("{}: {}-fold accuracy {:.4}", a.task, cv.fold_accuracies.len(), cv.mean_accuracy);
    }
    if let Some(best) = &out.nli_best {
        println!("{}: NLI dev accuracy {:.4} at epoch {}", a.task, best.dev_accuracy, best.epoch);
    }
    println!("wrote {} predictions to {}", out.predictions.len(), a.out.display());
    Ok(())
}

struct Loaded {
    datasets: BTreeMap<Task, Vec<funcprobe_core::corpus::DatasetRecord>>,
    predictions: Vec<funcprobe_core::evaluate::PredictionSet>,
}

fn load(inputs: &EvalInputs) -> Result<Loaded> {
    Ok(Loaded { datasets: workflow::read_datasets(&inputs.datasets)?, predictions: workflow::read_predictions(&inputs.predictions)? })
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let l = load(&a.inputs)?;
    let table = workflow::accuracy_tsv(&workflow::accuracy_table(&l.datasets, &l.predictions)?);
    print!("{table}");
    if let Some(out) = a.out {
        fs::write(&out, table).with_context(|| out.display().to_string())?;
    }
    Ok(())
}

fn pretraining(pairs: &[(String, PathBuf)]) -> Result<BTreeMap<String, std::collections::BTreeSet<String>>> {
    pairs.iter().map(|(m, p)| Ok((m.clone(), workflow::pretraining_vocabulary(p)?))).collect()
}

fn print_regression(r: &VocabRegression) {
    println!("{}", VocabRegression::HEADER);
    for row in r.rows() {
        println!("{row}");
    }
    for (task, why) in &r.skipped {
        println!("# {task} skipped: {why}");
    }
}

fn analyze(cfg: &Config, a: Analysis) -> Result<()> {
    match a {
        Analysis::Overlap(o) => {
            let preds = workflow::read_predictions(&o.predictions)?;
            let pooling = o.pooling.map_or(cfg.evaluate.pooling, Into::into);
            let matrices = workflow::overlap_matrices(&preds, pooling)?;
            if matrices.is_empty() {
                bail!("overlap needs at least two models on one task");
            }
            for (name, m) in &matrices {
                println!("# {name}\n{}", m.to_tsv());
            }
            if let Some(dir) = o.out {
                write_report(&dir, &Report { overlap: matrices, ..Report::default() })?;
            }
        }
        Analysis::Restarts(r) => {
            let l = load(&r.inputs)?;
            let rows = workflow::accuracy_table(&l.datasets, &l.predictions)?;
            println!("model\ttask\tmean (±sd)\truns");
            for (model, task, s) in workflow::restart_table(&rows, r.separator)? {
                println!("{model}\t{task}\t{s}\t{}", s.n);
            }
        }
        Analysis::Vocab(v) => {
            let l = load(&v.inputs)?;
            let rows = workflow::accuracy_table(&l.datasets, &l.predictions)?;
            let reg = workflow::vocab_analysis(&l.datasets, &rows, &pretraining(&v.pretraining)?, v.separator)?;
            print_regression(&reg);
        }
        Analysis::NegationSubsets(inputs) => {
            let l = load(&inputs)?;
            println!("model\tall\tlexical_only\texplicit_only");
            let fmt = |s: funcprobe_core::evaluate::SubsetScore| {
                s.accuracy().map_or_else(|| "n/a".to_string(), |v| format!("{:.4} ({})", v, s.count))
            };
            for (model, s) in workflow::negation_table(&l.datasets, &l.predictions)? {
                println!("{model}\t{}\t{}\t{}", fmt(s.all), fmt(s.lexical_only), fmt(s.explicit_only));
            }
        }
    }
    Ok(())
}

fn report(cfg: &Config, a: ReportArgs) -> Result<()> {
    let l = load(&a.inputs)?;
    let accuracy = workflow::accuracy_table(&l.datasets, &l.predictions)?;
    let mut agreement = Vec::new();
    for (dataset, responses) in &a.annotations {
        let records = read_dataset(Path::new(dataset))?;
        let task = workflow::dataset_task(&records)?;
        agreement.push((task, agreement_of(&records, &read_responses(responses)?)?));
    }
    let pooling = a.pooling.map_or(cfg.evaluate.pooling, Into::into);
    let regression = if a.pretraining.is_empty() {
        None
    } else {
        Some(workflow::vocab_analysis(&l.datasets, &accuracy, &pretraining(&a.pretraining)?, a.separator)?)
    };
    let report = Report {
        overlap: workflow::overlap_matrices(&l.predictions, pooling)?,
        restarts: workflow::restart_table(&accuracy, a.separator)?,
        negation: workflow::negation_table(&l.datasets, &l.predictions)?,
        accuracy,
        agreement,
        regression,
    };
    write_report(&a.out, &report)?;
    println!("wrote report to {}", a.out.display());
    Ok(())
}
