//! Report bundle: machine-readable tables plus a plain summary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::{EvalError, NegationSubsets, OverlapMatrix, RestartStats, VocabRegression};
use crate::annotate::AgreementStats;
use crate::task::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub model_id: String,
    pub task: Task,
    pub accuracy: f64,
    pub majority_baseline: f64,
    pub n: usize,
}

/// Everything one run produced. Empty sections are left out of the bundle.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub accuracy: Vec<AccuracyRow>,
    pub agreement: Vec<(Task, AgreementStats)>,
    /// Named overlap matrices, e.g. one per task plus `all`.
    pub overlap: Vec<(String, OverlapMatrix)>,
    pub restarts: Vec<(String, Task, RestartStats)>,
    pub regression: Option<VocabRegression>,
    pub negation: Vec<(String, NegationSubsets)>,
}

/// Heat map of an overlap matrix, `cell` pixels per entry. Darker is
/// higher overlap.
pub fn render_heatmap(m: &OverlapMatrix, cell: u32) -> RgbImage {
    let n = m.model_ids.len() as u32;
    let cell = cell.max(1);
    RgbImage::from_fn(n * cell, n * cell, |x, y| {
        let v = m.values[(y / cell) as usize][(x / cell) as usize].clamp(0.0, 1.0);
        let shade = |lo: f64, hi: f64| (hi + (lo - hi) * v).round() as u8;
        Rgb([shade(8.0, 255.0), shade(48.0, 255.0), shade(107.0, 255.0)])
    })
}

fn pct(v: f64) -> String {
    format!("{:.1}", 100.0 * v)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), EvalError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| EvalError::io(&path, e))
}

fn safe_name(s: &str) -> String {
    s.chars().map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Write the bundle into `dir` (created if missing).
pub fn write_report(dir: &Path, report: &Report) -> Result<(), EvalError> {
    fs::create_dir_all(dir).map_err(|e| EvalError::io(dir, e))?;
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write(dir, "report.json", &json)?;
    let mut summary = String::from("# Probing report\n");

    if !report.accuracy.is_empty() {
        let mut tsv = String::from("model\ttask\taccuracy\tmajority_baseline\tn\n");
        summary.push_str("\n## Accuracy\n\n| model | task | accuracy | baseline | n |\n|---|---|---|---|---|\n");
        for r in &report.accuracy {
            let _ = writeln!(tsv, "{}\t{}\t{:.4}\t{:.4}\t{}", r.model_id, r.task, r.accuracy, r.majority_baseline, r.n);
            let _ = writeln!(
                summary,
                "| {} | {} | {} | {} | {} |",
                r.model_id,
                r.task,
                pct(r.accuracy),
                pct(r.majority_baseline),
                r.n
            );
        }
        write(dir, "accuracy.tsv", &tsv)?;
    }

    if !report.agreement.is_empty() {
        let mut tsv = String::from("task\tagreement\tunanimous\taccuracy\tsize\n");
        summary.push_str("\n## Annotator agreement\n\n");
        for (task, s) in &report.agreement {
            let row = s.format_row();
            let _ = writeln!(tsv, "{task}\t{}", row.replace(' ', "\t"));
            let _ = writeln!(summary, "- {task}: {row}");
        }
        write(dir, "agreement.tsv", &tsv)?;
    }

    if !report.overlap.is_empty() {
        let sub = dir.join("overlap");
        fs::create_dir_all(&sub).map_err(|e| EvalError::io(&sub, e))?;
        summary.push_str("\n## Prediction overlap\n\n");
        for (name, m) in &report.overlap {
            let base = safe_name(name);
            write(&sub, &format!("{base}.tsv"), &m.to_tsv())?;
            let png = sub.join(format!("{base}.png"));
            render_heatmap(m, 24).save(&png).map_err(|e| EvalError::Image(e.to_string()))?;
            let _ = writeln!(summary, "- {name}: overlap/{base}.tsv, overlap/{base}.png");
        }
    }

    if !report.restarts.is_empty() {
        let mut tsv = String::from("model\ttask\tmean\tstd_dev\tn\n");
        summary.push_str("\n## Random restarts\n\n");
        for (model, task, s) in &report.restarts {
            let _ = writeln!(tsv, "{model}\t{task}\t{:.6}\t{:.6}\t{}", s.mean, s.std_dev, s.n);
            let _ = writeln!(summary, "- {model} / {task}: {s}");
        }
        write(dir, "restarts.tsv", &tsv)?;
    }

    if let Some(reg) = &report.regression {
        let mut tsv = format!("{}\n", VocabRegression::HEADER);
        for row in reg.rows() {
            tsv.push_str(&row);
            tsv.push('\n');
        }
        write(dir, "regression.tsv", &tsv)?;
        let o = &reg.overall;
        let _ = writeln!(
            summary,
            "\n## Vocabulary overlap regression\n\nOverall slope {:.4} (p = {:.3}, n = {}). Per-task fits: {}; skipped: {}.",
            o.slope,
            o.p_value,
            o.n,
            reg.per_task.len(),
            reg.skipped.len()
        );
    }

    if !report.negation.is_empty() {
        let mut tsv = String::from("model\tsubset\tcorrect\tcount\taccuracy\n");
        summary.push_str("\n## Negation subsets\n\n");
        for (model, s) in &report.negation {
            for (name, score) in [("all", s.all), ("lexical-only", s.lexical_only), ("explicit-only", s.explicit_only)] {
                let acc = score.accuracy().map_or("-".to_string(), |a| format!("{a:.4}"));
                let _ = writeln!(tsv, "{model}\t{name}\t{}\t{}\t{acc}", score.correct, score.count);
            }
            let show = |s: super::SubsetScore| s.accuracy().map_or("-".to_string(), pct);
            let _ = writeln!(
                summary,
                "- {model}: all {}, lexical-only {}, explicit-only {}",
                show(s.all),
                show(s.lexical_only),
                show(s.explicit_only)
            );
        }
        write(dir, "negation.tsv", &tsv)?;
    }

    write(dir, "summary.md", &summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_shades() {
        let m = OverlapMatrix { model_ids: vec!["a".into(), "b".into()], values: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        let img = render_heatmap(&m, 3);
        assert_eq!(img.dimensions(), (6, 6));
        assert_eq!(*img.get_pixel(0, 0), Rgb([8, 48, 107]));
        assert_eq!(*img.get_pixel(5, 0), Rgb([255, 255, 255]));
    }

    #[test]
    fn bundle_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = OverlapMatrix { model_ids: vec!["a".into()], values: vec![vec![1.0]] };
        let report = Report {
            accuracy: vec![AccuracyRow { model_id: "a".into(), task: Task::Wh, accuracy: 0.75, majority_baseline: 0.5, n: 4 }],
            overlap: vec![("wh".into(), m)],
            ..Report::default()
        };
        write_report(dir.path(), &report).unwrap();
        for f in ["report.json", "accuracy.tsv", "overlap/wh.tsv", "overlap/wh.png", "summary.md"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        assert!(!dir.path().join("restarts.tsv").exists());
        let back: Report = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(back, report);
    }
}
