//! Newline-delimited dataset interchange records.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::task::{Label, Task};

/// What an annotator or model sees for one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Nli { premise: String, hypothesis: String },
    Pair { sentences: [String; 2] },
    Single { text: String },
}

impl Payload {
    pub fn texts(&self) -> Vec<&str> {
        match self {
            Payload::Nli { premise, hypothesis } => vec![premise, hypothesis],
            Payload::Pair { sentences } => sentences.iter().map(String::as_str).collect(),
            Payload::Single { text } => vec![text],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Premise,
    Hypothesis,
}

/// One edit: tokens `old` at token index `position` became `new`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedSpan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub position: usize,
    pub old: Vec<String>,
    pub new: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationMeta {
    pub source_id: String,
    pub is_mutated: bool,
    pub kind: String,
    pub seed: u64,
    pub original: Payload,
    pub changed_spans: Vec<ChangedSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationMeta {
    pub final_label: Label,
    pub unanimous: bool,
    pub n_responses: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub task: Task,
    #[serde(flatten)]
    pub payload: Payload,
    pub expected_label: Option<Label>,
    pub mutation: MutationMeta,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<AnnotationMeta>,
}

impl DatasetRecord {
    /// Label for evaluation: the annotated label, else the expected one.
    pub fn gold_label(&self) -> Option<Label> {
        self.annotation.as_ref().map(|a| a.final_label).or(self.expected_label)
    }
}

pub fn write_dataset(path: &Path, records: &[DatasetRecord]) -> Result<(), CorpusError> {
    let io = |e| CorpusError::Io { path: path.to_path_buf(), source: e };
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("dataset records serialize");
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(&out).map_err(io)?;
    f.flush().map_err(io)
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|e| CorpusError::Io { path: path.to_path_buf(), source: e })?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CorpusError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
