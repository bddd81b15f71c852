//! Source corpora: sentence lists, paragraphs and NLI triples.

mod dataset;
mod tokenize;

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::task::Label;

pub use dataset::{read_dataset, write_dataset, AnnotationMeta, ChangedSpan, DatasetRecord, MutationMeta, Payload, Side};
pub use tokenize::{detokenize, tokenize, TokenizedSentence, DEFAULT_MAX_TOKENS};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("empty input")]
    EmptyInput,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}:{line}: duplicate id `{id}`")]
    DuplicateId { path: PathBuf, line: usize, id: String },
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io { path: path.to_path_buf(), source }
    }

    fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        CorpusError::Parse { path: path.to_path_buf(), line, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    SentenceCorpus,
    ParagraphCorpus,
    NliCorpus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub text: String,
    pub source: SourceKind,
}

impl Sentence {
    pub fn new(id: impl Into<String>, text: &str, source: SourceKind) -> Result<Self, CorpusError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(CorpusError::EmptyInput);
        }
        Ok(Sentence { id: id.into(), text: text.to_string(), source })
    }

    pub fn tokenize(&self) -> TokenizedSentence {
        // Non-empty by construction.
        TokenizedSentence::new(self.id.clone(), &self.text).expect("sentence text is non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NliGold {
    Entailment,
    Neutral,
    Contradiction,
}

impl NliGold {
    pub fn label(self) -> Label {
        match self {
            NliGold::Entailment => Label::Entailment,
            NliGold::Neutral => Label::Neutral,
            NliGold::Contradiction => Label::Contradiction,
        }
    }

    pub fn from_label(label: Label) -> Option<Self> {
        match label {
            Label::Entailment => Some(NliGold::Entailment),
            Label::Neutral => Some(NliGold::Neutral),
            Label::Contradiction => Some(NliGold::Contradiction),
            _ => None,
        }
    }
}

impl fmt::Display for NliGold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.label().fmt(f)
    }
}

impl FromStr for NliGold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<Label>()
            .ok()
            .and_then(NliGold::from_label)
            .ok_or_else(|| format!("unknown NLI label `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NliRecord {
    pub id: String,
    pub premise: Sentence,
    pub hypothesis: Sentence,
    pub gold_label: Option<NliGold>,
    pub genre: Option<String>,
}

impl NliRecord {
    pub fn new(id: &str, premise: &str, hypothesis: &str) -> Result<Self, CorpusError> {
        Ok(NliRecord {
            id: id.to_string(),
            premise: Sentence::new(format!("{id}:p"), premise, SourceKind::NliCorpus)?,
            hypothesis: Sentence::new(format!("{id}:h"), hypothesis, SourceKind::NliCorpus)?,
            gold_label: None,
            genre: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    Lines,
    Paragraphs,
    NliTabular,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lines" => Ok(CorpusFormat::Lines),
            "paragraphs" => Ok(CorpusFormat::Paragraphs),
            "nli-tabular" | "nli" => Ok(CorpusFormat::NliTabular),
            _ => Err(format!("unknown corpus format `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Corpus {
    Sentences(Vec<Sentence>),
    Paragraphs(Vec<Paragraph>),
    Nli(Vec<NliRecord>),
}

/// Order-preserving content of a corpus with file-derived ids removed.
#[derive(Debug, PartialEq, Eq)]
pub enum CorpusShape {
    Sentences(Vec<String>),
    Paragraphs(Vec<Vec<String>>),
    Nli(Vec<(String, String, String, Option<NliGold>, Option<String>)>),
}

impl Corpus {
    pub fn format(&self) -> CorpusFormat {
        match self {
            Corpus::Sentences(_) => CorpusFormat::Lines,
            Corpus::Paragraphs(_) => CorpusFormat::Paragraphs,
            Corpus::Nli(_) => CorpusFormat::NliTabular,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Corpus::Sentences(v) => v.len(),
            Corpus::Paragraphs(v) => v.len(),
            Corpus::Nli(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Line-derived ids depend on the file name, so round trips compare shape.
    pub fn shape(&self) -> CorpusShape {
        match self {
            Corpus::Sentences(v) => CorpusShape::Sentences(v.iter().map(|s| s.text.clone()).collect()),
            Corpus::Paragraphs(v) => CorpusShape::Paragraphs(
                v.iter().map(|p| p.sentences.iter().map(|s| s.text.clone()).collect()).collect(),
            ),
            Corpus::Nli(v) => CorpusShape::Nli(
                v.iter()
                    .map(|r| {
                        (
                            r.id.clone(),
                            r.premise.text.clone(),
                            r.hypothesis.text.clone(),
                            r.gold_label,
                            r.genre.clone(),
                        )
                    })
                    .collect(),
            ),
        }
    }
}

pub const NLI_HEADER: [&str; 5] = ["id", "premise", "hypothesis", "label", "genre"];

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "corpus".into())
}

/// Load a corpus file. Ids are `<file stem>:<line number>` except for NLI
/// rows, which carry their own id column.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_corpus(path, &raw, format)
}

pub fn parse_corpus(path: &Path, raw: &str, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let stem = stem(path);
    match format {
        CorpusFormat::Lines => {
            let mut out = Vec::new();
            for (i, line) in raw.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let id = format!("{stem}:{}", i + 1);
                out.push(Sentence::new(id, line, SourceKind::SentenceCorpus)?);
            }
            Ok(Corpus::Sentences(out))
        }
        CorpusFormat::Paragraphs => {
            let mut out = Vec::new();
            let mut current: Option<Paragraph> = None;
            for (i, line) in raw.lines().enumerate() {
                if line.trim().is_empty() {
                    out.extend(current.take());
                    continue;
                }
                let id = format!("{stem}:{}", i + 1);
                let sentence = Sentence::new(id.clone(), line, SourceKind::ParagraphCorpus)?;
                current
                    .get_or_insert_with(|| Paragraph { id, sentences: Vec::new() })
                    .sentences
                    .push(sentence);
            }
            out.extend(current);
            Ok(Corpus::Paragraphs(out))
        }
        CorpusFormat::NliTabular => parse_nli(path, raw).map(Corpus::Nli),
    }
}

fn parse_nli(path: &Path, raw: &str) -> Result<Vec<NliRecord>, CorpusError> {
    let mut lines = raw.lines().enumerate();
    let header_ok = lines
        .next()
        .map(|(_, h)| h.trim_end_matches('\r').split('\t').map(str::trim).eq(NLI_HEADER))
        .unwrap_or(false);
    if !header_ok {
        return Err(CorpusError::parse(path, 1, format!("expected header `{}`", NLI_HEADER.join("\\t"))));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != NLI_HEADER.len() {
            return Err(CorpusError::parse(
                path,
                line_no,
                format!("expected {} tab-separated columns, found {}", NLI_HEADER.len(), cols.len()),
            ));
        }
        let id = match cols[0].trim() {
            "" => format!("{}:{line_no}", stem(path)),
            id => id.to_string(),
        };
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { path: path.to_path_buf(), line: line_no, id });
        }
        let mut record = NliRecord::new(&id, cols[1], cols[2])
            .map_err(|_| CorpusError::parse(path, line_no, "empty premise or hypothesis"))?;
        record.gold_label = match cols[3].trim() {
            "" | "-" => None,
            l => Some(l.parse().map_err(|e: String| CorpusError::parse(path, line_no, e))?),
        };
        record.genre = Some(cols[4].trim()).filter(|g| !g.is_empty()).map(str::to_string);
        out.push(record);
    }
    Ok(out)
}

/// Serialize a corpus in its own input format.
pub fn render_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    match corpus {
        Corpus::Sentences(v) => {
            for s in v {
                out.push_str(&s.text);
                out.push('\n');
            }
        }
        Corpus::Paragraphs(v) => {
            for (i, p) in v.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                for s in &p.sentences {
                    out.push_str(&s.text);
                    out.push('\n');
                }
            }
        }
        Corpus::Nli(v) => {
            out.push_str(&NLI_HEADER.join("\t"));
            out.push('\n');
            for r in v {
                let label = r.gold_label.map(|l| l.to_string()).unwrap_or_default();
                let genre = r.genre.clone().unwrap_or_default();
                out.push_str(&[r.id.as_str(), &r.premise.text, &r.hypothesis.text, &label, &genre].join("\t"));
                out.push('\n');
            }
        }
    }
    out
}

pub fn save_corpus(path: &Path, corpus: &Corpus) -> Result<(), CorpusError> {
    fs::write(path, render_corpus(corpus)).map_err(|e| CorpusError::io(path, e))
}
