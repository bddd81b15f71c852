//! The nine probing tasks, their formats and label sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Wh,
    Definiteness,
    Coordination,
    Eos,
    Preposition,
    Comparative,
    Quantification,
    Spatial,
    Negation,
}

/// How items of a task are presented and labeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskFormat {
    /// One sentence, natural/unnatural.
    AcceptabilitySingle,
    /// Two sentences (EOS), natural/unnatural.
    AcceptabilityPair,
    /// Premise/hypothesis, entailment/neutral/contradiction.
    Nli,
}

impl TaskFormat {
    /// Items shown to one annotator at a time.
    pub fn batch_size(self) -> usize {
        match self {
            TaskFormat::AcceptabilitySingle => 5,
            TaskFormat::AcceptabilityPair => 3,
            TaskFormat::Nli => 6,
        }
    }

    pub fn is_acceptability(self) -> bool {
        !matches!(self, TaskFormat::Nli)
    }

    pub fn labels(self) -> &'static [Label] {
        if self.is_acceptability() {
            &[Label::Natural, Label::Unnatural]
        } else {
            &[Label::Entailment, Label::Neutral, Label::Contradiction]
        }
    }
}

impl fmt::Display for TaskFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskFormat::AcceptabilitySingle => "acceptability-single",
            TaskFormat::AcceptabilityPair => "acceptability-pair",
            TaskFormat::Nli => "nli",
        })
    }
}

impl Task {
    pub const ALL: [Task; 9] = [
        Task::Wh,
        Task::Definiteness,
        Task::Coordination,
        Task::Eos,
        Task::Preposition,
        Task::Comparative,
        Task::Quantification,
        Task::Spatial,
        Task::Negation,
    ];

    pub fn format(self) -> TaskFormat {
        match self {
            Task::Wh | Task::Definiteness | Task::Coordination => TaskFormat::AcceptabilitySingle,
            Task::Eos => TaskFormat::AcceptabilityPair,
            _ => TaskFormat::Nli,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Wh => "wh",
            Task::Definiteness => "definiteness",
            Task::Coordination => "coordination",
            Task::Eos => "eos",
            Task::Preposition => "preposition",
            Task::Comparative => "comparative",
            Task::Quantification => "quantification",
            Task::Spatial => "spatial",
            Task::Negation => "negation",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown task `{0}`")]
pub struct UnknownTask(pub String);

impl FromStr for Task {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Task::ALL
            .into_iter()
            .find(|t| t.name() == lower)
            .ok_or_else(|| UnknownTask(s.to_string()))
    }
}

/// Final or expected label of a probing item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Natural,
    Unnatural,
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Natural => "natural",
            Label::Unnatural => "unnatural",
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "natural" => Ok(Label::Natural),
            "unnatural" => Ok(Label::Unnatural),
            "entailment" => Ok(Label::Entailment),
            "neutral" => Ok(Label::Neutral),
            "contradiction" => Ok(Label::Contradiction),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}
