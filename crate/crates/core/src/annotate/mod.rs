//! Annotation protocol: batching, response values, aggregation into final
//! labels, dataset balancing and agreement statistics.

mod aggregate;
mod agreement;
mod balance;
mod simulate;

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{DatasetRecord, Payload};
use crate::task::{Label, Task, TaskFormat};

pub use aggregate::{
    aggregate_acceptability, aggregate_all, aggregate_nli, apply_results, map_likert, select_responses,
    Aggregation, AggregationResult, DiscardReason, Outcome, RESPONSES_PER_ITEM,
};
pub use agreement::{compute_agreement, AgreementStats};
pub use balance::{balance_dataset, Balanced};
pub use simulate::{simulate_responses, AnnotatorProfile, NoiseModel};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotateError {
    #[error("Likert score {0} is outside 1..=5")]
    LikertOutOfRange(u8),
    #[error("item `{item_id}` needs exactly 3 responses, got {found}")]
    WrongResponseCount { item_id: String, found: usize },
    #[error("item `{item_id}`: response `{value}` does not fit a {format} item")]
    FormatMismatch { item_id: String, value: ResponseValue, format: TaskFormat },
    #[error("item `{item_id}` has {found} responses, agreement needs 3")]
    MissingResponses { item_id: String, found: usize },
    #[error("item `{0}` has no expected label")]
    NoExpectedLabel(String),
    #[error("response for unknown item `{0}`")]
    UnknownItem(String),
    #[error("a nonsense flag carries no label")]
    NonsenseHasNoLabel,
    #[error("invalid annotator profile: {0}")]
    Profile(String),
}

/// One thing to be judged, as shown to annotators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationItem {
    pub item_id: String,
    pub task: Task,
    #[serde(flatten)]
    pub payload: Payload,
    /// Label implied by mutation status; used to filter acceptability
    /// results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_label: Option<Label>,
}

impl From<&DatasetRecord> for AnnotationItem {
    fn from(r: &DatasetRecord) -> Self {
        AnnotationItem { item_id: r.id.clone(), task: r.task, payload: r.payload.clone(), expected_label: r.expected_label }
    }
}

/// A single judgment: one of the three acceptability options, a Likert
/// score, or the "does not make sense" flag.
///
/// Serialized as the strings `natural`, `unnatural`, `neither`,
/// `nonsense`, or as an integer score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResponseValue {
    Natural,
    Unnatural,
    Neither,
    Likert(u8),
    Nonsense,
}

impl ResponseValue {
    pub fn fits(self, format: TaskFormat) -> bool {
        match self {
            ResponseValue::Natural | ResponseValue::Unnatural | ResponseValue::Neither => format.is_acceptability(),
            ResponseValue::Likert(n) => format == TaskFormat::Nli && (1..=5).contains(&n),
            ResponseValue::Nonsense => format == TaskFormat::Nli,
        }
    }

    /// The label category a response stands for; `None` for "neither".
    /// Likert scores are mapped, nonsense is an error.
    pub fn judged_label(self) -> Result<Option<Label>, AnnotateError> {
        match self {
            ResponseValue::Natural => Ok(Some(Label::Natural)),
            ResponseValue::Unnatural => Ok(Some(Label::Unnatural)),
            ResponseValue::Neither => Ok(None),
            ResponseValue::Likert(n) => map_likert(n).map(Some),
            ResponseValue::Nonsense => Err(AnnotateError::NonsenseHasNoLabel),
        }
    }
}

impl fmt::Display for ResponseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResponseValue::Natural => f.write_str("natural"),
            ResponseValue::Unnatural => f.write_str("unnatural"),
            ResponseValue::Neither => f.write_str("neither"),
            ResponseValue::Likert(n) => write!(f, "{n}"),
            ResponseValue::Nonsense => f.write_str("nonsense"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Score(i64),
    Word(String),
}

impl Serialize for ResponseValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ResponseValue::Likert(n) => RawValue::Score(i64::from(*n)),
            other => RawValue::Word(other.to_string()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ResponseValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match RawValue::deserialize(d)? {
            // Out-of-range scores are kept so validation can name the item.
            RawValue::Score(n) => u8::try_from(n)
                .map(ResponseValue::Likert)
                .map_err(|_| D::Error::custom(format!("Likert score {n} out of range"))),
            RawValue::Word(w) => match w.as_str() {
                "natural" => Ok(ResponseValue::Natural),
                "unnatural" => Ok(ResponseValue::Unnatural),
                "neither" => Ok(ResponseValue::Neither),
                "nonsense" => Ok(ResponseValue::Nonsense),
                other => Err(D::Error::custom(format!("unknown response value `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationResponse {
    pub annotator_id: String,
    pub item_id: String,
    pub value: ResponseValue,
    /// Ordering key: milliseconds since the Unix epoch, or a log sequence number.
    pub timestamp: u64,
}

/// Shuffle items and cut them into batches of the format's size; the last
/// batch may be short.
pub fn make_batches<T: Clone>(items: &[T], format: TaskFormat, seed: u64) -> Vec<Vec<T>> {
    let mut shuffled = items.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    shuffled.chunks(format.batch_size()).map(<[T]>::to_vec).collect()
}
