//! Majority labels from three responses per item.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{AnnotateError, AnnotationItem, AnnotationResponse, ResponseValue};
use crate::corpus::{AnnotationMeta, DatasetRecord};
use crate::task::{Label, TaskFormat};

/// Responses each item needs before it can be aggregated.
pub const RESPONSES_PER_ITEM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscardReason {
    NoMajority,
    NonsenseFlagged,
    LabelMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    FinalLabel(Label),
    DiscardReason(DiscardReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationResult {
    pub item_id: String,
    #[serde(flatten)]
    pub outcome: Outcome,
    /// All three responses identical (after Likert mapping).
    pub unanimous: bool,
    pub responses_used: usize,
}

impl AggregationResult {
    pub fn final_label(&self) -> Option<Label> {
        match self.outcome {
            Outcome::FinalLabel(l) => Some(l),
            Outcome::DiscardReason(_) => None,
        }
    }

    pub fn discard_reason(&self) -> Option<DiscardReason> {
        match self.outcome {
            Outcome::DiscardReason(r) => Some(r),
            Outcome::FinalLabel(_) => None,
        }
    }

    pub fn is_retained(&self) -> bool {
        self.final_label().is_some()
    }
}

/// 5 and 4 are entailment, 3 neutral, 2 and 1 contradiction.
pub fn map_likert(score: u8) -> Result<Label, AnnotateError> {
    match score {
        4 | 5 => Ok(Label::Entailment),
        3 => Ok(Label::Neutral),
        1 | 2 => Ok(Label::Contradiction),
        n => Err(AnnotateError::LikertOutOfRange(n)),
    }
}

/// The value held by at least two of three, and whether all three agree.
fn majority<T: PartialEq + Copy>(xs: [T; 3]) -> (Option<T>, bool) {
    let [a, b, c] = xs;
    let unanimous = a == b && b == c;
    let m = if a == b || a == c {
        Some(a)
    } else if b == c {
        Some(b)
    } else {
        None
    };
    (m, unanimous)
}

fn three(item_id: &str, responses: &[ResponseValue], format: TaskFormat) -> Result<[ResponseValue; 3], AnnotateError> {
    let arr: [ResponseValue; 3] = responses
        .try_into()
        .map_err(|_| AnnotateError::WrongResponseCount { item_id: item_id.into(), found: responses.len() })?;
    if let Some(bad) = arr.iter().find(|v| !v.fits(format)) {
        return Err(AnnotateError::FormatMismatch { item_id: item_id.into(), value: *bad, format });
    }
    Ok(arr)
}

fn result(item_id: &str, outcome: Outcome, unanimous: bool) -> AggregationResult {
    AggregationResult { item_id: item_id.into(), outcome, unanimous, responses_used: RESPONSES_PER_ITEM }
}

/// Majority over {natural, unnatural, neither}. A "neither" majority or a
/// majority that disagrees with `expected` discards the item.
pub fn aggregate_acceptability(
    item_id: &str,
    responses: &[ResponseValue],
    expected: Label,
) -> Result<AggregationResult, AnnotateError> {
    let values = three(item_id, responses, TaskFormat::AcceptabilitySingle)?;
    let (m, unanimous) = majority(values);
    let outcome = match m {
        None => Outcome::DiscardReason(DiscardReason::NoMajority),
        Some(ResponseValue::Natural) if expected == Label::Natural => Outcome::FinalLabel(Label::Natural),
        Some(ResponseValue::Unnatural) if expected == Label::Unnatural => Outcome::FinalLabel(Label::Unnatural),
        Some(_) => Outcome::DiscardReason(DiscardReason::LabelMismatch),
    };
    Ok(result(item_id, outcome, unanimous))
}

/// Any nonsense flag discards the item; otherwise the majority of the
/// mapped Likert labels wins.
pub fn aggregate_nli(item_id: &str, responses: &[ResponseValue]) -> Result<AggregationResult, AnnotateError> {
    let values = three(item_id, responses, TaskFormat::Nli)?;
    if values.contains(&ResponseValue::Nonsense) {
        return Ok(result(item_id, Outcome::DiscardReason(DiscardReason::NonsenseFlagged), false));
    }
    let mut labels = [Label::Neutral; 3];
    for (l, v) in labels.iter_mut().zip(values) {
        let ResponseValue::Likert(n) = v else { unreachable!("validated as NLI values") };
        *l = map_likert(n)?;
    }
    let (m, unanimous) = majority(labels);
    let outcome = m.map_or(Outcome::DiscardReason(DiscardReason::NoMajority), Outcome::FinalLabel);
    Ok(result(item_id, outcome, unanimous))
}

/// The first three responses per item by (timestamp, annotator id);
/// later ones are over-collection and ignored.
pub fn select_responses(responses: &[AnnotationResponse]) -> BTreeMap<String, Vec<AnnotationResponse>> {
    let mut by_item: BTreeMap<String, Vec<AnnotationResponse>> = BTreeMap::new();
    for r in responses {
        by_item.entry(r.item_id.clone()).or_default().push(r.clone());
    }
    for rs in by_item.values_mut() {
        rs.sort_by(|a, b| (a.timestamp, &a.annotator_id).cmp(&(b.timestamp, &b.annotator_id)));
        rs.truncate(RESPONSES_PER_ITEM);
    }
    by_item
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Aggregation {
    /// One result per fully answered item, in item order.
    pub results: Vec<AggregationResult>,
    /// Items with fewer than three responses.
    pub pending: Vec<String>,
}

impl Aggregation {
    pub fn retained_fraction(&self) -> f64 {
        if self.results.is_empty() {
            return 0.0;
        }
        self.results.iter().filter(|r| r.is_retained()).count() as f64 / self.results.len() as f64
    }
}

/// Aggregate every item that has its three responses.
pub fn aggregate_all(items: &[AnnotationItem], responses: &[AnnotationResponse]) -> Result<Aggregation, AnnotateError> {
    let known: HashMap<&str, &AnnotationItem> = items.iter().map(|i| (i.item_id.as_str(), i)).collect();
    if let Some(r) = responses.iter().find(|r| !known.contains_key(r.item_id.as_str())) {
        return Err(AnnotateError::UnknownItem(r.item_id.clone()));
    }
    let selected = select_responses(responses);
    let mut out = Aggregation::default();
    for item in items {
        let values: Vec<ResponseValue> =
            selected.get(&item.item_id).map(|rs| rs.iter().map(|r| r.value).collect()).unwrap_or_default();
        if values.len() < RESPONSES_PER_ITEM {
            out.pending.push(item.item_id.clone());
            continue;
        }
        let result = if item.task.format().is_acceptability() {
            let expected = item.expected_label.ok_or_else(|| AnnotateError::NoExpectedLabel(item.item_id.clone()))?;
            aggregate_acceptability(&item.item_id, &values, expected)?
        } else {
            aggregate_nli(&item.item_id, &values)?
        };
        out.results.push(result);
    }
    Ok(out)
}

/// Dataset records for the retained results, in record order, with their
/// annotation metadata filled in.
pub fn apply_results(records: &[DatasetRecord], kept: &[AggregationResult]) -> Vec<DatasetRecord> {
    let by_id: HashMap<&str, &AggregationResult> = kept.iter().map(|r| (r.item_id.as_str(), r)).collect();
    records
        .iter()
        .filter_map(|rec| {
            let res = by_id.get(rec.id.as_str())?;
            let label = res.final_label()?;
            let mut rec = rec.clone();
            rec.annotation =
                Some(AnnotationMeta { final_label: label, unanimous: res.unanimous, n_responses: res.responses_used });
            Some(rec)
        })
        .collect()
}
