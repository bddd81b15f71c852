//! Inter-annotator agreement over a final dataset.

use serde::{Deserialize, Serialize};

use super::{select_responses, AggregationResult, AnnotateError, AnnotationResponse, RESPONSES_PER_ITEM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    /// Mean over items of the fraction of the three response pairs that agree.
    pub pairwise_agreement: f64,
    pub unanimous_fraction: f64,
    /// Fraction of all responses equal to their item's final label.
    pub individual_accuracy: f64,
    pub dataset_size: usize,
}

impl AgreementStats {
    /// Percentages to one decimal, then the item count:
    /// `pairwise unanimous accuracy size`.
    pub fn format_row(&self) -> String {
        format!(
            "{:.1} {:.1} {:.1} {}",
            100.0 * self.pairwise_agreement,
            100.0 * self.unanimous_fraction,
            100.0 * self.individual_accuracy,
            self.dataset_size
        )
    }
}

/// Agreement over the retained items of `dataset`, using the same first
/// three responses per item that aggregation used.
pub fn compute_agreement(
    dataset: &[AggregationResult],
    responses: &[AnnotationResponse],
) -> Result<AgreementStats, AnnotateError> {
    let selected = select_responses(responses);
    let (mut pairs, mut unanimous, mut correct, mut n) = (0usize, 0usize, 0usize, 0usize);
    for item in dataset.iter().filter(|r| r.is_retained()) {
        let rs = selected.get(&item.item_id).map(Vec::as_slice).unwrap_or_default();
        if rs.len() < RESPONSES_PER_ITEM {
            return Err(AnnotateError::MissingResponses { item_id: item.item_id.clone(), found: rs.len() });
        }
        let labels = rs.iter().map(|r| r.value.judged_label()).collect::<Result<Vec<_>, _>>()?;
        let agreeing = [(0, 1), (0, 2), (1, 2)].iter().filter(|&&(i, j)| labels[i] == labels[j]).count();
        pairs += agreeing;
        unanimous += usize::from(agreeing == 3);
        correct += labels.iter().filter(|&&l| l == item.final_label()).count();
        n += 1;
    }
    if n == 0 {
        return Ok(AgreementStats { pairwise_agreement: 0.0, unanimous_fraction: 0.0, individual_accuracy: 0.0, dataset_size: 0 });
    }
    Ok(AgreementStats {
        pairwise_agreement: pairs as f64 / (3 * n) as f64,
        unanimous_fraction: unanimous as f64 / n as f64,
        individual_accuracy: correct as f64 / (RESPONSES_PER_ITEM * n) as f64,
        dataset_size: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{aggregate_nli, ResponseValue};

    fn responses(item: &str, values: &[ResponseValue]) -> Vec<AnnotationResponse> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| AnnotationResponse {
                annotator_id: format!("a{i}"),
                item_id: item.into(),
                value: *v,
                timestamp: i as u64,
            })
            .collect()
    }

    #[test]
    fn two_of_three() {
        let vals = [ResponseValue::Likert(5), ResponseValue::Likert(4), ResponseValue::Likert(1)];
        let res = aggregate_nli("x", &vals).unwrap();
        let s = compute_agreement(&[res], &responses("x", &vals)).unwrap();
        assert!((s.pairwise_agreement - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.unanimous_fraction, 0.0);
        assert!((s.individual_accuracy - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn missing_responses() {
        let vals = [ResponseValue::Likert(5); 3];
        let res = aggregate_nli("x", &vals).unwrap();
        assert!(matches!(
            compute_agreement(&[res], &responses("x", &vals[..2])),
            Err(AnnotateError::MissingResponses { found: 2, .. })
        ));
    }

    #[test]
    fn row_format() {
        let s = AgreementStats { pairwise_agreement: 0.6018, unanimous_fraction: 0.4027, individual_accuracy: 0.8009, dataset_size: 591 };
        assert_eq!(s.format_row(), "60.2 40.3 80.1 591");
    }
}
