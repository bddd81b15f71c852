//! Equal label counts for acceptability sets.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AggregationResult;
use crate::task::{Label, TaskFormat};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Balanced {
    /// Selected results, in input order.
    pub kept: Vec<AggregationResult>,
    pub warnings: Vec<String>,
}

/// Pick `n` of `pool`, unanimous items first, filling the rest by a seeded
/// draw.
fn prioritized<'a>(pool: &[&'a AggregationResult], n: usize, rng: &mut ChaCha8Rng) -> Vec<&'a AggregationResult> {
    let (mut unanimous, mut split): (Vec<_>, Vec<_>) = pool.iter().copied().partition(|r| r.unanimous);
    unanimous.shuffle(rng);
    split.shuffle(rng);
    unanimous.into_iter().chain(split).take(n).collect()
}

/// Keep unnatural items up to `target`, then the same number of natural
/// ones, preferring unanimous agreement. NLI results pass through.
///
/// Shortfalls shrink both sides equally and are reported as warnings.
pub fn balance_dataset(results: &[AggregationResult], format: TaskFormat, target: usize, seed: u64) -> Balanced {
    let retained: Vec<&AggregationResult> = results.iter().filter(|r| r.is_retained()).collect();
    if !format.is_acceptability() {
        return Balanced { kept: retained.into_iter().cloned().collect(), warnings: Vec::new() };
    }
    let of = |l: Label| retained.iter().copied().filter(move |r| r.final_label() == Some(l)).collect::<Vec<_>>();
    let unnatural = of(Label::Unnatural);
    let natural = of(Label::Natural);
    let mut warnings = Vec::new();
    let n = target.min(unnatural.len()).min(natural.len());
    if n < target {
        warnings.push(format!(
            "balanced set has {n} per label, short of the target {target} ({} unnatural, {} natural retained)",
            unnatural.len(),
            natural.len()
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: HashSet<&str> = prioritized(&unnatural, n, &mut rng)
        .into_iter()
        .chain(prioritized(&natural, n, &mut rng))
        .map(|r| r.item_id.as_str())
        .collect();
    let kept = results.iter().filter(|r| chosen.contains(r.item_id.as_str())).cloned().collect();
    Balanced { kept, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{DiscardReason, Outcome};

    fn res(id: usize, label: Label, unanimous: bool) -> AggregationResult {
        AggregationResult { item_id: format!("i{id}"), outcome: Outcome::FinalLabel(label), unanimous, responses_used: 3 }
    }

    fn count(b: &Balanced, l: Label) -> usize {
        b.kept.iter().filter(|r| r.final_label() == Some(l)).count()
    }

    #[test]
    fn unanimous_naturals_first() {
        let mut rs: Vec<AggregationResult> = (0..250).map(|i| res(i, Label::Unnatural, i % 2 == 0)).collect();
        rs.extend((250..650).map(|i| res(i, Label::Natural, i < 550)));
        let b = balance_dataset(&rs, TaskFormat::AcceptabilitySingle, 250, 4);
        assert_eq!(count(&b, Label::Unnatural), 250);
        assert_eq!(count(&b, Label::Natural), 250);
        assert!(b.kept.iter().filter(|r| r.final_label() == Some(Label::Natural)).all(|r| r.unanimous));
        assert!(b.warnings.is_empty());
        assert_eq!(b, balance_dataset(&rs, TaskFormat::AcceptabilitySingle, 250, 4));
    }

    #[test]
    fn limited_by_naturals() {
        let mut rs: Vec<AggregationResult> = (0..10).map(|i| res(i, Label::Unnatural, true)).collect();
        rs.extend((10..15).map(|i| res(i, Label::Natural, false)));
        let b = balance_dataset(&rs, TaskFormat::AcceptabilitySingle, 250, 1);
        assert_eq!((count(&b, Label::Unnatural), count(&b, Label::Natural)), (5, 5));
        assert_eq!(b.warnings.len(), 1);
    }

    #[test]
    fn no_unnaturals() {
        let rs: Vec<AggregationResult> = (0..10).map(|i| res(i, Label::Natural, true)).collect();
        let b = balance_dataset(&rs, TaskFormat::AcceptabilityPair, 250, 1);
        assert!(b.kept.is_empty());
        assert!(!b.warnings.is_empty());
    }

    #[test]
    fn nli_and_discards() {
        let mut rs = vec![res(0, Label::Neutral, false), res(1, Label::Entailment, true)];
        rs.push(AggregationResult {
            item_id: "gone".into(),
            outcome: Outcome::DiscardReason(DiscardReason::NoMajority),
            unanimous: false,
            responses_used: 3,
        });
        let b = balance_dataset(&rs, TaskFormat::Nli, 1, 1);
        assert_eq!(b.kept, rs[..2]);
    }
}
