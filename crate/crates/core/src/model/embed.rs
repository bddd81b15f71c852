//! Deterministic hashed sentence features.

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::hash::stable_hash;

pub const DEFAULT_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceVector {
    pub values: Vec<f64>,
}

impl SentenceVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

/// Weight for the token at position `i`; later tokens count a little less,
/// so reordering a sentence changes its vector.
fn position_weight(i: usize) -> f64 {
    1.0 / (1.0 + 0.05 * i as f64)
}

fn add_feature(out: &mut [f64], kind: &[u8], feature: &str) {
    let h = stable_hash(&[kind, feature.as_bytes()]);
    let bucket = (h % out.len() as u64) as usize;
    out[bucket] += if h >> 63 == 0 { 1.0 } else { -1.0 };
}

/// Hash the word unigram, the bigram it starts and its character trigrams
/// into `dim` signed buckets per token, scale by position, and max-pool
/// over tokens.
pub fn embed_sentence<S: AsRef<str>>(tokens: &[S], dim: usize) -> Result<SentenceVector, ModelError> {
    if tokens.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    if dim == 0 {
        return Err(ModelError::Config("feature dimension must be positive".into()));
    }
    let lower: Vec<String> = tokens.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let mut pooled = vec![f64::NEG_INFINITY; dim];
    let mut local = vec![0.0; dim];
    for (i, tok) in lower.iter().enumerate() {
        local.iter_mut().for_each(|v| *v = 0.0);
        add_feature(&mut local, b"w", tok);
        if let Some(next) = lower.get(i + 1) {
            add_feature(&mut local, b"b", &format!("{tok} {next}"));
        }
        let padded: Vec<char> = std::iter::once('<').chain(tok.chars()).chain(std::iter::once('>')).collect();
        for tri in padded.windows(3) {
            add_feature(&mut local, b"c", &tri.iter().collect::<String>());
        }
        let w = position_weight(i);
        for (p, v) in pooled.iter_mut().zip(&local) {
            *p = p.max(v * w);
        }
    }
    Ok(SentenceVector { values: pooled })
}

/// `[u; v; u ⊙ v; |u − v|]`.
pub fn pair_features(u: &SentenceVector, v: &SentenceVector) -> Result<Vec<f64>, ModelError> {
    if u.dim() != v.dim() {
        return Err(ModelError::DimensionMismatch { left: u.dim(), right: v.dim() });
    }
    let (a, b) = (&u.values, &v.values);
    let mut out = Vec::with_capacity(4 * a.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.extend(a.iter().zip(b).map(|(x, y)| x * y));
    out.extend(a.iter().zip(b).map(|(x, y)| (x - y).abs()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_token_is_sparse() {
        // One unigram, no bigram, trigrams "<ok" and "ok>".
        let v = embed_sentence(&["ok"], DEFAULT_DIM).unwrap();
        assert!(v.nonzero() <= 3 && v.nonzero() >= 1);
        assert_eq!(v.dim(), 256);
    }

    #[test]
    fn deterministic_and_order_sensitive() {
        let a = embed_sentence(&["the", "dog", "bit", "the", "man"], 64).unwrap();
        assert_eq!(a, embed_sentence(&["the", "dog", "bit", "the", "man"], 64).unwrap());
        assert_ne!(a, embed_sentence(&["the", "man", "bit", "the", "dog"], 64).unwrap());
        assert!(a.values.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn errors() {
        assert!(matches!(embed_sentence::<&str>(&[], 8), Err(ModelError::EmptyInput)));
        let u = SentenceVector { values: vec![1.0] };
        let v = SentenceVector { values: vec![1.0, 2.0] };
        assert!(matches!(pair_features(&u, &v), Err(ModelError::DimensionMismatch { .. })));
    }

    #[test]
    fn hand_example() {
        let u = SentenceVector { values: vec![1.0, 2.0] };
        let v = SentenceVector { values: vec![3.0, -1.0] };
        assert_eq!(pair_features(&u, &v).unwrap(), vec![1.0, 2.0, 3.0, -1.0, 3.0, -2.0, 2.0, 3.0]);
        let same = pair_features(&u, &u).unwrap();
        assert_eq!(&same[4..], &[1.0, 4.0, 0.0, 0.0]);
    }
}
