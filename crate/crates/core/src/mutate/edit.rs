//! Token-level edits spliced back into the source text.

use crate::corpus::{ChangedSpan, Side, TokenizedSentence};

/// Replace tokens `[start, end)` with `new`; `start == end` inserts.
#[derive(Debug, Clone)]
pub(crate) struct Edit {
    pub start: usize,
    pub end: usize,
    pub new: Vec<String>,
}

impl Edit {
    pub fn replace(at: usize, new: impl Into<String>) -> Self {
        Edit { start: at, end: at + 1, new: vec![new.into()] }
    }

    pub fn insert(at: usize, new: Vec<String>) -> Self {
        Edit { start: at, end: at, new }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Applied {
    pub text: String,
    pub tokens: Vec<String>,
    pub spans: Vec<ChangedSpan>,
}

/// Apply non-overlapping edits sorted by position. Text outside the edited
/// tokens is copied byte for byte.
pub(crate) fn apply(s: &TokenizedSentence, edits: &[Edit], side: Option<Side>) -> Applied {
    let mut text = String::with_capacity(s.text.len() + 16);
    let mut tokens = Vec::with_capacity(s.tokens.len() + 2);
    let mut spans = Vec::with_capacity(edits.len());
    let mut byte = 0;
    let mut tok = 0;
    for e in edits {
        debug_assert!(e.start >= tok && e.start <= e.end && e.end <= s.tokens.len());
        tokens.extend_from_slice(&s.tokens[tok..e.start]);
        let words = e.new.join(" ");
        if e.start == e.end {
            if e.start == 0 {
                let at = s.offsets[0].0;
                text.push_str(&s.text[byte..at]);
                text.push_str(&words);
                text.push(' ');
                byte = at;
            } else {
                let at = s.offsets[e.start - 1].1;
                text.push_str(&s.text[byte..at]);
                text.push(' ');
                text.push_str(&words);
                byte = at;
            }
        } else {
            let (a, b) = (s.offsets[e.start].0, s.offsets[e.end - 1].1);
            text.push_str(&s.text[byte..a]);
            text.push_str(&words);
            byte = b;
        }
        tokens.extend(e.new.iter().cloned());
        spans.push(ChangedSpan {
            side,
            position: e.start,
            old: s.tokens[e.start..e.end].to_vec(),
            new: e.new.clone(),
        });
        tok = e.end;
    }
    text.push_str(&s.text[byte..]);
    tokens.extend_from_slice(&s.tokens[tok..]);
    Applied { text, tokens, spans }
}

impl Applied {
    pub fn sentence(&self, id: &str) -> TokenizedSentence {
        let s = TokenizedSentence::new(id, &self.text).expect("edited text is non-empty");
        debug_assert_eq!(s.tokens, self.tokens, "splice changed tokenization of {:?}", self.text);
        s
    }
}

/// Give `new` the capitalization pattern of `original`.
pub fn match_case(original: &str, new: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return new.to_uppercase();
    }
    match original.chars().next() {
        Some(c) if c.is_uppercase() => {
            let mut chars = new.chars();
            chars
                .next()
                .map(|f| f.to_uppercase().chain(chars).collect())
                .unwrap_or_default()
        }
        _ => new.to_string(),
    }
}
