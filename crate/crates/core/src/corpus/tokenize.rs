//! Rule-based word tokenizer and its inverse.
//!
//! Whitespace separates chunks. Each chunk loses leading `"`/`(` and
//! trailing `. , ? ! ; : " )` as separate tokens, and the remaining core is
//! split before `n't` and `'s`. A trailing period stays attached to
//! dotted acronyms such as `U.S.`.

use serde::{Deserialize, Serialize};

use super::CorpusError;

const LEADING: &[char] = &['"', '('];
const TRAILING: &[char] = &['.', ',', '?', '!', ';', ':', '"', ')'];
const CONTRACTIONS: &[&str] = &["n't", "'s", "N'T", "'S"];

/// Default maximum token count for mutation candidates.
pub const DEFAULT_MAX_TOKENS: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedSentence {
    pub sentence_id: String,
    pub text: String,
    pub tokens: Vec<String>,
    /// Byte spans into `text`, one per token.
    pub offsets: Vec<(usize, usize)>,
}

impl TokenizedSentence {
    pub fn new(sentence_id: impl Into<String>, text: &str) -> Result<Self, CorpusError> {
        let (tokens, offsets) = split(text)?;
        Ok(TokenizedSentence {
            sentence_id: sentence_id.into(),
            text: text.to_string(),
            tokens,
            offsets,
        })
    }

    /// Build from tokens alone; the text is the detokenized form.
    pub fn from_tokens(sentence_id: impl Into<String>, tokens: &[String]) -> Result<Self, CorpusError> {
        let text = detokenize(tokens);
        Self::new(sentence_id, &text)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn within_length(&self, min: usize, max: usize) -> bool {
        (min..=max).contains(&self.tokens.len())
    }

    pub fn lowercase_tokens(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.to_lowercase()).collect()
    }
}

/// Tokenize `text` with an empty sentence id.
pub fn tokenize(text: &str) -> Result<TokenizedSentence, CorpusError> {
    TokenizedSentence::new("", text)
}

fn split(text: &str) -> Result<(Vec<String>, Vec<(usize, usize)>), CorpusError> {
    if text.trim().is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let mut spans = Vec::new();
    let mut chunk_start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = chunk_start.take() {
                split_chunk(text, s, i, &mut spans);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(s) = chunk_start {
        split_chunk(text, s, text.len(), &mut spans);
    }
    let tokens = spans.iter().map(|&(a, b)| text[a..b].to_string()).collect();
    Ok((tokens, spans))
}

fn split_chunk(text: &str, mut start: usize, mut end: usize, out: &mut Vec<(usize, usize)>) {
    while start < end {
        let c = text[start..end].chars().next().unwrap();
        if !LEADING.contains(&c) {
            break;
        }
        out.push((start, start + c.len_utf8()));
        start += c.len_utf8();
    }
    let mut trailing = Vec::new();
    while start < end {
        let c = text[start..end].chars().next_back().unwrap();
        if !TRAILING.contains(&c) {
            break;
        }
        if c == '.' && is_dotted_acronym(&text[start..end]) {
            break;
        }
        trailing.push((end - c.len_utf8(), end));
        end -= c.len_utf8();
    }
    if start < end {
        let core = &text[start..end];
        match CONTRACTIONS.iter().find(|suffix| core.len() > suffix.len() && core.ends_with(*suffix)) {
            Some(suffix) => {
                let cut = end - suffix.len();
                out.push((start, cut));
                out.push((cut, end));
            }
            None => out.push((start, end)),
        }
    }
    out.extend(trailing.into_iter().rev());
}

// "U.S." or "e.g.": single letters separated by periods, ending in a period.
fn is_dotted_acronym(chunk: &str) -> bool {
    let Some(body) = chunk.strip_suffix('.') else {
        return false;
    };
    let parts: Vec<&str> = body.split('.').collect();
    parts.len() >= 2
        && parts
            .iter()
            .all(|p| p.chars().count() == 1 && p.chars().all(char::is_alphabetic))
}

fn attaches_left(tok: &str) -> bool {
    matches!(tok, "." | "," | "?" | "!" | ";" | ":" | ")")
        || CONTRACTIONS.iter().any(|c| tok == *c)
}

/// Join tokens into running text, undoing the tokenizer's splits.
///
/// Double quotes alternate between opening and closing.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut glue_next = true;
    let mut quote_open = false;
    for tok in tokens {
        let tok = tok.as_ref();
        let is_quote = tok == "\"";
        let attach = if is_quote { quote_open } else { attaches_left(tok) };
        if !glue_next && !attach {
            out.push(' ');
        }
        out.push_str(tok);
        glue_next = if is_quote {
            quote_open = !quote_open;
            quote_open
        } else {
            tok == "("
        };
    }
    out
}
