//! Word lists driving the mutators.
//!
//! Files are UTF-8, one entry (or one tab-separated pair) per line, with
//! `#` starting a comment. Entries are lowercased on load.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

pub const WH_WORDS: [&str; 6] = ["who", "what", "where", "when", "why", "how"];
pub const CONJUNCTIONS: [&str; 3] = ["and", "but", "or"];
pub const ARTICLES: [&str; 3] = ["the", "a", "an"];

const PREPOSITIONS: &str = include_str!("../../lexicons/prepositions.txt");
const COMPARATIVES: &str = include_str!("../../lexicons/comparatives.txt");
const QUANTIFIERS: &str = include_str!("../../lexicons/quantifiers.txt");
const SPATIAL: &str = include_str!("../../lexicons/spatial.txt");
const ANTONYMS: &str = include_str!("../../lexicons/antonyms.txt");
const AN_EXCEPTIONS: &str = include_str!("../../lexicons/an_exceptions.txt");
const VERBS: &str = include_str!("../../lexicons/verbs.txt");

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbForm {
    Bare,
    ThirdSingular,
    Past,
}

/// Maps inflected verb forms to their bare form.
#[derive(Debug, Clone, Default)]
pub struct VerbTable {
    forms: HashMap<String, Vec<(String, VerbForm)>>,
}

impl VerbTable {
    /// All readings of a surface form, most specific first (past, then
    /// third-person singular, then bare).
    pub fn lookup(&self, word: &str) -> &[(String, VerbForm)] {
        self.forms.get(&word.to_lowercase()).map(Vec::as_slice).unwrap_or(&[])
    }

    fn insert(&mut self, form: &str, bare: &str, kind: VerbForm) {
        let entry = self.forms.entry(form.to_string()).or_default();
        if !entry.iter().any(|(b, k)| b == bare && *k == kind) {
            entry.push((bare.to_string(), kind));
            entry.sort_by_key(|(_, k)| match k {
                VerbForm::Past => 0,
                VerbForm::ThirdSingular => 1,
                VerbForm::Bare => 2,
            });
        }
    }
}

#[derive(Debug, Clone)]
pub struct Lexicons {
    pub wh_words: Vec<String>,
    pub conjunctions: Vec<String>,
    pub articles: Vec<String>,
    /// Each preposition as a token sequence ("in front of" has three).
    pub prepositions: Vec<Vec<String>>,
    pub comparatives: Vec<(String, String)>,
    pub quantifiers: Vec<String>,
    pub spatial_words: Vec<String>,
    pub antonym_pairs: Vec<(String, String)>,
    antonyms: HashMap<String, Vec<String>>,
    pub an_exceptions: HashSet<String>,
    pub verbs: VerbTable,
}

fn entries(raw: &str) -> impl Iterator<Item = (usize, String)> + '_ {
    raw.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then(|| (i + 1, l.to_lowercase()))
    })
}

fn words(raw: &str) -> Vec<String> {
    entries(raw).map(|(_, l)| l.split_whitespace().collect::<Vec<_>>().join(" ")).collect()
}

fn pairs(file: &str, raw: &str) -> Result<Vec<(String, String)>, LexiconError> {
    entries(raw)
        .map(|(line, l)| {
            let cols: Vec<&str> = l.split('\t').map(str::trim).collect();
            match cols.as_slice() {
                [a, b] if !a.is_empty() && !b.is_empty() && a != b => Ok((a.to_string(), b.to_string())),
                _ => Err(LexiconError::Parse {
                    file: file.to_string(),
                    line,
                    message: "expected two distinct tab-separated words".into(),
                }),
            }
        })
        .collect()
}

fn verb_table(file: &str, raw: &str) -> Result<VerbTable, LexiconError> {
    let mut table = VerbTable::default();
    for (line, l) in entries(raw) {
        let cols: Vec<&str> = l.split('\t').map(str::trim).collect();
        let [bare, third, past] = cols.as_slice() else {
            return Err(LexiconError::Parse {
                file: file.to_string(),
                line,
                message: "expected bare, third-person and past forms".into(),
            });
        };
        table.insert(bare, bare, VerbForm::Bare);
        table.insert(third, bare, VerbForm::ThirdSingular);
        table.insert(past, bare, VerbForm::Past);
    }
    Ok(table)
}

impl Lexicons {
    /// The lists shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_sources(|_, bundled| Ok(bundled.to_string())).expect("bundled lexicons parse")
    }

    /// Bundled lists, with any of `prepositions.txt`, `comparatives.txt`,
    /// `quantifiers.txt`, `spatial.txt`, `antonyms.txt`, `an_exceptions.txt`
    /// or `verbs.txt` found in `dir` taking precedence.
    pub fn load_dir(dir: &Path) -> Result<Self, LexiconError> {
        Self::from_sources(|name, bundled| {
            let path = dir.join(name);
            if path.exists() {
                fs::read_to_string(&path).map_err(|source| LexiconError::Io { path, source })
            } else {
                Ok(bundled.to_string())
            }
        })
    }

    fn from_sources(
        mut read: impl FnMut(&str, &str) -> Result<String, LexiconError>,
    ) -> Result<Self, LexiconError> {
        let prepositions = words(&read("prepositions.txt", PREPOSITIONS)?)
            .into_iter()
            .map(|p| p.split(' ').map(str::to_string).collect())
            .collect();
        let comparatives = pairs("comparatives.txt", &read("comparatives.txt", COMPARATIVES)?)?;
        let antonym_pairs = pairs("antonyms.txt", &read("antonyms.txt", ANTONYMS)?)?;
        let mut antonyms: HashMap<String, Vec<String>> = HashMap::new();
        for (a, b) in &antonym_pairs {
            for (x, y) in [(a, b), (b, a)] {
                let list = antonyms.entry(x.clone()).or_default();
                if !list.contains(y) {
                    list.push(y.clone());
                }
            }
        }
        Ok(Lexicons {
            wh_words: WH_WORDS.iter().map(|s| s.to_string()).collect(),
            conjunctions: CONJUNCTIONS.iter().map(|s| s.to_string()).collect(),
            articles: ARTICLES.iter().map(|s| s.to_string()).collect(),
            prepositions,
            comparatives,
            quantifiers: words(&read("quantifiers.txt", QUANTIFIERS)?),
            spatial_words: words(&read("spatial.txt", SPATIAL)?),
            antonym_pairs,
            antonyms,
            an_exceptions: words(&read("an_exceptions.txt", AN_EXCEPTIONS)?)
                .into_iter()
                .collect(),
            verbs: verb_table("verbs.txt", &read("verbs.txt", VERBS)?)?,
        })
    }

    /// Antonyms of `word` in either direction of the pair list.
    pub fn antonyms_of(&self, word: &str) -> &[String] {
        self.antonyms.get(&word.to_lowercase()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn are_antonyms(&self, a: &str, b: &str) -> bool {
        let b = b.to_lowercase();
        self.antonyms_of(a).iter().any(|x| *x == b)
    }

    /// Members of both sides of the comparative pairs, deduplicated.
    pub fn comparative_words(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (a, b) in &self.comparatives {
            for w in [a, b] {
                if !out.contains(w) {
                    out.push(w.clone());
                }
            }
        }
        out
    }

    /// "a" or "an" for the word that follows the article.
    pub fn indefinite_for(&self, next: &str) -> &'static str {
        let word: String = next
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        let vowel = word.starts_with(['a', 'e', 'i', 'o', 'u']);
        if vowel ^ self.an_exceptions.contains(&word) {
            "an"
        } else {
            "a"
        }
    }
}
