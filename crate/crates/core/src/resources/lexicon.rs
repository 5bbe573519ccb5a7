use std::collections::{BTreeSet, HashMap, HashSet};

use super::{ResourceError, ResourceKind};
use crate::text::tokenize;

fn entries(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Words a chatbot uses to express empathy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpathyLexicon {
    words: HashSet<String>,
}

impl EmpathyLexicon {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> Self {
        Self {
            words: words
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
        }
    }

    /// One word per line; `#` lines are comments.
    pub fn parse(text: &str, warnings: &mut Vec<String>) -> Result<Self, ResourceError> {
        let mut words = HashSet::new();
        let mut duplicates = 0;
        for (line, entry) in entries(text) {
            let toks = tokenize(entry);
            if toks.len() != 1 {
                return Err(ResourceError::Malformed {
                    kind: ResourceKind::Empathy,
                    line,
                    reason: format!("expected a single word, got {entry:?}"),
                });
            }
            if !words.insert(toks.into_iter().next().unwrap()) {
                duplicates += 1;
            }
        }
        if words.is_empty() {
            return Err(ResourceError::Empty(ResourceKind::Empathy));
        }
        if duplicates > 0 {
            warnings.push(format!(
                "empathy lexicon: {duplicates} duplicate entries removed"
            ));
        }
        Ok(Self { words })
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Valence lexicon with intensity boosters and negators.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SentimentLexicon {
    pub polarity: HashMap<String, f64>,
    pub boosters: HashMap<String, f64>,
    pub negations: HashSet<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Polarity,
    Boosters,
    Negations,
}

impl SentimentLexicon {
    /// `token<TAB>valence` lines, then optional `#boosters` (`token<TAB>increment`)
    /// and `#negations` (one token per line) sections.
    pub fn parse(text: &str, warnings: &mut Vec<String>) -> Result<Self, ResourceError> {
        let mut lex = Self::default();
        let mut section = Section::Polarity;
        let mut duplicates = 0;

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let entry = raw.trim();
            match entry.to_ascii_lowercase().as_str() {
                "#polarity" => section = Section::Polarity,
                "#boosters" => section = Section::Boosters,
                "#negations" => section = Section::Negations,
                _ => {}
            }
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| ResourceError::Malformed {
                kind: ResourceKind::Sentiment,
                line,
                reason,
            };
            let inserted = if section == Section::Negations {
                lex.negations.insert(entry.to_lowercase())
            } else {
                let (token, value) = entry
                    .split_once('\t')
                    .ok_or_else(|| malformed("expected token<TAB>value".into()))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| {
                        malformed(format!("{:?} is not a finite number", value.trim()))
                    })?;
                let map = match section {
                    Section::Polarity => &mut lex.polarity,
                    _ => &mut lex.boosters,
                };
                map.insert(token.trim().to_lowercase(), value).is_none()
            };
            if !inserted {
                duplicates += 1;
            }
        }
        if let Some(both) = lex.negations.iter().find(|n| lex.boosters.contains_key(*n)) {
            return Err(ResourceError::Invalid {
                kind: ResourceKind::Sentiment,
                reason: format!("{both:?} is both a booster and a negation"),
            });
        }
        if lex.polarity.is_empty() {
            return Err(ResourceError::Empty(ResourceKind::Sentiment));
        }
        if duplicates > 0 {
            warnings.push(format!(
                "sentiment lexicon: {duplicates} duplicate entries; last value kept"
            ));
        }
        Ok(lex)
    }
}

/// Offensive words and phrases; phrases match contiguous token runs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OffensiveLexicon {
    terms: BTreeSet<Vec<String>>,
}

impl OffensiveLexicon {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(terms: I) -> Self {
        Self {
            terms: terms
                .into_iter()
                .map(|t| tokenize(t.as_ref()))
                .filter(|t| !t.is_empty())
                .collect(),
        }
    }

    pub fn parse(text: &str, warnings: &mut Vec<String>) -> Result<Self, ResourceError> {
        let mut terms = BTreeSet::new();
        let mut duplicates = 0;
        for (line, entry) in entries(text) {
            let toks = tokenize(entry);
            if toks.is_empty() {
                return Err(ResourceError::Malformed {
                    kind: ResourceKind::Offensive,
                    line,
                    reason: format!("{entry:?} contains no word characters"),
                });
            }
            if !terms.insert(toks) {
                duplicates += 1;
            }
        }
        if terms.is_empty() {
            return Err(ResourceError::Empty(ResourceKind::Offensive));
        }
        if duplicates > 0 {
            warnings.push(format!(
                "offensive lexicon: {duplicates} duplicate entries removed"
            ));
        }
        Ok(Self { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether any term occurs as a contiguous run of `tokens`.
    pub fn matches_tokens(&self, tokens: &[String]) -> bool {
        self.terms
            .iter()
            .any(|term| tokens.windows(term.len()).any(|w| w == term.as_slice()))
    }

    pub fn matches(&self, text: &str) -> bool {
        self.matches_tokens(&tokenize(text))
    }
}
