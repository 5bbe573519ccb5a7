//! Turns profile flags into design suggestions using a guideline catalog
//! and a fixed sentence template.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::EvidenceBundle;
use crate::metrics::Metric;
use crate::profile::{ChatbotProfile, Direction};

const DEFAULT_CATALOG: &str = include_str!("../resources/guidelines.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guideline {
    pub id: String,
    pub text: String,
    pub metrics: BTreeSet<Metric>,
}

/// Design guidelines and the metrics whose breach each one remedies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GuidelineCatalog {
    entries: Vec<Guideline>,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("failed to read guideline catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed guideline catalog: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid guideline catalog: {0}")]
    Invalid(String),
}

impl GuidelineCatalog {
    /// Validates ids, texts and metric coverage.
    pub fn new(mut entries: Vec<Guideline>) -> Result<Self, CatalogError> {
        let invalid = |m: String| Err(CatalogError::Invalid(m));
        let mut ids = BTreeSet::new();
        for g in &entries {
            if g.id.trim().is_empty() {
                return invalid("guideline with an empty id".into());
            }
            if !ids.insert(g.id.as_str()) {
                return invalid(format!("duplicate guideline id {}", g.id));
            }
            if g.text.trim().is_empty() {
                return invalid(format!("guideline {} has empty text", g.id));
            }
            if g.metrics.is_empty() {
                return invalid(format!("guideline {} applies to no metric", g.id));
            }
        }
        if let Some(m) = Metric::ALL
            .into_iter()
            .find(|m| !entries.iter().any(|g| g.metrics.contains(m)))
        {
            return invalid(format!("no guideline covers {}", m.display_name()));
        }
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Self { entries })
    }

    pub fn parse(json: &str) -> Result<Self, CatalogError> {
        Self::new(serde_json::from_str(json)?)
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let json = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&json)
    }

    /// The shipped catalog.
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }

    pub fn entries(&self) -> &[Guideline] {
        &self.entries
    }

    /// Guidelines for `metric`, ordered by id.
    pub fn applicable(&self, metric: Metric) -> impl Iterator<Item = &Guideline> {
        self.entries
            .iter()
            .filter(move |g| g.metrics.contains(&metric))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionWord {
    #[serde(rename = "too low")]
    TooLow,
    #[serde(rename = "too high")]
    TooHigh,
}

impl DirectionWord {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectionWord::TooLow => "too low",
            DirectionWord::TooHigh => "too high",
        }
    }
}

impl From<Direction> for DirectionWord {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Below => DirectionWord::TooLow,
            Direction::Above => DirectionWord::TooHigh,
        }
    }
}

impl fmt::Display for DirectionWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub question_id: u32,
    pub question_text: String,
    pub metric: Metric,
    pub direction_word: DirectionWord,
    pub guideline_id: String,
    pub sentence: String,
    pub observed: f64,
    pub threshold: f64,
    pub evidence: EvidenceBundle,
}

const PREFIX: &str = "For question '";
const QUESTION_END: &str = "', ";
const BECAUSE: &str = " because metric ";
const IS: &str = " is ";

fn lowercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Renders `For question 'Q', d because metric m is Z.` with the guideline's
/// first letter and the metric name lowercased.
pub fn realize_sentence(question: &str, guideline: &str, metric: &str, z: DirectionWord) -> String {
    let d = guideline.trim().trim_end_matches('.').trim_end();
    format!(
        "{PREFIX}{}{QUESTION_END}{}{BECAUSE}{}{IS}{z}.",
        question.trim(),
        lowercase_first(d),
        metric.trim().to_lowercase()
    )
}

/// A realized sentence split back into its parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    pub question: String,
    pub guideline: String,
    pub metric: String,
    pub direction_word: DirectionWord,
}

/// Inverse of [`realize_sentence`]. The guideline text must not itself
/// contain `', ` or ` because metric `.
pub fn parse_sentence(sentence: &str) -> Option<ParsedSentence> {
    let body = sentence.strip_prefix(PREFIX)?.strip_suffix('.')?;
    let (head, tail) = body.rsplit_once(BECAUSE)?;
    let (metric, z) = tail.rsplit_once(IS)?;
    let direction_word = match z {
        "too low" => DirectionWord::TooLow,
        "too high" => DirectionWord::TooHigh,
        _ => return None,
    };
    let (question, guideline) = head.rsplit_once(QUESTION_END)?;
    Some(ParsedSentence {
        question: question.to_string(),
        guideline: guideline.to_string(),
        metric: metric.to_string(),
        direction_word,
    })
}

/// One suggestion per applicable guideline per flag, ordered by question,
/// metric and guideline id. Evidence is left empty.
pub fn generate_suggestions(
    profile: &ChatbotProfile,
    catalog: &GuidelineCatalog,
) -> Vec<Suggestion> {
    let mut out = Vec::new();
    for flag in &profile.flags {
        let question_text = profile
            .per_question
            .iter()
            .find(|q| q.question_id == flag.question_id)
            .map(|q| q.question_text.clone())
            .unwrap_or_default();
        let z = DirectionWord::from(flag.direction);
        for g in catalog.applicable(flag.metric) {
            out.push(Suggestion {
                question_id: flag.question_id,
                question_text: question_text.clone(),
                metric: flag.metric,
                direction_word: z,
                guideline_id: g.id.clone(),
                sentence: realize_sentence(&question_text, &g.text, flag.metric.display_name(), z),
                observed: flag.observed,
                threshold: flag.threshold,
                evidence: EvidenceBundle::default(),
            });
        }
    }
    out.sort_by(|a, b| {
        (a.question_id, a.metric, &a.guideline_id).cmp(&(b.question_id, b.metric, &b.guideline_id))
    });
    out
}
