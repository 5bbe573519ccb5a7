//! Interview configuration: the question list plus analysis knobs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::Metric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: u32,
    pub canonical_text: String,
}

/// Which trailing questions collect post-interview ratings and rationale.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RatingQuestions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfaction: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trust: Option<u32>,
    #[serde(default)]
    pub rationale: Vec<u32>,
}

impl RatingQuestions {
    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.satisfaction
            .into_iter()
            .chain(self.trust)
            .chain(self.rationale.iter().copied())
    }

    pub fn contains(&self, question_id: u32) -> bool {
        self.ids().any(|q| q == question_id)
    }
}

/// How the opening question's completion rate is computed.
///
/// `Denominator` divides the number of users completing Q1 by the number
/// of participants. `Numerator` takes the participant count as the
/// numerator over the number of Q1 responders, capped at 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstQuestionCompletion {
    #[default]
    Denominator,
    Numerator,
}

fn default_fuzzy_threshold() -> f64 {
    0.8
}

fn default_max_evidence() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterviewConfig {
    pub questions: Vec<Question>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating_question_ids: Option<RatingQuestions>,
    #[serde(default = "default_fuzzy_threshold")]
    pub fuzzy_match_threshold: f64,
    #[serde(default)]
    pub thresholds_override: BTreeMap<Metric, f64>,
    #[serde(default = "default_max_evidence")]
    pub max_evidence_per_suggestion: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub first_question_completion: FirstQuestionCompletion,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read interview config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed interview config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid interview config: {0}")]
    Invalid(String),
}

impl InterviewConfig {
    /// Builds a config with default knobs from plain question texts.
    pub fn from_questions<S: AsRef<str>>(texts: &[S]) -> Self {
        Self {
            questions: texts
                .iter()
                .enumerate()
                .map(|(i, t)| Question {
                    question_id: i as u32 + 1,
                    canonical_text: t.as_ref().to_string(),
                })
                .collect(),
            rating_question_ids: None,
            fuzzy_match_threshold: default_fuzzy_threshold(),
            thresholds_override: BTreeMap::new(),
            max_evidence_per_suggestion: default_max_evidence(),
            rng_seed: 0,
            first_question_completion: FirstQuestionCompletion::Denominator,
        }
    }

    pub fn from_json(json: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let json = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&json)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.questions.is_empty() {
            return invalid("at least one question is required".into());
        }
        for (i, q) in self.questions.iter().enumerate() {
            if q.question_id as usize != i + 1 {
                return invalid(format!(
                    "question ids must be 1..n in order; position {} has id {}",
                    i + 1,
                    q.question_id
                ));
            }
            if q.canonical_text.trim().is_empty() {
                return invalid(format!("question {} has empty text", q.question_id));
            }
        }
        if !(self.fuzzy_match_threshold > 0.0 && self.fuzzy_match_threshold <= 1.0) {
            return invalid(format!(
                "fuzzy_match_threshold {} must lie in (0, 1]",
                self.fuzzy_match_threshold
            ));
        }
        if self.max_evidence_per_suggestion == 0 {
            return invalid("max_evidence_per_suggestion must be positive".into());
        }
        if let Some((metric, v)) = self
            .thresholds_override
            .iter()
            .find(|(_, v)| !v.is_finite())
        {
            return invalid(format!(
                "threshold override for {metric} is not finite: {v}"
            ));
        }
        if let Some(rq) = &self.rating_question_ids {
            let n = self.questions.len() as u32;
            let mut ids: Vec<u32> = rq.ids().collect();
            if let Some(bad) = ids.iter().find(|&&q| q == 0 || q > n) {
                return invalid(format!(
                    "rating question {bad} is not a configured question"
                ));
            }
            ids.sort_unstable();
            if ids.windows(2).any(|w| w[0] == w[1]) {
                return invalid("a question is designated for more than one rating role".into());
            }
            // rating questions must trail every interview question
            if let Some(&first) = ids.first() {
                if ids.iter().zip(first..).any(|(&q, want)| q != want) || *ids.last().unwrap() != n
                {
                    return invalid(
                        "rating questions must be the trailing questions of the list".into(),
                    );
                }
                if first == 1 {
                    return invalid(
                        "at least one interview question must precede the rating questions".into(),
                    );
                }
            }
        }
        Ok(())
    }

    pub fn is_rating_question(&self, question_id: u32) -> bool {
        self.rating_question_ids
            .as_ref()
            .is_some_and(|r| r.contains(question_id))
    }

    /// Questions that are part of the interview proper (not ratings).
    pub fn interview_questions(&self) -> impl Iterator<Item = &Question> {
        self.questions
            .iter()
            .filter(|q| !self.is_rating_question(q.question_id))
    }

    /// Id of the final interview question.
    pub fn last_interview_question(&self) -> u32 {
        self.interview_questions()
            .map(|q| q.question_id)
            .max()
            .unwrap_or(0)
    }

    pub fn question_text(&self, question_id: u32) -> Option<&str> {
        self.questions
            .get(question_id.checked_sub(1)? as usize)
            .map(|q| q.canonical_text.as_str())
    }
}
