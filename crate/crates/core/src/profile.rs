//! Aggregates per-segment metrics into a chatbot profile and flags every
//! question whose score crosses its threshold.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{FirstQuestionCompletion, InterviewConfig};
use crate::metrics::{sentiment_breakdown, Metric, MetricVector, SentimentBreakdown};
use crate::resources::Resources;
use crate::segment::{extract_ratings, segment_session, Segment};
use crate::transcript::Session;

/// Per-metric means or standard deviations across a question's segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub informativeness: f64,
    pub response_length: f64,
    pub engagement_duration: f64,
    pub empathy_level: f64,
    pub repetition_rate: f64,
    pub hate_speech_rate: f64,
    pub privacy_intrusion_rate: f64,
}

impl MetricSummary {
    fn from_fn(mut f: impl FnMut(Metric) -> f64) -> Self {
        Self {
            informativeness: f(Metric::Informativeness),
            response_length: f(Metric::ResponseLength),
            engagement_duration: f(Metric::EngagementDuration),
            empathy_level: f(Metric::EmpathyLevel),
            repetition_rate: f(Metric::RepetitionRate),
            hate_speech_rate: f(Metric::HateSpeechRate),
            privacy_intrusion_rate: f(Metric::PrivacyIntrusionRate),
        }
    }

    pub fn get(&self, metric: Metric) -> Option<f64> {
        Some(match metric {
            Metric::Informativeness => self.informativeness,
            Metric::ResponseLength => self.response_length,
            Metric::EngagementDuration => self.engagement_duration,
            Metric::CompletionRate => return None,
            Metric::EmpathyLevel => self.empathy_level,
            Metric::RepetitionRate => self.repetition_rate,
            Metric::HateSpeechRate => self.hate_speech_rate,
            Metric::PrivacyIntrusionRate => self.privacy_intrusion_rate,
        })
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        Metric::ALL.into_iter().filter_map(|m| self.get(m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionStats {
    pub question_id: u32,
    pub question_text: String,
    pub n_segments: usize,
    /// Segments with at least one user message.
    pub n_responded: usize,
    /// Responded segments that advanced.
    pub n_completed: usize,
    /// Absent when `n_segments` is 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<MetricSummary>,
    /// Population standard deviation; absent when `n_segments` is 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<MetricSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion_rate: Option<f64>,
}

impl QuestionStats {
    /// The question's aggregate value for `metric`.
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::CompletionRate => self.completion_rate,
            m => self.mean.as_ref().and_then(|s| s.get(m)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterviewStats {
    pub n_sessions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_satisfaction: Option<f64>,
    pub n_satisfaction: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_trust: Option<f64>,
    pub n_trust: usize,
    pub sentiment: SentimentBreakdown,
    pub n_feedback: usize,
    /// Share of sessions whose final interview question advanced.
    pub completion_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Fires when the observed value is strictly below the threshold.
    Below,
    /// Fires when the observed value is strictly above the threshold.
    Above,
}

impl Direction {
    /// The fixed side on which a metric is considered bad.
    pub fn for_metric(metric: Metric) -> Self {
        match metric {
            Metric::Informativeness
            | Metric::ResponseLength
            | Metric::EngagementDuration
            | Metric::CompletionRate
            | Metric::EmpathyLevel => Direction::Below,
            Metric::RepetitionRate | Metric::HateSpeechRate | Metric::PrivacyIntrusionRate => {
                Direction::Above
            }
        }
    }

    pub fn triggers(self, observed: f64, threshold: f64) -> bool {
        match self {
            Direction::Below => observed < threshold,
            Direction::Above => observed > threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub direction: Direction,
}

/// One threshold per question-level metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThresholdSet(BTreeMap<Metric, Threshold>);

impl ThresholdSet {
    pub fn get(&self, metric: Metric) -> Threshold {
        self.0[&metric]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Metric, Threshold)> + '_ {
        self.0.iter().map(|(m, t)| (*m, *t))
    }

    /// Whether `observed` breaches the threshold for `metric`.
    pub fn breached(&self, metric: Metric, observed: f64) -> bool {
        let t = self.get(metric);
        t.direction.triggers(observed, t.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub question_id: u32,
    pub metric: Metric,
    pub observed: f64,
    pub threshold: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatbotProfile {
    pub per_question: Vec<QuestionStats>,
    pub interview: InterviewStats,
    pub thresholds: ThresholdSet,
    pub flags: Vec<Flag>,
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("the transcript corpus is empty")]
    EmptyCorpus,
    #[error(
        "no threshold for {0}: no session reached the opening question and no override was given"
    )]
    MissingThreshold(Metric),
    #[error("the hate speech rate threshold is fixed at 0 and cannot be overridden")]
    PinnedThreshold,
}

/// Thresholds from the opening question's scores, with overrides applied.
/// Hate speech is always `> 0`.
pub fn derive_thresholds(
    q1: Option<&QuestionStats>,
    overrides: &BTreeMap<Metric, f64>,
) -> Result<ThresholdSet, ProfileError> {
    if overrides.contains_key(&Metric::HateSpeechRate) {
        return Err(ProfileError::PinnedThreshold);
    }
    let q1 = q1.filter(|q| q.n_segments > 0);
    let mut set = BTreeMap::new();
    for metric in Metric::ALL {
        let value = if metric == Metric::HateSpeechRate {
            0.0
        } else {
            overrides
                .get(&metric)
                .copied()
                .or_else(|| q1.and_then(|q| q.value(metric)))
                .ok_or(ProfileError::MissingThreshold(metric))?
        };
        set.insert(
            metric,
            Threshold {
                value,
                direction: Direction::for_metric(metric),
            },
        );
    }
    Ok(ThresholdSet(set))
}

/// Question-level flags under strict inequality, ordered by question then metric.
pub fn find_flags(per_question: &[QuestionStats], thresholds: &ThresholdSet) -> Vec<Flag> {
    let mut flags = Vec::new();
    for q in per_question {
        for (metric, t) in thresholds.iter() {
            let Some(observed) = q.value(metric) else {
                continue;
            };
            if t.direction.triggers(observed, t.value) {
                flags.push(Flag {
                    question_id: q.question_id,
                    metric,
                    observed,
                    threshold: t.value,
                    direction: t.direction,
                });
            }
        }
    }
    flags
}

/// A segment with its owning session and computed metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSegment {
    pub session_id: String,
    pub segment: Segment,
    pub metrics: MetricVector,
}

impl ScoredSegment {
    /// Per-segment value of `metric`. For completion this is 1 or 0 for a
    /// responded segment and `None` for an unanswered one.
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::CompletionRate => self
                .segment
                .has_user_response()
                .then_some(if self.segment.advanced { 1.0 } else { 0.0 }),
            m => self.metrics.get(m),
        }
    }
}

/// Full output of profiling: the profile plus the scored segments and
/// warnings the later stages need.
#[derive(Debug, Clone)]
pub struct ProfileRun {
    pub profile: ChatbotProfile,
    /// Sorted by (session_id, question_id).
    pub segments: Vec<ScoredSegment>,
    pub warnings: Vec<String>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.max(0.0).sqrt())
}

fn mean_rating(values: &[u8]) -> Option<f64> {
    (!values.is_empty())
        .then(|| values.iter().map(|&v| f64::from(v)).sum::<f64>() / values.len() as f64)
}

fn question_stats(
    question_id: u32,
    question_text: &str,
    segs: &[&ScoredSegment],
    corpus_size: usize,
    convention: FirstQuestionCompletion,
) -> QuestionStats {
    let n_responded = segs
        .iter()
        .filter(|s| s.segment.has_user_response())
        .count();
    let n_completed = segs
        .iter()
        .filter(|s| s.segment.has_user_response() && s.segment.advanced)
        .count();
    let completion_rate = completion_rate(
        question_id,
        n_completed,
        n_responded,
        corpus_size,
        convention,
    );

    let (mean, sd) = if segs.is_empty() {
        (None, None)
    } else {
        let mut means = BTreeMap::new();
        let mut sds = BTreeMap::new();
        for metric in Metric::ALL
            .into_iter()
            .filter(|&m| m != Metric::CompletionRate)
        {
            let values: Vec<f64> = segs.iter().filter_map(|s| s.metrics.get(metric)).collect();
            let (m, sd) = mean_sd(&values);
            means.insert(metric, m);
            sds.insert(metric, sd);
        }
        (
            Some(MetricSummary::from_fn(|m| means[&m])),
            Some(MetricSummary::from_fn(|m| sds[&m])),
        )
    };

    QuestionStats {
        question_id,
        question_text: question_text.to_string(),
        n_segments: segs.len(),
        n_responded,
        n_completed,
        mean,
        sd,
        completion_rate,
    }
}

/// Completion rate of one question from its completed (`Cq`) and responded
/// (`Tq`) counts. The opening question is measured against all participants.
pub fn completion_rate(
    question_id: u32,
    completed: usize,
    responded: usize,
    corpus_size: usize,
    convention: FirstQuestionCompletion,
) -> Option<f64> {
    if question_id == 1 && corpus_size > 0 {
        return match convention {
            FirstQuestionCompletion::Denominator => Some(completed as f64 / corpus_size as f64),
            FirstQuestionCompletion::Numerator => {
                (responded > 0).then(|| (corpus_size as f64 / responded as f64).min(1.0))
            }
        };
    }
    (responded > 0).then(|| completed as f64 / responded as f64)
}

/// Segments, scores and aggregates a corpus.
pub fn profile_corpus(
    corpus: &[Session],
    cfg: &InterviewConfig,
    res: &Resources,
) -> Result<ProfileRun, ProfileError> {
    if corpus.is_empty() {
        return Err(ProfileError::EmptyCorpus);
    }
    let mut sessions: Vec<&Session> = corpus.iter().collect();
    sessions.sort_by(|a, b| a.session_id.cmp(&b.session_id));

    let mut warnings = Vec::new();
    let mut segments = Vec::new();
    let mut satisfaction = Vec::new();
    let mut trust = Vec::new();
    let mut feedback = Vec::new();
    let mut finished = 0;
    let last = cfg.last_interview_question();

    for s in &sessions {
        let seg = segment_session(s, cfg);
        warnings.extend(seg.warnings);
        if seg
            .segments
            .iter()
            .any(|g| g.question_id == last && g.advanced)
        {
            finished += 1;
        }
        for segment in seg.segments {
            let metrics = MetricVector::compute(&segment, res);
            segments.push(ScoredSegment {
                session_id: s.session_id.clone(),
                segment,
                metrics,
            });
        }
        let ratings = extract_ratings(s, cfg);
        warnings.extend(ratings.warnings);
        satisfaction.extend(ratings.satisfaction);
        trust.extend(ratings.trust);
        feedback.extend(ratings.feedback_texts);
    }

    let per_question: Vec<QuestionStats> = cfg
        .interview_questions()
        .map(|q| {
            let segs: Vec<&ScoredSegment> = segments
                .iter()
                .filter(|s| s.segment.question_id == q.question_id)
                .collect();
            question_stats(
                q.question_id,
                &q.canonical_text,
                &segs,
                sessions.len(),
                cfg.first_question_completion,
            )
        })
        .collect();

    let thresholds = derive_thresholds(per_question.first(), &cfg.thresholds_override)?;
    let flags = find_flags(&per_question, &thresholds);

    let interview = InterviewStats {
        n_sessions: sessions.len(),
        mean_satisfaction: mean_rating(&satisfaction),
        n_satisfaction: satisfaction.len(),
        mean_trust: mean_rating(&trust),
        n_trust: trust.len(),
        sentiment: sentiment_breakdown(&feedback, &res.sentiment),
        n_feedback: feedback.len(),
        completion_rate: finished as f64 / sessions.len() as f64,
    };

    Ok(ProfileRun {
        profile: ChatbotProfile {
            per_question,
            interview,
            thresholds,
            flags,
        },
        segments,
        warnings,
    })
}

/// Builds the chatbot profile for a corpus.
pub fn aggregate(
    corpus: &[Session],
    cfg: &InterviewConfig,
    res: &Resources,
) -> Result<ChatbotProfile, ProfileError> {
    profile_corpus(corpus, cfg, res).map(|run| run.profile)
}
