//! Chatbot performance metrics.
//!
//! Question-level metrics are computed per segment and later averaged per
//! question; satisfaction, trust and sentiment are interview-level.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::resources::{
    EmpathyLexicon, FrequencyTable, OffensiveLexicon, PiiDetectorSet, Resources, SentimentLexicon,
};
use crate::segment::Segment;
use crate::text::tokenize;
use crate::transcript::Message;

/// A question-level metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Informativeness,
    ResponseLength,
    EngagementDuration,
    CompletionRate,
    EmpathyLevel,
    RepetitionRate,
    HateSpeechRate,
    PrivacyIntrusionRate,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Informativeness,
        Metric::ResponseLength,
        Metric::EngagementDuration,
        Metric::CompletionRate,
        Metric::EmpathyLevel,
        Metric::RepetitionRate,
        Metric::HateSpeechRate,
        Metric::PrivacyIntrusionRate,
    ];

    /// Machine name used in JSON.
    pub fn key(self) -> &'static str {
        match self {
            Metric::Informativeness => "informativeness",
            Metric::ResponseLength => "response_length",
            Metric::EngagementDuration => "engagement_duration",
            Metric::CompletionRate => "completion_rate",
            Metric::EmpathyLevel => "empathy_level",
            Metric::RepetitionRate => "repetition_rate",
            Metric::HateSpeechRate => "hate_speech_rate",
            Metric::PrivacyIntrusionRate => "privacy_intrusion_rate",
        }
    }

    /// Human-readable name, as used by the design guidelines.
    pub fn display_name(self) -> &'static str {
        match self {
            Metric::Informativeness => "Informativeness",
            Metric::ResponseLength => "Response Length",
            Metric::EngagementDuration => "Engagement Duration",
            Metric::CompletionRate => "Completion Rate",
            Metric::EmpathyLevel => "Level of Empathy",
            Metric::RepetitionRate => "Repetition Rate",
            Metric::HateSpeechRate => "Hate Speech Rate",
            Metric::PrivacyIntrusionRate => "Privacy Intrusion Rate",
        }
    }

    /// True for metrics bounded to `[0, 1]`.
    pub fn is_rate(self) -> bool {
        !matches!(
            self,
            Metric::Informativeness | Metric::ResponseLength | Metric::EngagementDuration
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownMetric(pub String);

impl fmt::Display for UnknownMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown metric {:?}", self.0)
    }
}

impl std::error::Error for UnknownMetric {}

impl FromStr for Metric {
    type Err = UnknownMetric;

    /// Accepts the JSON key or the display name, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = |x: &str| x.trim().to_lowercase().replace(['_', '-'], " ");
        let wanted = norm(s);
        Metric::ALL
            .into_iter()
            .find(|m| norm(m.key()) == wanted || norm(m.display_name()) == wanted)
            .ok_or_else(|| UnknownMetric(s.to_string()))
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.key())
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Question-level metric values for one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub informativeness: f64,
    pub response_length: u64,
    /// Minutes.
    pub engagement_duration: f64,
    pub empathy_level: f64,
    pub repetition_rate: f64,
    pub hate_speech_rate: f64,
    pub privacy_intrusion_rate: f64,
}

impl MetricVector {
    /// Value of `metric`; `None` for completion rate, which only exists per question.
    pub fn get(&self, metric: Metric) -> Option<f64> {
        Some(match metric {
            Metric::Informativeness => self.informativeness,
            Metric::ResponseLength => self.response_length as f64,
            Metric::EngagementDuration => self.engagement_duration,
            Metric::CompletionRate => return None,
            Metric::EmpathyLevel => self.empathy_level,
            Metric::RepetitionRate => self.repetition_rate,
            Metric::HateSpeechRate => self.hate_speech_rate,
            Metric::PrivacyIntrusionRate => self.privacy_intrusion_rate,
        })
    }

    pub fn compute(seg: &Segment, res: &Resources) -> Self {
        let user_text = seg
            .user_messages()
            .map(|m| m.text.as_str())
            .collect::<Vec<_>>();
        Self {
            informativeness: user_text
                .iter()
                .map(|t| informativeness(t, &res.frequency))
                .sum(),
            response_length: response_length(seg.user_messages()),
            engagement_duration: engagement_duration(seg),
            empathy_level: empathy_level(seg, &res.empathy),
            repetition_rate: repetition_rate(seg),
            hate_speech_rate: hate_speech_rate(seg, &res.offensive),
            privacy_intrusion_rate: privacy_intrusion_rate(seg, &res.pii),
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Sum of min-max normalized word surprisal over the response.
pub fn informativeness(user_text: &str, ft: &FrequencyTable) -> f64 {
    tokenize(user_text)
        .iter()
        .map(|t| ft.normalized_surprisal(t))
        .sum()
}

/// Word count across the given user messages.
pub fn response_length<'a, I: IntoIterator<Item = &'a Message>>(user_messages: I) -> u64 {
    user_messages
        .into_iter()
        .map(|m| tokenize(&m.text).len() as u64)
        .sum()
}

/// Minutes from the first bot message to the last message of the segment.
pub fn engagement_duration(seg: &Segment) -> f64 {
    let Some(start) = seg.bot_messages().next().map(|m| m.timestamp) else {
        return 0.0;
    };
    let end = seg
        .messages
        .iter()
        .map(|m| m.timestamp)
        .fold(start, f64::max);
    ((end - start) / 60.0).max(0.0)
}

/// Share of bot tokens that are empathy-lexicon words.
pub fn empathy_level(seg: &Segment, lex: &EmpathyLexicon) -> f64 {
    let (hits, total) = seg
        .bot_messages()
        .flat_map(|m| tokenize(&m.text))
        .fold((0, 0), |(h, t), tok| {
            (h + usize::from(lex.contains(&tok)), t + 1)
        });
    ratio(hits, total)
}

/// Repeated bot bi-gram occurrences over all bot bi-gram occurrences.
///
/// Bi-grams never span two utterances. Each distinct bi-gram seen `c`
/// times contributes `c - 1` repeats.
pub fn repetition_rate(seg: &Segment) -> f64 {
    let mut counts: HashMap<(String, String), usize> = HashMap::new();
    let mut total = 0;
    for m in seg.bot_messages() {
        let toks = tokenize(&m.text);
        for pair in toks.windows(2) {
            *counts
                .entry((pair[0].clone(), pair[1].clone()))
                .or_default() += 1;
            total += 1;
        }
    }
    let repeated: usize = counts.values().map(|c| c - 1).sum();
    ratio(repeated, total)
}

/// Share of bot utterances containing an offensive term.
pub fn hate_speech_rate(seg: &Segment, lex: &OffensiveLexicon) -> f64 {
    let (flagged, total) = seg.bot_messages().fold((0, 0), |(f, t), m| {
        (f + usize::from(lex.matches(&m.text)), t + 1)
    });
    ratio(flagged, total)
}

/// Detected sensitive entities per user word.
pub fn privacy_intrusion_rate(seg: &Segment, det: &PiiDetectorSet) -> f64 {
    let (entities, words) = seg.user_messages().fold((0, 0), |(e, w), m| {
        (e + det.count(&m.text), w + tokenize(&m.text).len())
    });
    // an entity can outnumber words only with pathological detector patterns
    ratio(entities, words).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentClass {
    Positive,
    Neutral,
    Negative,
}

/// Lexicon score of `text` squashed into `[-1, 1]`.
///
/// A booster directly before a polar word moves its valence away from zero
/// by the booster's increment (toward zero for negative increments); a
/// negation among the three preceding tokens flips its sign.
pub fn sentiment_score(text: &str, lex: &SentimentLexicon) -> f64 {
    let toks = tokenize(text);
    let mut score = 0.0;
    for (i, tok) in toks.iter().enumerate() {
        let Some(&valence) = lex.polarity.get(tok) else {
            continue;
        };
        let mut v = valence;
        if let Some(&inc) = i.checked_sub(1).and_then(|p| lex.boosters.get(&toks[p])) {
            v += inc * v.signum();
        }
        if toks[i.saturating_sub(3)..i]
            .iter()
            .any(|t| lex.negations.contains(t))
        {
            v = -v;
        }
        score += v;
    }
    score / (score * score + 15.0).sqrt()
}

pub fn classify_sentiment(text: &str, lex: &SentimentLexicon) -> SentimentClass {
    let s = sentiment_score(text, lex);
    if s >= 0.05 {
        SentimentClass::Positive
    } else if s <= -0.05 {
        SentimentClass::Negative
    } else {
        SentimentClass::Neutral
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentBreakdown {
    pub positive_frac: f64,
    pub neutral_frac: f64,
    pub negative_frac: f64,
    /// False when there was no feedback to score; the fractions are then 0.
    pub has_feedback: bool,
}

pub fn sentiment_breakdown<S: AsRef<str>>(
    feedback_texts: &[S],
    lex: &SentimentLexicon,
) -> SentimentBreakdown {
    if feedback_texts.is_empty() {
        return SentimentBreakdown::default();
    }
    let mut counts = [0usize; 3];
    for t in feedback_texts {
        let idx = match classify_sentiment(t.as_ref(), lex) {
            SentimentClass::Positive => 0,
            SentimentClass::Neutral => 1,
            SentimentClass::Negative => 2,
        };
        counts[idx] += 1;
    }
    let n = feedback_texts.len() as f64;
    let positive_frac = counts[0] as f64 / n;
    let negative_frac = counts[2] as f64 / n;
    SentimentBreakdown {
        positive_frac,
        // by difference, so the three always sum to exactly 1
        neutral_frac: 1.0 - positive_frac - negative_frac,
        negative_frac,
        has_feedback: true,
    }
}
