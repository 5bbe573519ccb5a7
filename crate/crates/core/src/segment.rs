//! Splits a session into per-question segments and pulls post-interview ratings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::InterviewConfig;
use crate::text::{normalize_question, similarity_at_least, similarity_bound, tokenize};
use crate::transcript::{Message, Session};

/// The part of one session attributable to a single interview question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub question_id: u32,
    /// Bot and user messages in session order.
    pub messages: Vec<Message>,
    /// The session went on to a later question or reached the post-interview phase.
    pub advanced: bool,
}

impl Segment {
    pub fn bot_messages(&self) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(|m| m.is_bot())
    }

    pub fn user_messages(&self) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(|m| m.is_user())
    }

    pub fn has_user_response(&self) -> bool {
        self.user_messages().next().is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentedSession {
    /// Interview-question segments ordered by question id.
    pub segments: Vec<Segment>,
    pub warnings: Vec<String>,
}

/// All question groups of a session, rating questions included.
struct Split {
    groups: BTreeMap<u32, Vec<Message>>,
    post_interview: bool,
    warnings: Vec<String>,
}

/// The most similar question at or above `threshold`; ties go to the lower id.
fn best_match(text: &str, questions: &[(u32, String)], threshold: f64) -> Option<u32> {
    let text = normalize_question(text);
    let mut best: Option<(u32, f64)> = None;
    for (id, q) in questions {
        if similarity_bound(&text, q) < threshold {
            continue;
        }
        if let Some(sim) = similarity_at_least(&text, q, threshold) {
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((*id, sim));
            }
        }
    }
    best.map(|(q, _)| q)
}

fn split(session: &Session, cfg: &InterviewConfig) -> Split {
    let n_questions = cfg.questions.len() as u32;
    let explicit = session.messages.iter().any(|m| m.question_id.is_some());
    let mut groups: BTreeMap<u32, Vec<Message>> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut post_interview = false;
    let mut current: Option<u32> = None;
    let mut highest = 0;
    let questions: Vec<(u32, String)> = cfg
        .questions
        .iter()
        .map(|q| (q.question_id, normalize_question(&q.canonical_text)))
        .collect();

    for m in &session.messages {
        let opened = if explicit {
            m.question_id
        } else if m.is_bot() {
            best_match(&m.text, &questions, cfg.fuzzy_match_threshold)
        } else {
            None
        };

        if let Some(q) = opened {
            if q > n_questions {
                // tagged beyond the question list: treated as post-interview chatter
                post_interview = true;
                current = None;
                continue;
            }
            if Some(q) != current {
                if groups.contains_key(&q) {
                    warnings.push(format!(
                        "session {}: question {q} asked again after question {}",
                        session.session_id,
                        current.map_or_else(|| "?".to_string(), |c| c.to_string())
                    ));
                } else if q < highest {
                    warnings.push(format!(
                        "session {}: question {q} asked after question {highest}",
                        session.session_id
                    ));
                }
                highest = highest.max(q);
                current = Some(q);
            }
        }

        match current {
            Some(q) => {
                let mut m = m.clone();
                m.question_id = Some(q);
                groups.entry(q).or_default().push(m);
            }
            None if highest > 0 => post_interview = true,
            None => {} // pre-interview greeting
        }
    }

    // a question that was never asked by the bot has no segment
    groups.retain(|q, msgs| {
        let asked = msgs.iter().any(Message::is_bot);
        if !asked {
            warnings.push(format!(
                "session {}: question {q} has user messages but no bot message; dropped",
                session.session_id
            ));
        }
        asked
    });
    if groups.keys().any(|&q| cfg.is_rating_question(q)) {
        post_interview = true;
    }

    Split {
        groups,
        post_interview,
        warnings,
    }
}

/// Segments a session by interview question.
///
/// Messages carrying `question_id` are grouped by it. Otherwise each bot
/// message whose text fuzzy-matches a configured question opens that
/// question's segment, which then runs until the next opening message.
/// Rating questions delimit the interview but yield no segments.
pub fn segment_session(session: &Session, cfg: &InterviewConfig) -> SegmentedSession {
    let Split {
        groups,
        post_interview,
        warnings,
    } = split(session, cfg);
    let last = cfg.last_interview_question();
    let interview: Vec<u32> = groups
        .keys()
        .copied()
        .filter(|&q| !cfg.is_rating_question(q))
        .collect();

    let segments = groups
        .into_iter()
        .filter(|(q, _)| !cfg.is_rating_question(*q))
        .map(|(question_id, messages)| {
            let later = interview.iter().any(|&q| q > question_id);
            Segment {
                question_id,
                messages,
                advanced: later || (question_id == last && post_interview),
            }
        })
        .collect();

    SegmentedSession { segments, warnings }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ratings {
    pub satisfaction: Option<u8>,
    pub trust: Option<u8>,
    pub feedback_texts: Vec<String>,
    pub warnings: Vec<String>,
}

/// First integer token of `text`: `Ok(Some)` when it lies in 1..=5,
/// `Err` with the token when it lies outside.
fn first_rating_token(text: &str) -> Result<Option<u8>, String> {
    let Some(tok) = tokenize(text)
        .into_iter()
        .find(|t| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()))
    else {
        return Ok(None);
    };
    match tok.parse::<u64>() {
        Ok(v @ 1..=5) => Ok(Some(v as u8)),
        _ => Err(tok),
    }
}

/// Satisfaction, trust and free-text rationale for one session.
///
/// Values already carried by the session win; otherwise they are parsed
/// from the user replies to the designated rating questions.
pub fn extract_ratings(session: &Session, cfg: &InterviewConfig) -> Ratings {
    let mut out = Ratings {
        satisfaction: session.satisfaction_rating,
        trust: session.trust_rating,
        feedback_texts: session.feedback_texts.clone(),
        warnings: Vec::new(),
    };
    let Some(rq) = &cfg.rating_question_ids else {
        return out;
    };
    let needs_parse =
        out.satisfaction.is_none() || out.trust.is_none() || out.feedback_texts.is_empty();
    if !needs_parse {
        return out;
    }

    let groups = split(session, cfg).groups;
    let replies = |q: Option<u32>| -> Vec<&str> {
        q.and_then(|q| groups.get(&q))
            .map(|msgs| {
                msgs.iter()
                    .filter(|m| m.is_user())
                    .map(|m| m.text.as_str())
                    .collect()
            })
            .unwrap_or_default()
    };

    let parse_rating = |label: &str, q: Option<u32>, warnings: &mut Vec<String>| {
        for reply in replies(q) {
            match first_rating_token(reply) {
                Ok(Some(v)) => return Some(v),
                Ok(None) => continue,
                Err(tok) => {
                    warnings.push(format!(
                        "session {}: {label} rating {tok} is outside 1..=5; ignored",
                        session.session_id
                    ));
                    return None;
                }
            }
        }
        None
    };

    if out.satisfaction.is_none() {
        out.satisfaction = parse_rating("satisfaction", rq.satisfaction, &mut out.warnings);
    }
    if out.trust.is_none() {
        out.trust = parse_rating("trust", rq.trust, &mut out.warnings);
    }
    if out.feedback_texts.is_empty() {
        for &q in &rq.rationale {
            let joined = replies(Some(q)).join(" ");
            if !joined.trim().is_empty() {
                out.feedback_texts.push(joined);
            }
        }
    }
    out
}
