//! Transcript data model and the JSONL wire format.
//!
//! One session per line:
//!
//! ```text
//! {"session_id": "s1", "messages": [{"role": "bot", "text": "...", "timestamp": 0.0, "question_id": 1}],
//!  "satisfaction_rating": 4, "trust_rating": 5, "feedback_texts": ["..."]}
//! ```
//!
//! Unknown fields are ignored.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Bot,
    User,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Bot => "bot",
            Role::User => "user",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
    /// Seconds since the epoch.
    pub timestamp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<u32>,
}

impl Message {
    pub fn new(role: Role, text: impl Into<String>, timestamp: f64) -> Self {
        Self {
            role,
            text: text.into(),
            timestamp,
            question_id: None,
        }
    }

    pub fn bot(text: impl Into<String>, timestamp: f64) -> Self {
        Self::new(Role::Bot, text, timestamp)
    }

    pub fn user(text: impl Into<String>, timestamp: f64) -> Self {
        Self::new(Role::User, text, timestamp)
    }

    pub fn with_question(mut self, question_id: u32) -> Self {
        self.question_id = Some(question_id);
        self
    }

    pub fn is_bot(&self) -> bool {
        self.role == Role::Bot
    }

    pub fn is_user(&self) -> bool {
        self.role == Role::User
    }
}

/// One user's chat log with the interview chatbot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub messages: Vec<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfaction_rating: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trust_rating: Option<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feedback_texts: Vec<String>,
}

impl Session {
    pub fn new(session_id: impl Into<String>, messages: Vec<Message>) -> Self {
        Self {
            session_id: session_id.into(),
            messages,
            satisfaction_rating: None,
            trust_rating: None,
            feedback_texts: Vec::new(),
        }
    }

    /// Latest message timestamp, if any.
    pub fn last_timestamp(&self) -> Option<f64> {
        self.messages.iter().map(|m| m.timestamp).reduce(f64::max)
    }
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: malformed JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(
        "line {line}: message {index} has invalid role {role:?} (expected \"bot\" or \"user\")"
    )]
    InvalidRole {
        line: usize,
        index: usize,
        role: String,
    },
    #[error("line {line}: message {index}: {reason}")]
    InvalidMessage {
        line: usize,
        index: usize,
        reason: String,
    },
    #[error("line {line}: {field} {value} is outside 1..=5")]
    InvalidRating {
        line: usize,
        field: &'static str,
        value: i64,
    },
    #[error("line {line}: duplicate session_id {session_id:?}")]
    DuplicateSession { line: usize, session_id: String },
    #[error("line {line}: input is not valid UTF-8")]
    Encoding { line: usize },
    #[error("failed to read transcripts: {0}")]
    Io(#[from] std::io::Error),
}

impl TranscriptError {
    /// 1-based input line the error refers to, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            TranscriptError::Json { line, .. }
            | TranscriptError::InvalidRole { line, .. }
            | TranscriptError::InvalidMessage { line, .. }
            | TranscriptError::InvalidRating { line, .. }
            | TranscriptError::DuplicateSession { line, .. }
            | TranscriptError::Encoding { line } => Some(*line),
            TranscriptError::Io(_) => None,
        }
    }
}

// Wire shapes: role and ratings are kept loose so validation can name the
// offending value instead of surfacing a generic serde message.
#[derive(Deserialize)]
struct RawMessage {
    role: String,
    text: String,
    timestamp: f64,
    #[serde(default)]
    question_id: Option<i64>,
}

#[derive(Deserialize)]
struct RawSession {
    session_id: String,
    messages: Vec<RawMessage>,
    #[serde(default)]
    satisfaction_rating: Option<i64>,
    #[serde(default)]
    trust_rating: Option<i64>,
    #[serde(default)]
    feedback_texts: Option<Vec<String>>,
}

fn rating(
    line: usize,
    field: &'static str,
    value: Option<i64>,
) -> Result<Option<u8>, TranscriptError> {
    match value {
        None => Ok(None),
        Some(v @ 1..=5) => Ok(Some(v as u8)),
        Some(value) => Err(TranscriptError::InvalidRating { line, field, value }),
    }
}

/// Parses and validates a single JSONL line.
pub fn parse_session_line(line_no: usize, line: &str) -> Result<Session, TranscriptError> {
    let raw: RawSession = serde_json::from_str(line).map_err(|source| TranscriptError::Json {
        line: line_no,
        source,
    })?;

    let mut messages = Vec::with_capacity(raw.messages.len());
    for (index, m) in raw.messages.into_iter().enumerate() {
        let role = match m.role.as_str() {
            "bot" => Role::Bot,
            "user" => Role::User,
            _ => {
                return Err(TranscriptError::InvalidRole {
                    line: line_no,
                    index,
                    role: m.role,
                })
            }
        };
        if !m.timestamp.is_finite() || m.timestamp < 0.0 {
            return Err(TranscriptError::InvalidMessage {
                line: line_no,
                index,
                reason: format!("timestamp {} must be finite and non-negative", m.timestamp),
            });
        }
        let question_id = match m.question_id {
            None => None,
            Some(q) if q >= 1 && q <= i64::from(u32::MAX) => Some(q as u32),
            Some(q) => {
                return Err(TranscriptError::InvalidMessage {
                    line: line_no,
                    index,
                    reason: format!("question_id {q} must be >= 1"),
                })
            }
        };
        messages.push(Message {
            role,
            text: m.text,
            timestamp: m.timestamp,
            question_id,
        });
    }
    // stable: equal timestamps keep file order
    messages.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));

    Ok(Session {
        session_id: raw.session_id,
        messages,
        satisfaction_rating: rating(line_no, "satisfaction_rating", raw.satisfaction_rating)?,
        trust_rating: rating(line_no, "trust_rating", raw.trust_rating)?,
        feedback_texts: raw.feedback_texts.unwrap_or_default(),
    })
}

/// Parses every line, collecting all errors instead of stopping at the first.
///
/// Blank lines are skipped but still counted for line numbering.
pub fn validate_corpus<R: BufRead>(mut input: R) -> (Vec<Session>, Vec<TranscriptError>) {
    let mut sessions = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    let mut buf = Vec::new();
    let mut line_no = 0;

    loop {
        buf.clear();
        match input.read_until(b'\n', &mut buf) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                errors.push(TranscriptError::Io(e));
                break;
            }
        }
        line_no += 1;
        let Ok(line) = std::str::from_utf8(&buf) else {
            errors.push(TranscriptError::Encoding { line: line_no });
            continue;
        };
        if line.trim().is_empty() {
            continue;
        }
        match parse_session_line(line_no, line) {
            Ok(session) => {
                if seen.insert(session.session_id.clone()) {
                    sessions.push(session);
                } else {
                    errors.push(TranscriptError::DuplicateSession {
                        line: line_no,
                        session_id: session.session_id,
                    });
                }
            }
            Err(e) => errors.push(e),
        }
    }
    (sessions, errors)
}

/// Parses a JSONL corpus, failing on the first invalid line.
pub fn parse_corpus<R: BufRead>(input: R) -> Result<Vec<Session>, TranscriptError> {
    let (sessions, errors) = validate_corpus(input);
    match errors.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(sessions),
    }
}

/// Writes sessions back in the JSONL wire format.
pub fn write_corpus<W: Write>(sessions: &[Session], mut out: W) -> std::io::Result<()> {
    for s in sessions {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
