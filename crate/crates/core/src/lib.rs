//! Profiles interview chatbots from their transcripts.
//!
//! Transcripts are split into per-question segments, scored on a fixed set
//! of conversation quality metrics, aggregated into a chatbot profile and
//! compared against thresholds taken from the opening question. Flagged
//! questions get template design suggestions backed by clustered evidence
//! excerpts. Results are emitted as canonical JSON and a static HTML report.

pub mod config;
pub mod evidence;
pub mod metrics;
pub mod pipeline;
pub mod profile;
pub mod report;
pub mod resources;
pub mod segment;
pub mod suggest;
pub mod text;
pub mod transcript;

use thiserror::Error;

pub use config::{ConfigError, InterviewConfig, Question, RatingQuestions};
pub use evidence::{EvidenceBundle, SegmentRef};
pub use metrics::{Metric, MetricVector, SentimentBreakdown};
pub use profile::{
    aggregate, derive_thresholds, profile_corpus, ChatbotProfile, Flag, ProfileError,
};
pub use report::{emit_html, emit_json, ReportDocument, ReportError};
pub use resources::{ResourceError, ResourcePaths, Resources};
pub use segment::{segment_session, Segment, SegmentedSession};
pub use suggest::{generate_suggestions, CatalogError, GuidelineCatalog, Suggestion};
pub use transcript::{Message, Role, Session, TranscriptError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True when the error stems from bad input rather than a broken invariant.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Report(_))
    }
}
