//! Static language resources: word frequencies, lexicons, PII detectors
//! and word embeddings.
//!
//! Every resource has a bundled default compiled into the crate, so the
//! toolchain works without any files on disk. Each one can be replaced by
//! a file in the same format.

mod embedding;
mod frequency;
mod lexicon;
mod pii;

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use embedding::EmbeddingTable;
pub use frequency::FrequencyTable;
pub use lexicon::{EmpathyLexicon, OffensiveLexicon, SentimentLexicon};
pub use pii::{luhn_valid, Checksum, PiiDetector, PiiDetectorSet, PiiMatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceKind {
    Frequency,
    Empathy,
    Sentiment,
    Offensive,
    Pii,
    Embeddings,
}

impl ResourceKind {
    /// File name used inside a resource directory.
    pub fn file_name(self) -> &'static str {
        match self {
            ResourceKind::Frequency => "frequency.tsv",
            ResourceKind::Empathy => "empathy.txt",
            ResourceKind::Sentiment => "sentiment.txt",
            ResourceKind::Offensive => "offensive.txt",
            ResourceKind::Pii => "pii_detectors.json",
            ResourceKind::Embeddings => "embeddings.txt",
        }
    }

    fn bundled(self) -> &'static str {
        match self {
            ResourceKind::Frequency => include_str!("../../resources/frequency.tsv"),
            ResourceKind::Empathy => include_str!("../../resources/empathy.txt"),
            ResourceKind::Sentiment => include_str!("../../resources/sentiment.txt"),
            ResourceKind::Offensive => include_str!("../../resources/offensive.txt"),
            ResourceKind::Pii => include_str!("../../resources/pii_detectors.json"),
            ResourceKind::Embeddings => include_str!("../../resources/embeddings.txt"),
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResourceKind::Frequency => "frequency table",
            ResourceKind::Empathy => "empathy lexicon",
            ResourceKind::Sentiment => "sentiment lexicon",
            ResourceKind::Offensive => "offensive lexicon",
            ResourceKind::Pii => "PII detectors",
            ResourceKind::Embeddings => "embeddings",
        })
    }
}

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("failed to read {kind} from {path}: {source}")]
    Io {
        kind: ResourceKind,
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{kind}, line {line}: {reason}")]
    Malformed {
        kind: ResourceKind,
        line: usize,
        reason: String,
    },
    #[error("{0} is empty")]
    Empty(ResourceKind),
    #[error("invalid {kind}: {reason}")]
    Invalid { kind: ResourceKind, reason: String },
}

/// A loaded lexicon-style resource.
#[derive(Debug, Clone)]
pub enum Lexicon {
    Empathy(EmpathyLexicon),
    Sentiment(SentimentLexicon),
    Offensive(OffensiveLexicon),
    Pii(PiiDetectorSet),
}

fn read(path: &Path, kind: ResourceKind) -> Result<String, ResourceError> {
    std::fs::read_to_string(path).map_err(|source| ResourceError::Io {
        kind,
        path: path.display().to_string(),
        source,
    })
}

fn parse_lexicon(
    text: &str,
    kind: ResourceKind,
    warnings: &mut Vec<String>,
) -> Result<Lexicon, ResourceError> {
    Ok(match kind {
        ResourceKind::Empathy => Lexicon::Empathy(EmpathyLexicon::parse(text, warnings)?),
        ResourceKind::Sentiment => Lexicon::Sentiment(SentimentLexicon::parse(text, warnings)?),
        ResourceKind::Offensive => Lexicon::Offensive(OffensiveLexicon::parse(text, warnings)?),
        ResourceKind::Pii => Lexicon::Pii(PiiDetectorSet::parse(text)?),
        ResourceKind::Frequency | ResourceKind::Embeddings => {
            return Err(ResourceError::Invalid {
                kind,
                reason: "not a lexicon kind".into(),
            })
        }
    })
}

pub fn load_frequency_table(
    path: &Path,
    warnings: &mut Vec<String>,
) -> Result<FrequencyTable, ResourceError> {
    FrequencyTable::parse(&read(path, ResourceKind::Frequency)?, warnings)
}

pub fn load_embeddings(
    path: &Path,
    warnings: &mut Vec<String>,
) -> Result<EmbeddingTable, ResourceError> {
    EmbeddingTable::parse(&read(path, ResourceKind::Embeddings)?, warnings)
}

pub fn load_lexicon(
    path: &Path,
    kind: ResourceKind,
    warnings: &mut Vec<String>,
) -> Result<Lexicon, ResourceError> {
    parse_lexicon(&read(path, kind)?, kind, warnings)
}

/// Optional per-resource file overrides plus an optional directory that
/// holds files under their default names.
#[derive(Debug, Clone, Default)]
pub struct ResourcePaths {
    pub dir: Option<PathBuf>,
    pub frequency: Option<PathBuf>,
    pub empathy: Option<PathBuf>,
    pub sentiment: Option<PathBuf>,
    pub offensive: Option<PathBuf>,
    pub pii: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
}

impl ResourcePaths {
    /// Explicit path first, then the directory's file if it exists.
    fn resolve(&self, kind: ResourceKind) -> Option<PathBuf> {
        let explicit = match kind {
            ResourceKind::Frequency => &self.frequency,
            ResourceKind::Empathy => &self.empathy,
            ResourceKind::Sentiment => &self.sentiment,
            ResourceKind::Offensive => &self.offensive,
            ResourceKind::Pii => &self.pii,
            ResourceKind::Embeddings => &self.embeddings,
        };
        explicit.clone().or_else(|| {
            self.dir
                .as_ref()
                .map(|d| d.join(kind.file_name()))
                .filter(|p| p.is_file())
        })
    }
}

/// Everything the metric and evidence code needs, immutable once loaded.
#[derive(Debug, Clone)]
pub struct Resources {
    pub frequency: FrequencyTable,
    pub empathy: EmpathyLexicon,
    pub sentiment: SentimentLexicon,
    pub offensive: OffensiveLexicon,
    pub pii: PiiDetectorSet,
    pub embeddings: EmbeddingTable,
}

impl Resources {
    /// The resources compiled into the crate.
    pub fn bundled() -> Self {
        Self::load(&ResourcePaths::default(), &mut Vec::new()).expect("bundled resources are valid")
    }

    pub fn load(paths: &ResourcePaths, warnings: &mut Vec<String>) -> Result<Self, ResourceError> {
        let text = |kind| -> Result<std::borrow::Cow<'static, str>, ResourceError> {
            match paths.resolve(kind) {
                Some(p) => read(&p, kind).map(Into::into),
                None => Ok(kind.bundled().into()),
            }
        };
        let lexicon =
            |kind, warnings: &mut Vec<String>| parse_lexicon(&text(kind)?, kind, warnings);

        let Lexicon::Empathy(empathy) = lexicon(ResourceKind::Empathy, warnings)? else {
            unreachable!()
        };
        let Lexicon::Sentiment(sentiment) = lexicon(ResourceKind::Sentiment, warnings)? else {
            unreachable!()
        };
        let Lexicon::Offensive(offensive) = lexicon(ResourceKind::Offensive, warnings)? else {
            unreachable!()
        };
        let Lexicon::Pii(pii) = lexicon(ResourceKind::Pii, warnings)? else {
            unreachable!()
        };
        Ok(Self {
            frequency: FrequencyTable::parse(&text(ResourceKind::Frequency)?, warnings)?,
            empathy,
            sentiment,
            offensive,
            pii,
            embeddings: EmbeddingTable::parse(&text(ResourceKind::Embeddings)?, warnings)?,
        })
    }
}
