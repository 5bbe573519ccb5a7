use std::collections::HashSet;

use regex::Regex;
use serde::Deserialize;

use super::{ResourceError, ResourceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Checksum {
    Luhn,
}

impl Checksum {
    pub fn verify(self, matched: &str) -> bool {
        match self {
            Checksum::Luhn => luhn_valid(matched),
        }
    }
}

/// Luhn check over the digits of `s`, ignoring separators. Requires 13-19 digits.
pub fn luhn_valid(s: &str) -> bool {
    let digits: Vec<u32> = s.chars().filter_map(|c| c.to_digit(10)).collect();
    if !(13..=19).contains(&digits.len()) {
        return false;
    }
    let sum: u32 = digits
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &d)| {
            if i % 2 == 1 {
                let d2 = d * 2;
                if d2 > 9 {
                    d2 - 9
                } else {
                    d2
                }
            } else {
                d
            }
        })
        .sum();
    sum.is_multiple_of(10)
}

#[derive(Debug, Clone)]
pub struct PiiDetector {
    pub name: String,
    pub pattern: Regex,
    pub checksum: Option<Checksum>,
}

/// A detected sensitive entity, as a byte span of the scanned text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiiMatch {
    pub infotype: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PiiDetectorSet {
    detectors: Vec<PiiDetector>,
}

#[derive(Deserialize)]
struct RawDetector {
    name: String,
    regex: String,
    #[serde(default)]
    checksum: Option<Checksum>,
}

impl PiiDetectorSet {
    pub fn new(detectors: Vec<PiiDetector>) -> Result<Self, ResourceError> {
        let mut names = HashSet::new();
        for d in &detectors {
            if !names.insert(d.name.as_str()) {
                return Err(ResourceError::Invalid {
                    kind: ResourceKind::Pii,
                    reason: format!("duplicate infotype {:?}", d.name),
                });
            }
        }
        Ok(Self { detectors })
    }

    /// JSON list of `{"name", "regex", "checksum"?}`.
    pub fn parse(json: &str) -> Result<Self, ResourceError> {
        let raw: Vec<RawDetector> =
            serde_json::from_str(json).map_err(|e| ResourceError::Malformed {
                kind: ResourceKind::Pii,
                line: e.line(),
                reason: e.to_string(),
            })?;
        let detectors = raw
            .into_iter()
            .map(|r| {
                let pattern = Regex::new(&r.regex).map_err(|e| ResourceError::Invalid {
                    kind: ResourceKind::Pii,
                    reason: format!("pattern for {} does not compile: {e}", r.name),
                })?;
                Ok(PiiDetector {
                    name: r.name,
                    pattern,
                    checksum: r.checksum,
                })
            })
            .collect::<Result<Vec<_>, ResourceError>>()?;
        Self::new(detectors)
    }

    pub fn detectors(&self) -> &[PiiDetector] {
        &self.detectors
    }

    /// Non-overlapping entities in `text`. Where detectors overlap, the
    /// earliest-starting, then longest, match wins.
    pub fn find(&self, text: &str) -> Vec<PiiMatch> {
        let mut found: Vec<PiiMatch> = self
            .detectors
            .iter()
            .flat_map(|d| {
                d.pattern
                    .find_iter(text)
                    .filter(|m| d.checksum.is_none_or(|c| c.verify(m.as_str())))
                    .map(|m| PiiMatch {
                        infotype: d.name.clone(),
                        start: m.start(),
                        end: m.end(),
                    })
            })
            .collect();
        found.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));
        let mut kept: Vec<PiiMatch> = Vec::with_capacity(found.len());
        for m in found {
            if kept.last().is_none_or(|k| m.start >= k.end) {
                kept.push(m);
            }
        }
        kept
    }

    pub fn count(&self, text: &str) -> usize {
        self.find(text).len()
    }
}
