use std::collections::HashMap;

use super::{ResourceError, ResourceKind};

/// Word counts from a reference corpus, used for surprisal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total: u64,
    min_surprisal: f64,
    max_surprisal: f64,
}

impl FrequencyTable {
    /// Builds a table from `(token, count)` pairs. Tokens are lowercased and
    /// duplicate entries summed.
    pub fn from_counts<I, S>(entries: I) -> Result<Self, ResourceError>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for (token, count) in entries {
            if count == 0 {
                return Err(ResourceError::Malformed {
                    kind: ResourceKind::Frequency,
                    line: 0,
                    reason: format!("count for {:?} must be positive", token.as_ref()),
                });
            }
            *counts.entry(token.as_ref().to_lowercase()).or_default() += count;
        }
        if counts.is_empty() {
            return Err(ResourceError::Empty(ResourceKind::Frequency));
        }
        let total: u64 = counts.values().sum();
        let max_count = *counts.values().max().unwrap();
        let min_count = *counts.values().min().unwrap();
        Ok(Self {
            min_surprisal: surprisal_of(max_count, total),
            max_surprisal: surprisal_of(min_count, total),
            counts,
            total,
        })
    }

    /// Parses the `token<TAB>count` format.
    pub fn parse(text: &str, warnings: &mut Vec<String>) -> Result<Self, ResourceError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| ResourceError::Malformed {
                kind: ResourceKind::Frequency,
                line: line_no,
                reason,
            };
            let (token, count) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected token<TAB>count".into()))?;
            let count: i64 = count
                .trim()
                .parse()
                .map_err(|_| malformed(format!("count {:?} is not an integer", count.trim())))?;
            if count <= 0 {
                return Err(malformed(format!("count {count} must be positive")));
            }
            let token = token.trim();
            if token.is_empty() {
                return Err(malformed("empty token".into()));
            }
            entries.push((token.to_string(), count as u64));
        }
        let distinct = entries.len();
        let table = Self::from_counts(entries)?;
        if table.counts.len() < distinct {
            warnings.push(format!(
                "frequency table: {} duplicate tokens merged",
                distinct - table.counts.len()
            ));
        }
        if table.max_surprisal == table.min_surprisal {
            warnings.push(
                "frequency table: every token has the same count; normalized surprisal is 0".into(),
            );
        }
        Ok(table)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, token: &str) -> Option<u64> {
        self.counts.get(token).copied()
    }

    pub fn min_surprisal(&self) -> f64 {
        self.min_surprisal
    }

    pub fn max_surprisal(&self) -> f64 {
        self.max_surprisal
    }

    /// `-log2(count / total)`; out-of-vocabulary tokens get the maximum.
    pub fn surprisal(&self, token: &str) -> f64 {
        match self.counts.get(token) {
            Some(&c) => surprisal_of(c, self.total),
            None => self.max_surprisal,
        }
    }

    /// Surprisal min-max scaled into `[0, 1]`; 0 for a degenerate vocabulary.
    pub fn normalized_surprisal(&self, token: &str) -> f64 {
        let span = self.max_surprisal - self.min_surprisal;
        if span <= 0.0 {
            return 0.0;
        }
        ((self.surprisal(token) - self.min_surprisal) / span).clamp(0.0, 1.0)
    }
}

fn surprisal_of(count: u64, total: u64) -> f64 {
    -(count as f64 / total as f64).log2()
}
