use std::collections::HashMap;

use super::{ResourceError, ResourceKind};

/// Word vectors in the whitespace-separated GloVe text format.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(
        dimension: usize,
        vectors: HashMap<String, Vec<f64>>,
    ) -> Result<Self, ResourceError> {
        if dimension == 0 {
            return Err(ResourceError::Invalid {
                kind: ResourceKind::Embeddings,
                reason: "dimension must be positive".into(),
            });
        }
        if let Some((word, _)) = vectors
            .iter()
            .find(|(_, v)| v.len() != dimension || v.iter().any(|x| !x.is_finite()))
        {
            return Err(ResourceError::Invalid {
                kind: ResourceKind::Embeddings,
                reason: format!("vector for {word:?} is not {dimension} finite components"),
            });
        }
        Ok(Self { dimension, vectors })
    }

    /// `token v1 v2 ... vd` per line; the first row fixes `d`.
    pub fn parse(text: &str, warnings: &mut Vec<String>) -> Result<Self, ResourceError> {
        let mut dimension = 0;
        let mut vectors = HashMap::new();
        let mut duplicates = 0;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let malformed = |reason: String| ResourceError::Malformed {
                kind: ResourceKind::Embeddings,
                line: line_no,
                reason,
            };
            let values = fields
                .map(|f| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| malformed(format!("component {f:?} is not a finite number")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if dimension == 0 {
                if values.is_empty() {
                    return Err(malformed("row has no components".into()));
                }
                dimension = values.len();
            } else if values.len() != dimension {
                return Err(malformed(format!(
                    "expected {dimension} components, found {}",
                    values.len()
                )));
            }
            if vectors.insert(token.to_lowercase(), values).is_some() {
                duplicates += 1;
            }
        }
        if vectors.is_empty() {
            return Err(ResourceError::Empty(ResourceKind::Embeddings));
        }
        if duplicates > 0 {
            warnings.push(format!(
                "embeddings: {duplicates} duplicate rows; last row kept"
            ));
        }
        Ok(Self { dimension, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}
