//! Canonical JSON and static HTML output.

mod html;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::config::InterviewConfig;
use crate::profile::ChatbotProfile;
use crate::suggest::Suggestion;

pub use html::emit_html;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    /// Latest message timestamp in the corpus, in seconds since the epoch.
    pub generated_at: f64,
    pub config: InterviewConfig,
    pub profile: ChatbotProfile,
    /// Absent for profile-only output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestions: Option<Vec<Suggestion>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("non-finite number at {0}")]
    NonFinite(String),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Every `Option` in the document is skipped when empty, so a null in the
/// value tree can only come from a NaN or infinite float.
fn find_null(v: &Value, path: &mut String) -> bool {
    match v {
        Value::Null => true,
        Value::Array(items) => items.iter().enumerate().any(|(i, x)| {
            let len = path.len();
            path.push_str(&format!("[{i}]"));
            let found = find_null(x, path);
            if !found {
                path.truncate(len);
            }
            found
        }),
        Value::Object(map) => map.iter().any(|(k, x)| {
            let len = path.len();
            path.push('.');
            path.push_str(k);
            let found = find_null(x, path);
            if !found {
                path.truncate(len);
            }
            found
        }),
        _ => false,
    }
}

/// Pretty-printed JSON with sorted keys and shortest round-trip floats,
/// ending in a newline.
pub fn emit_json(doc: &ReportDocument) -> Result<Vec<u8>, ReportError> {
    let value = serde_json::to_value(doc)?;
    let mut path = String::from("$");
    if find_null(&value, &mut path) {
        return Err(ReportError::NonFinite(path));
    }
    let mut out = serde_json::to_vec_pretty(&value)?;
    out.push(b'\n');
    Ok(out)
}
