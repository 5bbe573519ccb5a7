//! End-to-end run: segment, score, aggregate, suggest and attach evidence.

use crate::config::InterviewConfig;
use crate::evidence::extract_for_flag;
use crate::profile::profile_corpus;
use crate::report::{ReportDocument, SCHEMA_VERSION};
use crate::resources::Resources;
use crate::suggest::{generate_suggestions, GuidelineCatalog};
use crate::transcript::Session;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    /// The profile only.
    Profile,
    /// The profile plus suggestions with evidence.
    Suggestions,
}

/// Builds the report document for a parsed corpus.
///
/// `warnings` holds diagnostics from earlier stages, such as resource
/// loading; they are carried into the document ahead of new ones.
pub fn run(
    corpus: &[Session],
    cfg: &InterviewConfig,
    res: &Resources,
    catalog: &GuidelineCatalog,
    output: Output,
    mut warnings: Vec<String>,
) -> Result<ReportDocument, Error> {
    let run = profile_corpus(corpus, cfg, res)?;
    warnings.extend(run.warnings);

    let suggestions = (output == Output::Suggestions).then(|| {
        let mut suggestions = generate_suggestions(&run.profile, catalog);
        for flag in &run.profile.flags {
            let bundle = extract_for_flag(
                flag,
                &run.segments,
                &run.profile.thresholds,
                &res.embeddings,
                cfg.max_evidence_per_suggestion,
                cfg.rng_seed,
            );
            for s in suggestions
                .iter_mut()
                .filter(|s| s.question_id == flag.question_id && s.metric == flag.metric)
            {
                s.evidence = bundle.clone();
            }
        }
        suggestions
    });

    let generated_at = corpus
        .iter()
        .filter_map(Session::last_timestamp)
        .fold(0.0, f64::max);

    Ok(ReportDocument {
        schema_version: SCHEMA_VERSION.into(),
        generated_at,
        config: cfg.clone(),
        profile: run.profile,
        suggestions,
        warnings,
    })
}
