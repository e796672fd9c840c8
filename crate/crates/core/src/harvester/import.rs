use std::path::Path;

use crate::store::{Concept, ConceptKind, Store};

use super::{HarvestError, SnippetCandidate, Transport, UreqTransport};

/// Adds `draft` to the store with a provenance note. A terminal draft
/// without a snippet takes the text behind the candidate's locator.
pub fn import_candidate(
    store: &mut Store,
    cand: &SnippetCandidate,
    draft: Concept,
) -> Result<(), HarvestError> {
    import_candidate_with(store, cand, draft, &UreqTransport::default())
}

pub fn import_candidate_with(
    store: &mut Store,
    cand: &SnippetCandidate,
    mut draft: Concept,
    transport: &dyn Transport,
) -> Result<(), HarvestError> {
    if draft.kind == ConceptKind::Terminal && draft.snippet.is_none() {
        draft.snippet = Some(fetch(&cand.locator, transport)?);
    }
    let note = format!(
        "harvested from {} at {}",
        cand.locator,
        cand.fetched_at.to_rfc3339()
    );
    let notes = &mut draft.annotation.curation.notes;
    if !notes.is_empty() {
        notes.push('\n');
    }
    notes.push_str(&note);
    store.add_concept(draft)?;
    Ok(())
}

fn fetch(locator: &str, transport: &dyn Transport) -> Result<String, HarvestError> {
    let failed = |cause: String| HarvestError::FetchFailed {
        locator: locator.to_string(),
        cause,
    };
    if locator.starts_with("http://") || locator.starts_with("https://") {
        let reply = transport.get(locator, &[], None).map_err(failed)?;
        if !(200..300).contains(&reply.status) {
            return Err(failed(format!("HTTP {}", reply.status)));
        }
        Ok(reply.body)
    } else {
        std::fs::read_to_string(Path::new(locator)).map_err(|e| failed(e.to_string()))
    }
}
