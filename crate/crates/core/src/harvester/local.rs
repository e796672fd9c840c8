use std::path::Path;

use chrono::{DateTime, Utc};
use walkdir::WalkDir;

use super::{excerpt, keyword_score, HarvestError, ProviderConfig, SnippetCandidate};

/// Scores every UTF-8 file under the provider's directory. Results with a
/// positive score come back best first, ties by path. `fetched_at` is the
/// file's modification time, so the result depends only on the directory.
pub fn search_local(
    cfg: &ProviderConfig,
    keywords: &[String],
) -> Result<Vec<SnippetCandidate>, HarvestError> {
    let root = Path::new(&cfg.base);
    let mut out = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| HarvestError::ProviderUnreachable {
            provider: cfg.name.clone(),
            cause: e.to_string(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let Ok(text) = std::fs::read_to_string(entry.path()) else {
            continue;
        };
        let score = keyword_score(&text, keywords);
        if score <= 0.0 {
            continue;
        }
        let modified = entry
            .metadata()
            .ok()
            .and_then(|m| m.modified().ok())
            .map(DateTime::<Utc>::from)
            .unwrap_or(DateTime::UNIX_EPOCH);
        let title = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .display()
            .to_string();
        out.push(SnippetCandidate {
            provider: cfg.name.clone(),
            locator: entry.path().display().to_string(),
            title,
            excerpt: excerpt(&text),
            score,
            fetched_at: modified,
        });
    }
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.locator.cmp(&b.locator)));
    Ok(out)
}
