//! Finding snippets outside the store and importing them as draft concepts:
//! keyword queries, a local corpus provider, a generic remote search client
//! with rate limiting, and the import step.

mod config;
mod import;
mod local;
mod query;
mod rate;
mod remote;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::StoreError;

pub use config::{load_providers, parse_providers, ProviderConfig, ProviderKind, DEFAULT_MAX_PAGES};
pub use import::{import_candidate, import_candidate_with};
pub use local::search_local;
pub use query::{build_query, MAX_KEYWORDS, STOPWORDS};
pub use rate::{Clock, ManualClock, RateLimiter, SystemClock, WINDOW};
pub use remote::{HttpReply, RemoteClient, Transport, UreqTransport};

/// Most lines an excerpt keeps.
pub const EXCERPT_LINES: usize = 20;

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("the description has no searchable keywords")]
    EmptyQuery,
    #[error("provider `{provider}` is unreachable: {cause}")]
    ProviderUnreachable { provider: String, cause: String },
    #[error("provider `{provider}` is rate limited, retry after {retry_after_secs} s")]
    RateLimited {
        provider: String,
        retry_after_secs: u64,
    },
    #[error("environment variable `{var}` holding the provider token is not set")]
    AuthMissing { var: String },
    #[error("cannot fetch `{locator}`: {cause}")]
    FetchFailed { locator: String, cause: String },
    #[error("invalid provider configuration: {0}")]
    InvalidConfig(String),
    #[error("no provider named `{0}`")]
    UnknownProvider(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl HarvestError {
    pub fn code(&self) -> &'static str {
        match self {
            HarvestError::EmptyQuery => "empty-query",
            HarvestError::ProviderUnreachable { .. } => "provider-unreachable",
            HarvestError::RateLimited { .. } => "rate-limited",
            HarvestError::AuthMissing { .. } => "auth-missing",
            HarvestError::FetchFailed { .. } => "fetch-failed",
            HarvestError::InvalidConfig(_) => "invalid-config",
            HarvestError::UnknownProvider(_) => "unknown-provider",
            HarvestError::Store(e) => e.code(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnippetCandidate {
    pub provider: String,
    /// File path or URL of the full snippet.
    pub locator: String,
    pub title: String,
    pub excerpt: String,
    /// Fraction of query keywords found in the text.
    pub score: f64,
    pub fetched_at: DateTime<Utc>,
}

/// Share of `keywords` occurring in `text`, ignoring case.
pub fn keyword_score(text: &str, keywords: &[String]) -> f64 {
    if keywords.is_empty() {
        return 0.0;
    }
    let folded = text.to_lowercase();
    let hits = keywords
        .iter()
        .filter(|k| folded.contains(&k.to_lowercase()))
        .count();
    hits as f64 / keywords.len() as f64
}

pub fn excerpt(text: &str) -> String {
    text.lines().take(EXCERPT_LINES).collect::<Vec<_>>().join("\n")
}

/// Searches one provider with a fresh client. Remote providers go over
/// HTTP with the system clock.
pub fn search_provider(
    cfg: &ProviderConfig,
    keywords: &[String],
) -> Result<Vec<SnippetCandidate>, HarvestError> {
    cfg.validate()?;
    match cfg.kind {
        ProviderKind::LocalCorpus => search_local(cfg, keywords),
        ProviderKind::RemoteApi => {
            RemoteClient::new(cfg.clone(), UreqTransport::default(), SystemClock::default())
                .search(keywords)
        }
    }
}

/// A set of configured providers. Remote clients persist, so the rate limit
/// holds across searches.
pub struct Harvester {
    providers: Vec<ProviderConfig>,
    remotes: Vec<(String, RemoteClient<UreqTransport, SystemClock>)>,
}

impl Harvester {
    pub fn new(providers: Vec<ProviderConfig>) -> Result<Self, HarvestError> {
        let mut remotes = Vec::new();
        for p in &providers {
            p.validate()?;
            if p.kind == ProviderKind::RemoteApi {
                let client =
                    RemoteClient::new(p.clone(), UreqTransport::default(), SystemClock::default());
                remotes.push((p.name.clone(), client));
            }
        }
        Ok(Harvester { providers, remotes })
    }

    pub fn providers(&self) -> &[ProviderConfig] {
        &self.providers
    }

    pub fn provider(&self, name: &str) -> Result<&ProviderConfig, HarvestError> {
        self.providers
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| HarvestError::UnknownProvider(name.to_string()))
    }

    pub fn search(
        &self,
        provider: &str,
        keywords: &[String],
    ) -> Result<Vec<SnippetCandidate>, HarvestError> {
        let cfg = self.provider(provider)?;
        match cfg.kind {
            ProviderKind::LocalCorpus => search_local(cfg, keywords),
            ProviderKind::RemoteApi => self
                .remotes
                .iter()
                .find(|(n, _)| n == provider)
                .expect("every remote provider has a client")
                .1
                .search(keywords),
        }
    }
}
