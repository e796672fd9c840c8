use std::sync::Mutex;
use std::time::Duration;

use chrono::Utc;
use serde::Deserialize;

use super::{
    excerpt, keyword_score, Clock, HarvestError, ProviderConfig, RateLimiter, SnippetCandidate,
};

/// What the client needs from an HTTP response.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub retry_after: Option<u64>,
    pub body: String,
}

/// A blocking HTTP GET. Errors are transport failures; HTTP error statuses
/// come back as replies.
pub trait Transport: Send + Sync {
    fn get(
        &self,
        url: &str,
        query: &[(String, String)],
        bearer: Option<&str>,
    ) -> Result<HttpReply, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl Default for UreqTransport {
    fn default() -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(20)))
            .build();
        UreqTransport {
            agent: ureq::Agent::new_with_config(config),
        }
    }
}

impl Transport for UreqTransport {
    fn get(
        &self,
        url: &str,
        query: &[(String, String)],
        bearer: Option<&str>,
    ) -> Result<HttpReply, String> {
        let mut req = self.agent.get(url);
        for (k, v) in query {
            req = req.query(k, v);
        }
        if let Some(token) = bearer {
            req = req.header("authorization", format!("Bearer {token}"));
        }
        let mut resp = req.call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse().ok());
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpReply {
            status,
            retry_after,
            body,
        })
    }
}

#[derive(Deserialize)]
struct Page {
    items: Vec<Item>,
}

#[derive(Deserialize)]
struct Item {
    title: String,
    #[serde(alias = "url")]
    path: String,
    #[serde(default)]
    text: String,
}

/// Client for a generic code search endpoint:
/// `GET base?q=<keywords>&page=<n>&per_page=<m>` answering
/// `{"items": [{"title", "path" or "url", "text"}]}`.
pub struct RemoteClient<T: Transport, C: Clock> {
    cfg: ProviderConfig,
    transport: T,
    limiter: RateLimiter<C>,
    in_flight: Mutex<()>,
}

impl<T: Transport, C: Clock> RemoteClient<T, C> {
    pub fn new(cfg: ProviderConfig, transport: T, clock: C) -> Self {
        let limiter = RateLimiter::new(cfg.rate_per_min, clock);
        RemoteClient {
            cfg,
            transport,
            limiter,
            in_flight: Mutex::new(()),
        }
    }

    pub fn limiter(&self) -> &RateLimiter<C> {
        &self.limiter
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    /// Fetches up to `max_pages` pages, stopping at the first short one.
    /// Hits keep the provider's order.
    pub fn search(&self, keywords: &[String]) -> Result<Vec<SnippetCandidate>, HarvestError> {
        let token = match &self.cfg.auth_env {
            Some(var) => Some(std::env::var(var).map_err(|_| HarvestError::AuthMissing {
                var: var.clone(),
            })?),
            None => None,
        };
        let _guard = self.in_flight.lock().unwrap_or_else(|p| p.into_inner());
        let mut out = Vec::new();
        for page in 1..=self.cfg.max_pages {
            self.limiter.acquire();
            let query = [
                ("q".to_string(), keywords.join(" ")),
                ("page".to_string(), page.to_string()),
                ("per_page".to_string(), self.cfg.page_size.to_string()),
            ];
            let reply = self
                .transport
                .get(&self.cfg.base, &query, token.as_deref())
                .map_err(|cause| self.unreachable(cause))?;
            match reply.status {
                200..=299 => {}
                429 => {
                    return Err(HarvestError::RateLimited {
                        provider: self.cfg.name.clone(),
                        retry_after_secs: reply.retry_after.unwrap_or(60),
                    })
                }
                s => return Err(self.unreachable(format!("HTTP {s}"))),
            }
            let parsed: Page = serde_json::from_str(&reply.body)
                .map_err(|e| self.unreachable(format!("malformed response: {e}")))?;
            let count = parsed.items.len();
            let now = Utc::now();
            out.extend(parsed.items.into_iter().map(|item| {
                let haystack = format!("{}\n{}", item.title, item.text);
                SnippetCandidate {
                    provider: self.cfg.name.clone(),
                    score: keyword_score(&haystack, keywords),
                    excerpt: excerpt(&item.text),
                    locator: item.path,
                    title: item.title,
                    fetched_at: now,
                }
            }));
            if count < self.cfg.page_size as usize {
                break;
            }
        }
        Ok(out)
    }

    fn unreachable(&self, cause: String) -> HarvestError {
        HarvestError::ProviderUnreachable {
            provider: self.cfg.name.clone(),
            cause,
        }
    }
}
