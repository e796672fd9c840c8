use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use codemapper::graph::CmapError;
use codemapper::harvester::HarvestError;
use codemapper::minilang::{EvalError, ParseError};
use codemapper::pdg::PdgError;
use codemapper::store::StoreError;
use codemapper::synthesis::{SynthesisError, SynthesisErrorKind};

/// Every `code` an [`ApiError`] can carry.
pub const ERROR_CODES: &[&str] = &[
    "aggregation-cycle",
    "ambiguous-binding",
    "auth-missing",
    "backend-unsupported-construct",
    "bad-binding",
    "bad-request",
    "broken-part-reference",
    "call-depth-exceeded",
    "cycle-rejected",
    "duplicate-edge",
    "duplicate-id",
    "empty-query",
    "expansion-depth-exceeded",
    "fetch-failed",
    "format-error",
    "invalid-concept",
    "invalid-config",
    "invalid-graph",
    "invariant-violation",
    "io-error",
    "no-implementation",
    "not-found",
    "parse-error",
    "provider-unreachable",
    "rate-limited",
    "rounds-mismatch",
    "runtime-error",
    "snippet-parse-error",
    "step-limit-exceeded",
    "threshold-out-of-range",
    "unbound-input",
    "unknown-id",
    "unknown-provider",
];

/// Error body shared by the CLI (`--format json`) and the HTTP service.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub stage: String,
    pub code: String,
    pub message: String,
    pub detail: Value,
    #[serde(skip)]
    pub status: u16,
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({}): {}", self.code, self.stage, self.message)
    }
}

impl std::error::Error for ApiError {}

impl ApiError {
    pub fn new(stage: &str, code: &str, status: u16, message: impl Into<String>, detail: Value) -> Self {
        debug_assert!(ERROR_CODES.contains(&code), "unpublished error code {code}");
        ApiError {
            stage: stage.to_string(),
            code: code.to_string(),
            message: message.into(),
            detail,
            status,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new("request", "bad-request", 400, message, json!({}))
    }

    pub fn not_found(what: &str) -> Self {
        ApiError::new("request", "not-found", 404, format!("no route {what}"), json!({}))
    }

    /// Body as sent: one JSON object.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

fn parse_detail(e: &ParseError) -> Value {
    json!({
        "line": e.span.line,
        "column": e.span.column,
        "expected": e.expected,
        "found": e.found,
    })
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let (status, detail) = match &e {
            StoreError::DuplicateId(id) => (409, json!({ "id": id })),
            StoreError::SnippetParse { concept, error } => {
                let mut d = parse_detail(error);
                d["concept"] = json!(concept);
                (400, d)
            }
            StoreError::InvalidConcept { concept, reason } => {
                (400, json!({ "concept": concept, "reason": reason }))
            }
            StoreError::BrokenPartReference { concept, missing } => {
                (400, json!({ "concept": concept, "missing": missing }))
            }
            StoreError::AggregationCycle(path) => (409, json!({ "path": path })),
            StoreError::UnknownId(id) => (404, json!({ "id": id })),
            StoreError::CycleRejected(path) => (409, json!({ "path": path })),
            StoreError::DuplicateEdge(child, parent) => {
                (409, json!({ "child": child, "parent": parent }))
            }
            StoreError::Io { path, .. } => (500, json!({ "path": path })),
            StoreError::Format { line, .. } => (400, json!({ "line": line })),
            StoreError::InvariantViolation(_) => (500, json!({})),
        };
        ApiError::new("store", e.code(), status, e.to_string(), detail)
    }
}

impl From<SynthesisError> for ApiError {
    fn from(e: SynthesisError) -> Self {
        let status = match e.kind {
            SynthesisErrorKind::InvalidGraph { .. } => 400,
            SynthesisErrorKind::UnknownId { .. } => 404,
            _ => 422,
        };
        ApiError::new(e.stage.as_str(), e.code(), status, e.kind.to_string(), e.kind.detail())
    }
}

impl From<CmapError> for ApiError {
    fn from(e: CmapError) -> Self {
        let detail = match &e {
            CmapError::Format { line, .. } => json!({ "line": line }),
            CmapError::Graph(_) => json!({}),
        };
        ApiError::new("validate", "invalid-graph", 400, e.to_string(), detail)
    }
}

impl From<HarvestError> for ApiError {
    fn from(e: HarvestError) -> Self {
        let e = match e {
            HarvestError::Store(inner) => {
                let mut err = ApiError::from(inner);
                err.stage = "harvest".into();
                return err;
            }
            other => other,
        };
        let (status, detail) = match &e {
            HarvestError::EmptyQuery => (400, json!({})),
            HarvestError::ProviderUnreachable { provider, cause } => {
                (502, json!({ "provider": provider, "cause": cause }))
            }
            HarvestError::RateLimited {
                provider,
                retry_after_secs,
            } => (
                502,
                json!({ "provider": provider, "retry_after_secs": retry_after_secs }),
            ),
            HarvestError::AuthMissing { var } => (502, json!({ "var": var })),
            HarvestError::FetchFailed { locator, cause } => {
                (502, json!({ "locator": locator, "cause": cause }))
            }
            HarvestError::InvalidConfig(_) => (400, json!({})),
            HarvestError::UnknownProvider(name) => (404, json!({ "provider": name })),
            HarvestError::Store(_) => unreachable!("handled above"),
        };
        ApiError::new("harvest", e.code(), status, e.to_string(), detail)
    }
}

impl From<PdgError> for ApiError {
    fn from(e: PdgError) -> Self {
        ApiError::new("cluster", e.code(), 400, e.to_string(), json!({}))
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        ApiError::new("parse", "parse-error", 400, e.to_string(), parse_detail(&e))
    }
}

impl From<EvalError> for ApiError {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::StepLimitExceeded(_) => "step-limit-exceeded",
            EvalError::CallDepthExceeded(_) => "call-depth-exceeded",
            EvalError::Runtime { .. } | EvalError::UnknownEntry(_) | EvalError::BadArguments(_) => {
                "runtime-error"
            }
        };
        let detail = match &e {
            EvalError::Runtime { span, kind, .. } => {
                json!({ "line": span.line, "column": span.column, "kind": kind })
            }
            _ => json!({}),
        };
        ApiError::new("run", code, 400, e.to_string(), detail)
    }
}
