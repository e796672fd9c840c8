//! Program synthesis from concept graphs.
//!
//! The mapper ([`resolve_concept`]) picks the most specialized implemented
//! concept for each graph node, [`expand_graph`] splices complex concepts
//! into their part graphs, [`harmonize`] binds every input to an upstream
//! output and [`emit_program`] renders the result for a backend.
//! [`synthesize`] runs all four in order.

mod emit;
mod expand;
mod harmonize;
mod render;
mod resolve;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emit::{emit_program, GeneratedProgram, LineRange};
pub use expand::{expand_graph, ResolvedGraph, ResolvedNode, MAX_EXPANSION_DEPTH};
pub use harmonize::{
    harmonize, normalize_name, BindingPlan, InputBinding, MatchLevel, Rename, RenameKind,
};
pub use resolve::{resolve_concept, specialization_depths};

use crate::graph::{ConceptGraph, GraphError};
use crate::store::{ConceptId, Store};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Minilang,
    CLike,
    PyLike,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Minilang, Backend::CLike, Backend::PyLike];

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Minilang => "minilang",
            Backend::CLike => "c-like",
            Backend::PyLike => "py-like",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Backend::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| format!("unknown backend `{s}` (expected minilang, c-like or py-like)"))
    }
}

/// Pipeline stage an error came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Validate,
    Resolve,
    Expand,
    Harmonize,
    Emit,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            Stage::Resolve => "resolve",
            Stage::Expand => "expand",
            Stage::Harmonize => "harmonize",
            Stage::Emit => "emit",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An upstream output considered for an input binding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub node: String,
    pub output: String,
    pub dtype: crate::minilang::Dtype,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum SynthesisErrorKind {
    #[error("invalid concept graph: {message}")]
    InvalidGraph {
        message: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        cycle: Option<Vec<String>>,
    },
    #[error("unknown concept `{id}`")]
    UnknownId { id: ConceptId },
    #[error("neither `{id}` nor any specialization of it is implemented")]
    NoImplementation { id: ConceptId },
    #[error("expansion deeper than {limit} levels: {}", path_str(.path))]
    ExpansionDepthExceeded { limit: usize, path: Vec<ConceptId> },
    #[error("snippet of `{concept}` does not parse: {message}")]
    SnippetParse { concept: ConceptId, message: String },
    #[error("explicit binding of `{input}` on node `{node}`: {reason}")]
    BadBinding {
        node: String,
        input: String,
        reason: String,
    },
    #[error("no upstream output can feed input `{input}` ({dtype}) of node `{node}`")]
    UnboundInput {
        node: String,
        input: String,
        dtype: crate::minilang::Dtype,
        candidates: Vec<Candidate>,
    },
    #[error("input `{input}` of node `{node}` matches several outputs: {}", cand_str(.candidates))]
    AmbiguousBinding {
        node: String,
        input: String,
        dtype: crate::minilang::Dtype,
        candidates: Vec<Candidate>,
    },
    #[error("the {backend} backend cannot express {construct}")]
    BackendUnsupportedConstruct { backend: Backend, construct: String },
}

fn path_str(path: &[ConceptId]) -> String {
    path.iter()
        .map(ConceptId::as_str)
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn cand_str(c: &[Candidate]) -> String {
    c.iter()
        .map(|c| format!("{}.{}", c.node, c.output))
        .collect::<Vec<_>>()
        .join(", ")
}

impl SynthesisErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            SynthesisErrorKind::InvalidGraph { .. } => "invalid-graph",
            SynthesisErrorKind::UnknownId { .. } => "unknown-id",
            SynthesisErrorKind::NoImplementation { .. } => "no-implementation",
            SynthesisErrorKind::ExpansionDepthExceeded { .. } => "expansion-depth-exceeded",
            SynthesisErrorKind::SnippetParse { .. } => "snippet-parse-error",
            SynthesisErrorKind::BadBinding { .. } => "bad-binding",
            SynthesisErrorKind::UnboundInput { .. } => "unbound-input",
            SynthesisErrorKind::AmbiguousBinding { .. } => "ambiguous-binding",
            SynthesisErrorKind::BackendUnsupportedConstruct { .. } => {
                "backend-unsupported-construct"
            }
        }
    }

    /// Structured payload, without the `code` tag.
    pub fn detail(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("error payload serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("code");
        }
        v
    }
}

impl From<GraphError> for SynthesisErrorKind {
    fn from(e: GraphError) -> Self {
        let cycle = match &e {
            GraphError::Cycle(path) => Some(path.clone()),
            _ => None,
        };
        SynthesisErrorKind::InvalidGraph {
            message: e.to_string(),
            cycle,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{stage}: {kind}")]
pub struct SynthesisError {
    pub stage: Stage,
    pub kind: SynthesisErrorKind,
}

impl SynthesisError {
    pub fn new(stage: Stage, kind: SynthesisErrorKind) -> Self {
        SynthesisError { stage, kind }
    }

    pub fn code(&self) -> &'static str {
        self.kind.code()
    }
}

/// `P = α(μ(T))`: resolve, expand, harmonize and emit in one call.
pub fn synthesize(
    store: &Store,
    graph: &ConceptGraph,
    backend: Backend,
) -> Result<GeneratedProgram, SynthesisError> {
    let resolved = expand_graph(store, graph)?;
    let plan = harmonize(&resolved)?;
    emit_program(&resolved, &plan, backend)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_names() {
        for b in Backend::ALL {
            assert_eq!(b.as_str().parse::<Backend>().unwrap(), b);
            assert_eq!(
                serde_json::to_string(&b).unwrap(),
                format!("\"{}\"", b.as_str())
            );
        }
        assert!("cobol".parse::<Backend>().is_err());
    }

    #[test]
    fn error_detail_drops_the_code_tag() {
        let kind = SynthesisErrorKind::NoImplementation {
            id: "x".parse().unwrap(),
        };
        assert_eq!(kind.code(), "no-implementation");
        assert_eq!(kind.detail(), serde_json::json!({"id": "x"}));
    }
}
