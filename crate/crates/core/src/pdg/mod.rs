//! Program dependence graphs of snippets, Weisfeiler-Lehman structural
//! signatures over them, and similarity clustering of a store's terminal
//! concepts.

mod build;
mod cluster;
mod wl;

use thiserror::Error;

pub use build::{build_pdg, EdgeKind, NodeKind, Pdg, PdgEdge, PdgNode};
pub use cluster::{cluster_snippets, cluster_snippets_with, ClusterReport, Suggestion};
pub use wl::{similarity, wl_signature, wl_signature_with, LabelOptions, WlSignature};

pub const DEFAULT_ROUNDS: usize = 3;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PdgError {
    #[error("signatures were computed with {left} and {right} rounds")]
    RoundsMismatch { left: usize, right: usize },
    #[error("threshold {0} is outside (0, 1]")]
    ThresholdOutOfRange(f64),
}

impl PdgError {
    pub fn code(&self) -> &'static str {
        match self {
            PdgError::RoundsMismatch { .. } => "rounds-mismatch",
            PdgError::ThresholdOutOfRange(_) => "threshold-out-of-range",
        }
    }
}
