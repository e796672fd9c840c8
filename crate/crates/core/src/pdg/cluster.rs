use std::fmt::Write;

use serde::Serialize;

use super::{build_pdg, similarity, wl_signature_with, LabelOptions, PdgError};
use crate::store::{ConceptId, ConceptKind, Store};

/// A group of structurally similar snippets that may deserve a common
/// parent concept. Never applied automatically.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Suggestion {
    pub members: Vec<ConceptId>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    pub threshold: f64,
    pub rounds: usize,
    /// Terminal concepts in id order; rows and columns of `matrix`.
    pub concepts: Vec<ConceptId>,
    pub matrix: Vec<Vec<f64>>,
    /// A partition of `concepts`, each cluster sorted, clusters ordered by
    /// their first member.
    pub clusters: Vec<Vec<ConceptId>>,
    pub suggestions: Vec<Suggestion>,
}

impl ClusterReport {
    /// The similarity matrix with a header row and column of concept ids.
    pub fn matrix_csv(&self) -> String {
        let mut out = String::from("concept");
        for c in &self.concepts {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
        for (c, row) in self.concepts.iter().zip(&self.matrix) {
            out.push_str(c.as_str());
            for v in row {
                write!(out, ",{v:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn cluster_snippets(
    store: &Store,
    threshold: f64,
    rounds: usize,
) -> Result<ClusterReport, PdgError> {
    cluster_snippets_with(store, threshold, rounds, LabelOptions::default())
}

/// Single-linkage clustering of terminal concepts: two snippets share a
/// cluster when a chain of pairs with similarity at least `threshold`
/// connects them.
pub fn cluster_snippets_with(
    store: &Store,
    threshold: f64,
    rounds: usize,
    opts: LabelOptions,
) -> Result<ClusterReport, PdgError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(PdgError::ThresholdOutOfRange(threshold));
    }
    let terminals: Vec<_> = store
        .concepts()
        .filter(|c| c.kind == ConceptKind::Terminal)
        .filter_map(|c| Some((c.id.clone(), c.function()?.ok()?)))
        .collect();
    let signatures: Vec<_> = terminals
        .iter()
        .map(|(_, f)| wl_signature_with(&build_pdg(f), rounds, opts))
        .collect();
    let n = terminals.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let s = similarity(&signatures[i], &signatures[j])?;
            matrix[i][j] = s;
            matrix[j][i] = s;
        }
    }

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, row) in matrix.iter().enumerate() {
        for (j, &score) in row.iter().enumerate().skip(i + 1) {
            if score >= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                // keep the smaller index as root so cluster order is stable
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut clusters: Vec<Vec<ConceptId>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for (i, (id, _)) in terminals.iter().enumerate() {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[root_slot[r]].push(id.clone());
    }
    let suggestions = clusters
        .iter()
        .filter(|c| c.len() > 1)
        .map(|members| Suggestion {
            members: members.clone(),
            message: format!(
                "consider a common parent concept for {}",
                members
                    .iter()
                    .map(ConceptId::as_str)
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        })
        .collect();
    Ok(ClusterReport {
        threshold,
        rounds,
        concepts: terminals.into_iter().map(|(id, _)| id).collect(),
        matrix,
        clusters,
        suggestions,
    })
}
