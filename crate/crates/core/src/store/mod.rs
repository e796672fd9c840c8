//! The concept database: concepts, the specialization hierarchy, keyword
//! search and the `.cmdb.json` store file.

mod concept;
mod persist;
mod search;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use concept::{Annotation, Concept, ConceptId, ConceptKind, Curation, TypedVar};
pub use persist::{load_store, parse_store, save_store, to_store_json, STORE_VERSION};
pub use search::{search_concepts, tokenize, SearchHit};

use crate::graph::find_path;
use crate::minilang::ParseError;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("concept `{0}` already exists")]
    DuplicateId(ConceptId),
    #[error("snippet of `{concept}` does not parse: {error}")]
    SnippetParse {
        concept: ConceptId,
        error: Box<ParseError>,
    },
    #[error("concept `{concept}` is invalid: {reason}")]
    InvalidConcept { concept: ConceptId, reason: String },
    #[error("part graph of `{concept}` refers to unknown concept `{missing}`")]
    BrokenPartReference {
        concept: ConceptId,
        missing: ConceptId,
    },
    #[error("aggregation cycle: {}", join(.0))]
    AggregationCycle(Vec<ConceptId>),
    #[error("unknown concept `{0}`")]
    UnknownId(ConceptId),
    #[error("linking would create a cycle: {}", join(.0))]
    CycleRejected(Vec<ConceptId>),
    #[error("`{0}` is already a specialization of `{1}`")]
    DuplicateEdge(ConceptId, ConceptId),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("store invariant violated: {0}")]
    InvariantViolation(String),
}

fn join(ids: &[ConceptId]) -> String {
    ids.iter()
        .map(ConceptId::as_str)
        .collect::<Vec<_>>()
        .join(" -> ")
}

impl StoreError {
    /// Stable machine-readable token for this error.
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::DuplicateId(_) => "duplicate-id",
            StoreError::SnippetParse { .. } => "snippet-parse-error",
            StoreError::InvalidConcept { .. } => "invalid-concept",
            StoreError::BrokenPartReference { .. } => "broken-part-reference",
            StoreError::AggregationCycle(_) => "aggregation-cycle",
            StoreError::UnknownId(_) => "unknown-id",
            StoreError::CycleRejected(_) => "cycle-rejected",
            StoreError::DuplicateEdge(..) => "duplicate-edge",
            StoreError::Io { .. } => "io-error",
            StoreError::Format { .. } => "format-error",
            StoreError::InvariantViolation(_) => "invariant-violation",
        }
    }
}

/// A snapshot of the concept database.
///
/// Mutating methods validate fully before touching the store, so a failed
/// call leaves it unchanged.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Store {
    concepts: BTreeMap<ConceptId, Concept>,
    /// `(child, parent)`: child is a specialization of parent.
    isa: BTreeSet<(ConceptId, ConceptId)>,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn get(&self, id: &ConceptId) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn contains(&self, id: &ConceptId) -> bool {
        self.concepts.contains_key(id)
    }

    /// Concepts in ascending id order.
    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn isa_edges(&self) -> impl Iterator<Item = &(ConceptId, ConceptId)> {
        self.isa.iter()
    }

    pub fn parents(&self, id: &ConceptId) -> Vec<&ConceptId> {
        self.isa
            .iter()
            .filter(|(c, _)| c == id)
            .map(|(_, p)| p)
            .collect()
    }

    pub fn children(&self, id: &ConceptId) -> Vec<&ConceptId> {
        self.isa
            .iter()
            .filter(|(_, p)| p == id)
            .map(|(c, _)| c)
            .collect()
    }

    pub fn add_concept(&mut self, concept: Concept) -> Result<(), StoreError> {
        if self.contains(&concept.id) {
            return Err(StoreError::DuplicateId(concept.id));
        }
        let mut concept = concept;
        if let Some(parts) = &concept.parts {
            if parts.nodes.iter().any(|n| n.concept == concept.id) {
                return Err(StoreError::AggregationCycle(vec![
                    concept.id.clone(),
                    concept.id.clone(),
                ]));
            }
            concept.parts = Some(parts.normalized());
        }
        concept.validate_standalone()?;
        self.check_part_references(&concept)?;
        let id = concept.id.clone();
        self.concepts.insert(id.clone(), concept);
        if let Some(cycle) = self.aggregation_cycle() {
            self.concepts.remove(&id);
            return Err(StoreError::AggregationCycle(cycle));
        }
        Ok(())
    }

    fn check_part_references(&self, concept: &Concept) -> Result<(), StoreError> {
        for node in concept.parts.iter().flat_map(|p| &p.nodes) {
            if node.concept != concept.id && !self.contains(&node.concept) {
                return Err(StoreError::BrokenPartReference {
                    concept: concept.id.clone(),
                    missing: node.concept.clone(),
                });
            }
        }
        Ok(())
    }

    /// A cycle in the "part graph refers to" relation, if any.
    fn aggregation_cycle(&self) -> Option<Vec<ConceptId>> {
        let refs: BTreeMap<&ConceptId, BTreeSet<&ConceptId>> = self
            .concepts
            .values()
            .map(|c| {
                let targets = c.parts.iter().flat_map(|p| &p.nodes).map(|n| &n.concept);
                (&c.id, targets.collect())
            })
            .collect();
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn dfs<'a>(
            at: &'a ConceptId,
            refs: &BTreeMap<&'a ConceptId, BTreeSet<&'a ConceptId>>,
            marks: &mut BTreeMap<&'a ConceptId, Mark>,
            stack: &mut Vec<&'a ConceptId>,
        ) -> Option<Vec<ConceptId>> {
            marks.insert(at, Mark::Active);
            stack.push(at);
            for &next in refs.get(at).into_iter().flatten() {
                match marks.get(next) {
                    Some(Mark::Active) => {
                        let pos = stack.iter().position(|&s| s == next).expect("on stack");
                        let mut cycle: Vec<ConceptId> =
                            stack[pos..].iter().map(|&s| s.clone()).collect();
                        cycle.push(next.clone());
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None => {
                        if let Some(c) = dfs(next, refs, marks, stack) {
                            return Some(c);
                        }
                    }
                }
            }
            stack.pop();
            marks.insert(at, Mark::Done);
            None
        }
        let mut marks = BTreeMap::new();
        for &id in refs.keys() {
            if !marks.contains_key(id) {
                if let Some(c) = dfs(id, &refs, &mut marks, &mut Vec::new()) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Records that `child` is a specialization of `parent`.
    pub fn link_specialization(
        &mut self,
        child: &ConceptId,
        parent: &ConceptId,
    ) -> Result<(), StoreError> {
        for id in [child, parent] {
            if !self.contains(id) {
                return Err(StoreError::UnknownId(id.clone()));
            }
        }
        if self.isa.contains(&(child.clone(), parent.clone())) {
            return Err(StoreError::DuplicateEdge(child.clone(), parent.clone()));
        }
        if let Some(cycle) = self.isa_cycle_through(child, parent) {
            return Err(StoreError::CycleRejected(cycle));
        }
        self.isa.insert((child.clone(), parent.clone()));
        Ok(())
    }

    /// The cycle `child -> parent -> ... -> child` that adding the edge
    /// would close, if any.
    fn isa_cycle_through(&self, child: &ConceptId, parent: &ConceptId) -> Option<Vec<ConceptId>> {
        let mut up: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (c, p) in &self.isa {
            up.entry(c.as_str()).or_default().push(p.as_str());
        }
        let path = find_path(&up, parent.as_str(), child.as_str())?;
        let mut cycle = vec![child.clone()];
        cycle.extend(path.iter().map(|s| s.parse().expect("ids in store are valid")));
        Some(cycle)
    }

    /// All strict descendants (specializations, transitively) of `id`.
    pub fn descendants(&self, id: &ConceptId) -> BTreeSet<ConceptId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(at) = stack.pop() {
            for child in self.children(at) {
                if out.insert(child.clone()) {
                    stack.push(child);
                }
            }
        }
        out
    }

    /// Rebuilds a store from raw parts, checking every store invariant.
    pub(crate) fn from_parts(
        concepts: Vec<Concept>,
        isa: Vec<(ConceptId, ConceptId)>,
    ) -> Result<Store, StoreError> {
        let violation = |e: StoreError| StoreError::InvariantViolation(e.to_string());
        let mut store = Store::new();
        for c in concepts {
            if store.contains(&c.id) {
                return Err(violation(StoreError::DuplicateId(c.id)));
            }
            c.validate_standalone().map_err(violation)?;
            let mut c = c;
            c.parts = c.parts.map(|p| p.normalized());
            store.concepts.insert(c.id.clone(), c);
        }
        for c in store.concepts.values() {
            store.check_part_references(c).map_err(violation)?;
        }
        if let Some(cycle) = store.aggregation_cycle() {
            return Err(violation(StoreError::AggregationCycle(cycle)));
        }
        for (child, parent) in &isa {
            store.link_specialization(child, parent).map_err(violation)?;
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ConceptGraph, GraphNode};

    fn id(s: &str) -> ConceptId {
        s.parse().unwrap()
    }

    fn abstracts(ids: &[&str]) -> Store {
        let mut store = Store::new();
        for s in ids {
            store
                .add_concept(Concept::abstract_concept(id(s), *s))
                .unwrap();
        }
        store
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut store = abstracts(&["a"]);
        assert!(matches!(
            store.add_concept(Concept::abstract_concept(id("a"), "again")),
            Err(StoreError::DuplicateId(_))
        ));
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn three_cycle_is_rejected_with_path() {
        let mut store = abstracts(&["a", "b", "c"]);
        store.link_specialization(&id("a"), &id("b")).unwrap();
        store.link_specialization(&id("b"), &id("c")).unwrap();
        match store.link_specialization(&id("c"), &id("a")) {
            Err(StoreError::CycleRejected(path)) => {
                assert_eq!(path, vec![id("c"), id("a"), id("b"), id("c")])
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            store.link_specialization(&id("a"), &id("a")),
            Err(StoreError::CycleRejected(_))
        ));
    }

    #[test]
    fn link_errors() {
        let mut store = abstracts(&["a", "b"]);
        assert!(matches!(
            store.link_specialization(&id("a"), &id("zzz")),
            Err(StoreError::UnknownId(_))
        ));
        store.link_specialization(&id("a"), &id("b")).unwrap();
        assert!(matches!(
            store.link_specialization(&id("a"), &id("b")),
            Err(StoreError::DuplicateEdge(..))
        ));
    }

    #[test]
    fn self_referencing_parts_are_an_aggregation_cycle() {
        let mut store = Store::new();
        let parts = ConceptGraph {
            nodes: vec![GraphNode::new("n1", id("loop"))],
            edges: vec![],
        };
        assert!(matches!(
            store.add_concept(Concept::complex(id("loop"), "Loop", parts)),
            Err(StoreError::AggregationCycle(_))
        ));
    }

    #[test]
    fn broken_part_reference() {
        let mut store = Store::new();
        let parts = ConceptGraph {
            nodes: vec![GraphNode::new("n1", id("missing"))],
            edges: vec![],
        };
        assert!(matches!(
            store.add_concept(Concept::complex(id("agg"), "Agg", parts)),
            Err(StoreError::BrokenPartReference { .. })
        ));
    }

    #[test]
    fn loading_detects_mutual_aggregation() {
        let a = Concept::complex(
            id("a"),
            "A",
            ConceptGraph {
                nodes: vec![GraphNode::new("n1", id("b"))],
                edges: vec![],
            },
        );
        let b = Concept::complex(
            id("b"),
            "B",
            ConceptGraph {
                nodes: vec![GraphNode::new("n1", id("a"))],
                edges: vec![],
            },
        );
        assert!(matches!(
            Store::from_parts(vec![a, b], vec![]),
            Err(StoreError::InvariantViolation(_))
        ));
    }

    #[test]
    fn descendants_are_transitive() {
        let mut store = abstracts(&["a", "b", "c", "d"]);
        store.link_specialization(&id("b"), &id("a")).unwrap();
        store.link_specialization(&id("c"), &id("b")).unwrap();
        store.link_specialization(&id("d"), &id("a")).unwrap();
        assert_eq!(
            store.descendants(&id("a")),
            [id("b"), id("c"), id("d")].into_iter().collect()
        );
    }
}
