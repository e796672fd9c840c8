//! Concept graphs: user-authored precedence DAGs of concept references, and
//! the `.cmap.json` file format that carries them.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::store::ConceptId;

pub const CMAP_VERSION: u32 = 1;

/// `source-node.output`, naming the output variable of an upstream node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BindingRef {
    pub node: String,
    pub output: String,
}

impl fmt::Display for BindingRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.output)
    }
}

impl FromStr for BindingRef {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((node, output)) if !node.is_empty() && !output.is_empty() => Ok(BindingRef {
                node: node.to_string(),
                output: output.to_string(),
            }),
            _ => Err(GraphError::BadBinding(s.to_string())),
        }
    }
}

impl Serialize for BindingRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BindingRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphNode {
    pub id: String,
    pub concept: ConceptId,
    /// Input name to upstream output, overriding inferred bindings.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bindings: BTreeMap<String, BindingRef>,
}

impl GraphNode {
    pub fn new(id: impl Into<String>, concept: ConceptId) -> Self {
        GraphNode {
            id: id.into(),
            concept,
            bindings: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("node id `{0}` must match [A-Za-z0-9_-]+")]
    InvalidNodeId(String),
    #[error("node id `{0}` is used twice")]
    DuplicateNode(String),
    #[error("edge endpoint `{0}` is not a node")]
    UnknownEndpoint(String),
    #[error("edge {0} -> {1} is listed twice")]
    DuplicateEdge(String, String),
    #[error("graph has a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("binding `{0}` must have the form node.output")]
    BadBinding(String),
    #[error("binding on node `{node}` refers to unknown node `{source_node}`")]
    UnknownBindingSource { node: String, source_node: String },
}

pub fn is_valid_node_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl ConceptGraph {
    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Checks the structural invariants: nonempty, unique well-formed node
    /// ids, edges between existing nodes, bindings naming existing nodes,
    /// and acyclicity (which implies at least one source and one sink).
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !is_valid_node_id(&n.id) {
                return Err(GraphError::InvalidNodeId(n.id.clone()));
            }
            if !ids.insert(n.id.as_str()) {
                return Err(GraphError::DuplicateNode(n.id.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for (a, b) in &self.edges {
            for end in [a, b] {
                if !ids.contains(end.as_str()) {
                    return Err(GraphError::UnknownEndpoint(end.clone()));
                }
            }
            if !seen.insert((a, b)) {
                return Err(GraphError::DuplicateEdge(a.clone(), b.clone()));
            }
        }
        for n in &self.nodes {
            for r in n.bindings.values() {
                if !ids.contains(r.node.as_str()) {
                    return Err(GraphError::UnknownBindingSource {
                        node: n.id.clone(),
                        source_node: r.node.clone(),
                    });
                }
            }
        }
        self.topo_order().map(|_| ())
    }

    /// Kahn's algorithm with the ready set ordered by node id.
    pub fn topo_order(&self) -> Result<Vec<String>, GraphError> {
        topo_order(
            self.nodes.iter().map(|n| n.id.as_str()),
            self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        )
    }

    pub fn sources(&self) -> Vec<&str> {
        let targets: BTreeSet<&str> = self.edges.iter().map(|(_, b)| b.as_str()).collect();
        self.nodes
            .iter()
            .map(|n| n.id.as_str())
            .filter(|id| !targets.contains(id))
            .collect()
    }

    pub fn sinks(&self) -> Vec<&str> {
        let origins: BTreeSet<&str> = self.edges.iter().map(|(a, _)| a.as_str()).collect();
        self.nodes
            .iter()
            .map(|n| n.id.as_str())
            .filter(|id| !origins.contains(id))
            .collect()
    }

    /// Node and edge lists sorted by id, the store's canonical order.
    pub fn normalized(&self) -> ConceptGraph {
        let mut g = self.clone();
        g.nodes.sort_by(|a, b| a.id.cmp(&b.id));
        g.edges.sort();
        g
    }

    /// Would adding `from -> to` close a cycle? Returns the cycle if so.
    pub fn cycle_through(&self, from: &str, to: &str) -> Option<Vec<String>> {
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in &self.edges {
            adj.entry(a.as_str()).or_default().push(b.as_str());
        }
        find_path(&adj, to, from).map(|mut path| {
            path.insert(0, from.to_string());
            path
        })
    }
}

/// Topological order over string ids; ties resolved by ascending id.
pub fn topo_order<'a>(
    nodes: impl IntoIterator<Item = &'a str>,
    edges: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<Vec<String>, GraphError> {
    let mut indegree: BTreeMap<&str, usize> = nodes.into_iter().map(|n| (n, 0)).collect();
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
        *indegree.entry(b).or_default() += 1;
        indegree.entry(a).or_default();
    }
    let mut ready: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for &m in adj.get(n).map(Vec::as_slice).unwrap_or_default() {
            let d = indegree.get_mut(m).expect("registered");
            *d -= 1;
            if *d == 0 {
                ready.insert(m);
            }
        }
    }
    if order.len() < indegree.len() {
        let remaining: BTreeSet<&str> = indegree
            .iter()
            .filter(|(_, d)| **d > 0)
            .map(|(n, _)| *n)
            .collect();
        return Err(GraphError::Cycle(extract_cycle(&adj, &remaining)));
    }
    Ok(order)
}

/// Finds one cycle among `nodes`, each of which has a predecessor in the set.
fn extract_cycle(adj: &BTreeMap<&str, Vec<&str>>, nodes: &BTreeSet<&str>) -> Vec<String> {
    let mut preds: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (&a, targets) in adj {
        for &b in targets {
            if nodes.contains(a) && nodes.contains(b) {
                preds.entry(b).or_default().push(a);
            }
        }
    }
    let mut seen: Vec<&str> = Vec::new();
    let mut cur = *nodes.first().expect("cycle implies leftover nodes");
    loop {
        if let Some(pos) = seen.iter().position(|&n| n == cur) {
            // `seen` runs backwards along edges; flip it into a forward cycle
            let mut cycle: Vec<String> = seen[pos..].iter().rev().map(|s| s.to_string()).collect();
            cycle.insert(0, cur.to_string());
            return cycle;
        }
        seen.push(cur);
        cur = preds[cur].iter().copied().min().expect("leftover node has a predecessor");
    }
}

/// Shortest path `from ... to` by breadth-first search, ties by id.
pub fn find_path<S: Borrow<str> + Ord>(
    adj: &BTreeMap<S, Vec<S>>,
    from: &str,
    to: &str,
) -> Option<Vec<String>> {
    let mut parent: BTreeMap<String, String> = BTreeMap::new();
    let mut queue = VecDeque::from([from.to_string()]);
    let mut visited = BTreeSet::from([from.to_string()]);
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            let mut path = vec![cur.clone()];
            let mut at = cur;
            while let Some(p) = parent.get(&at) {
                path.push(p.clone());
                at = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        let next = adj.get(cur.as_str()).map(Vec::as_slice).unwrap_or_default();
        let mut next: Vec<&str> = next.iter().map(Borrow::borrow).collect();
        next.sort_unstable();
        for n in next {
            if visited.insert(n.to_string()) {
                parent.insert(n.to_string(), cur.clone());
                queue.push_back(n.to_string());
            }
        }
    }
    None
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CmapFile {
    version: u32,
    nodes: Vec<GraphNode>,
    edges: Vec<(String, String)>,
}

#[derive(Debug, Error)]
pub enum CmapError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Reads a `.cmap.json` document and validates the graph.
pub fn parse_cmap(text: &str) -> Result<ConceptGraph, CmapError> {
    let file: CmapFile = serde_json::from_str(text).map_err(|e| CmapError::Format {
        line: e.line(),
        message: e.to_string(),
    })?;
    if file.version != CMAP_VERSION {
        return Err(CmapError::Format {
            line: 1,
            message: format!("unsupported cmap version {}", file.version),
        });
    }
    let graph = ConceptGraph {
        nodes: file.nodes,
        edges: file.edges,
    };
    graph.validate()?;
    Ok(graph)
}

/// Writes a graph as a `.cmap.json` document, preserving node and edge order.
pub fn to_cmap_json(graph: &ConceptGraph) -> String {
    let file = CmapFile {
        version: CMAP_VERSION,
        nodes: graph.nodes.clone(),
        edges: graph.edges.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("graph serializes");
    out.push('\n');
    out
}
