use std::collections::BTreeMap;

use serde::Serialize;

use super::{resolve_concept, Stage, SynthesisError, SynthesisErrorKind};
use crate::graph::{topo_order, BindingRef, ConceptGraph, GraphNode};
use crate::minilang::FuncDef;
use crate::store::{ConceptId, ConceptKind, Store, TypedVar};

/// Guard against aggregation chains that only close through resolution.
pub const MAX_EXPANSION_DEPTH: usize = 32;

/// A graph node after resolution and expansion: always backed by one
/// terminal concept's function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedNode {
    /// Unique id; nodes spliced in from part graphs are `outer/inner`.
    pub id: String,
    /// Id of the node in the input graph this one was expanded from.
    pub origin: String,
    /// Concept named by the graph node before resolution.
    pub requested: ConceptId,
    /// The terminal concept supplying the function.
    pub concept: ConceptId,
    #[serde(skip)]
    pub func: FuncDef,
    pub inputs: Vec<TypedVar>,
    pub output: Option<TypedVar>,
    /// Explicit bindings, in resolved node ids.
    pub bindings: BTreeMap<String, BindingRef>,
}

/// Nodes in Kahn order (ready set ordered by id) and the spliced edge set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedGraph {
    pub nodes: Vec<ResolvedNode>,
    pub edges: Vec<(String, String)>,
}

impl ResolvedGraph {
    pub fn node(&self, id: &str) -> Option<&ResolvedNode> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

struct Fragment {
    nodes: Vec<ResolvedNode>,
    edges: Vec<(String, String)>,
    entries: Vec<String>,
    exits: Vec<String>,
}

/// Resolves every node and splices complex concepts into their part graphs
/// until only terminals remain.
pub fn expand_graph(store: &Store, graph: &ConceptGraph) -> Result<ResolvedGraph, SynthesisError> {
    let mut path = Vec::new();
    let fragment = expand_in(store, graph, "", None, &mut path)?;
    let order = topo_order(
        fragment.nodes.iter().map(|n| n.id.as_str()),
        fragment.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())),
    )
    .expect("splicing preserves acyclicity");
    let mut by_id: BTreeMap<String, ResolvedNode> = fragment
        .nodes
        .into_iter()
        .map(|n| (n.id.clone(), n))
        .collect();
    let nodes = order
        .iter()
        .map(|id| by_id.remove(id).expect("ordered node exists"))
        .collect();
    let mut edges = fragment.edges;
    edges.sort();
    Ok(ResolvedGraph { nodes, edges })
}

fn expand_in(
    store: &Store,
    graph: &ConceptGraph,
    prefix: &str,
    origin: Option<&str>,
    path: &mut Vec<ConceptId>,
) -> Result<Fragment, SynthesisError> {
    graph
        .validate()
        .map_err(|e| SynthesisError::new(Stage::Validate, e.into()))?;
    let mut pieces: BTreeMap<&str, Fragment> = BTreeMap::new();
    for node in &graph.nodes {
        let piece = expand_node(store, node, prefix, origin.unwrap_or(&node.id), path)?;
        pieces.insert(node.id.as_str(), piece);
    }
    for node in &graph.nodes {
        apply_bindings(node, prefix, &mut pieces)?;
    }
    let mut edges = Vec::new();
    for (a, b) in &graph.edges {
        for x in &pieces[a.as_str()].exits {
            for y in &pieces[b.as_str()].entries {
                edges.push((x.clone(), y.clone()));
            }
        }
    }
    let sources = graph.sources();
    let sinks = graph.sinks();
    let mut out = Fragment {
        nodes: Vec::new(),
        edges,
        entries: Vec::new(),
        exits: Vec::new(),
    };
    for (id, piece) in pieces {
        if sources.contains(&id) {
            out.entries.extend(piece.entries);
        }
        if sinks.contains(&id) {
            out.exits.extend(piece.exits);
        }
        out.nodes.extend(piece.nodes);
        out.edges.extend(piece.edges);
    }
    Ok(out)
}

fn expand_node(
    store: &Store,
    node: &GraphNode,
    prefix: &str,
    origin: &str,
    path: &mut Vec<ConceptId>,
) -> Result<Fragment, SynthesisError> {
    let id = format!("{prefix}{}", node.id);
    let resolved = resolve_concept(store, &node.concept)?;
    let concept = store.get(&resolved).expect("resolved concept exists");
    match concept.kind {
        ConceptKind::Terminal => {
            let func = concept
                .function()
                .expect("terminal has a snippet")
                .map_err(|e| {
                    SynthesisError::new(
                        Stage::Expand,
                        SynthesisErrorKind::SnippetParse {
                            concept: resolved.clone(),
                            message: e.to_string(),
                        },
                    )
                })?;
            Ok(Fragment {
                nodes: vec![ResolvedNode {
                    id: id.clone(),
                    origin: origin.to_string(),
                    requested: node.concept.clone(),
                    concept: resolved.clone(),
                    func,
                    inputs: concept.annotation.inputs.clone(),
                    output: concept.annotation.output().cloned(),
                    bindings: BTreeMap::new(),
                }],
                edges: Vec::new(),
                entries: vec![id.clone()],
                exits: vec![id],
            })
        }
        ConceptKind::Complex => {
            path.push(resolved.clone());
            if path.len() > MAX_EXPANSION_DEPTH {
                return Err(SynthesisError::new(
                    Stage::Expand,
                    SynthesisErrorKind::ExpansionDepthExceeded {
                        limit: MAX_EXPANSION_DEPTH,
                        path: path.clone(),
                    },
                ));
            }
            let parts = concept.parts.as_ref().expect("complex has parts");
            let piece = expand_in(store, parts, &format!("{id}/"), Some(origin), path)?;
            path.pop();
            Ok(piece)
        }
        ConceptKind::Abstract => unreachable!("resolution returns implemented concepts"),
    }
}

/// Moves a graph node's explicit bindings onto the resolved nodes that
/// consume and produce the named variables.
fn apply_bindings(
    node: &GraphNode,
    prefix: &str,
    pieces: &mut BTreeMap<&str, Fragment>,
) -> Result<(), SynthesisError> {
    let bad = |input: &str, reason: String| {
        SynthesisError::new(
            Stage::Expand,
            SynthesisErrorKind::BadBinding {
                node: format!("{prefix}{}", node.id),
                input: input.to_string(),
                reason,
            },
        )
    };
    for (input, source) in &node.bindings {
        let producer = &pieces[source.node.as_str()];
        let producers: Vec<&str> = producer
            .exits
            .iter()
            .filter(|x| {
                let n = producer.nodes.iter().find(|n| &n.id == *x).expect("exit exists");
                n.output.as_ref().is_some_and(|o| o.name == source.output)
            })
            .map(String::as_str)
            .collect();
        let source_node = match producers[..] {
            [one] => one.to_string(),
            // leave unknown outputs for the binding check to report
            [] if producer.nodes.len() == 1 => producer.nodes[0].id.clone(),
            [] => {
                return Err(bad(
                    input,
                    format!("no final part of `{}` outputs `{}`", source.node, source.output),
                ))
            }
            _ => {
                return Err(bad(
                    input,
                    format!(
                        "several final parts of `{}` output `{}`",
                        source.node, source.output
                    ),
                ))
            }
        };
        let target = BindingRef {
            node: source_node,
            output: source.output.clone(),
        };
        let consumer = pieces.get_mut(node.id.as_str()).expect("node expanded");
        if consumer.nodes.len() == 1 {
            consumer.nodes[0].bindings.insert(input.clone(), target);
            continue;
        }
        let mut applied = false;
        for n in consumer.nodes.iter_mut() {
            if consumer.entries.contains(&n.id) && n.inputs.iter().any(|v| &v.name == input) {
                n.bindings.insert(input.clone(), target.clone());
                applied = true;
            }
        }
        if !applied {
            return Err(bad(
                input,
                format!("no initial part of `{}` takes `{input}`", node.concept),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::Dtype;
    use crate::store::Concept;

    fn id(s: &str) -> ConceptId {
        s.parse().unwrap()
    }

    fn list(name: &str) -> TypedVar {
        TypedVar::new(name, Dtype::List)
    }

    fn chain(ids: &[(&str, &str)]) -> ConceptGraph {
        ConceptGraph {
            nodes: ids.iter().map(|(n, c)| GraphNode::new(*n, id(c))).collect(),
            edges: ids
                .windows(2)
                .map(|w| (w[0].0.to_string(), w[1].0.to_string()))
                .collect(),
        }
    }

    fn sorting_store() -> Store {
        let mut s = Store::new();
        let mut add = |c: Concept| s.add_concept(c).unwrap();
        add(Concept::terminal(id("read"), "Read", "func read() -> list { return [3, 1]; }")
            .with_output(list("xs")));
        add(
            Concept::terminal(id("split"), "Split", "func split(xs: list) -> list { return [xs]; }")
                .with_inputs(vec![list("xs")])
                .with_output(list("halves")),
        );
        add(
            Concept::terminal(id("join"), "Join", "func join(halves: list) -> list { return halves[0]; }")
                .with_inputs(vec![list("halves")])
                .with_output(list("sorted")),
        );
        add(Concept::terminal(id("show"), "Show", "func show(xs: list) { print(xs); }")
            .with_inputs(vec![list("xs")]));
        add(
            Concept::complex(id("msort"), "Msort", chain(&[("a", "split"), ("b", "join")]))
                .with_inputs(vec![list("xs")])
                .with_output(list("sorted")),
        );
        s
    }

    #[test]
    fn splices_part_graphs() {
        let store = sorting_store();
        let g = chain(&[("r", "read"), ("m", "msort"), ("p", "show")]);
        let rg = expand_graph(&store, &g).unwrap();
        let ids: Vec<&str> = rg.nodes.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, ["r", "m/a", "m/b", "p"]);
        let edges: Vec<(&str, &str)> = rg.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        assert_eq!(edges, [("m/a", "m/b"), ("m/b", "p"), ("r", "m/a")]);
        assert!(rg.nodes[1..3].iter().all(|n| n.origin == "m"));
        assert_eq!(rg.nodes[1].requested, id("split"));
    }

    #[test]
    fn bindings_follow_the_splice() {
        let store = sorting_store();
        let mut g = chain(&[("r", "read"), ("m", "msort"), ("p", "show")]);
        g.nodes[1].bindings.insert("xs".into(), "r.xs".parse().unwrap());
        g.nodes[2].bindings.insert("xs".into(), "m.sorted".parse().unwrap());
        let rg = expand_graph(&store, &g).unwrap();
        assert_eq!(rg.node("m/a").unwrap().bindings["xs"].to_string(), "r.xs");
        assert_eq!(rg.node("p").unwrap().bindings["xs"].to_string(), "m/b.sorted");
    }

    #[test]
    fn unknown_concept() {
        let g = chain(&[("x", "nope")]);
        let err = expand_graph(&Store::new(), &g).unwrap_err();
        assert_eq!(err.stage, Stage::Resolve);
        assert_eq!(err.code(), "unknown-id");
    }

    #[test]
    fn resolution_loop_hits_the_depth_guard() {
        // `loop` aggregates `shape`, and `loop` specializes `shape`, so
        // resolving the part leads back to `loop` forever.
        let mut s = Store::new();
        s.add_concept(Concept::abstract_concept(id("shape"), "Shape")).unwrap();
        s.add_concept(Concept::complex(id("loop"), "Loop", chain(&[("a", "shape")])))
            .unwrap();
        s.link_specialization(&id("loop"), &id("shape")).unwrap();
        let err = expand_graph(&s, &chain(&[("x", "loop")])).unwrap_err();
        match err.kind {
            SynthesisErrorKind::ExpansionDepthExceeded { limit, path } => {
                assert_eq!(limit, MAX_EXPANSION_DEPTH);
                assert_eq!(path.len(), MAX_EXPANSION_DEPTH + 1);
            }
            other => panic!("{other:?}"),
        }
    }
}
