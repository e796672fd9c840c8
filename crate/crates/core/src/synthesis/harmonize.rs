use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::{Candidate, ResolvedGraph, ResolvedNode, Stage, SynthesisError, SynthesisErrorKind};
use crate::minilang::BUILTINS;
use crate::store::{ConceptId, TypedVar};

const SYNONYMS: &[&[&str]] = &[
    &["arr", "array", "list", "lst", "xs"],
    &["n", "count", "size", "len"],
    &["result", "out", "output", "res"],
];

/// How an input found its source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchLevel {
    Explicit,
    Exact,
    Normalized,
    Synonym,
    Dtype,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputBinding {
    pub input: String,
    pub source_node: String,
    pub source_output: String,
    pub level: MatchLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RenameKind {
    Function,
    Variable,
}

/// An identifier that had to change to stay unique in the emitted program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rename {
    pub node: String,
    pub kind: RenameKind,
    pub original: String,
    pub emitted: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BindingPlan {
    /// Per node, one binding per input in parameter order.
    pub inputs: BTreeMap<String, Vec<InputBinding>>,
    /// Emitted function name per resolved concept.
    pub functions: BTreeMap<ConceptId, String>,
    /// Emitted `main` variable per node with an output.
    pub variables: BTreeMap<String, String>,
    pub renames: Vec<Rename>,
}

/// Case-folded name with underscores removed.
pub fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|&c| c != '_')
        .flat_map(char::to_lowercase)
        .collect()
}

fn synonym_group(name: &str) -> Option<usize> {
    let n = normalize_name(name);
    SYNONYMS.iter().position(|g| g.contains(&n.as_str()))
}

fn matches_at(level: MatchLevel, input: &str, output: &str) -> bool {
    match level {
        MatchLevel::Explicit => false,
        MatchLevel::Exact => input == output,
        MatchLevel::Normalized => normalize_name(input) == normalize_name(output),
        MatchLevel::Synonym => {
            normalize_name(input) == normalize_name(output)
                || synonym_group(input).is_some_and(|g| synonym_group(output) == Some(g))
        }
        MatchLevel::Dtype => true,
    }
}

/// Ancestors of `node` with their distance along reversed edges.
fn ancestors(preds: &BTreeMap<&str, Vec<&str>>, node: &str) -> BTreeMap<String, usize> {
    let mut dist = BTreeMap::new();
    let mut queue = VecDeque::from([(node, 0)]);
    let mut seen = BTreeSet::from([node]);
    while let Some((at, d)) = queue.pop_front() {
        for &p in preds.get(at).into_iter().flatten() {
            if seen.insert(p) {
                dist.insert(p.to_string(), d + 1);
                queue.push_back((p, d + 1));
            }
        }
    }
    dist
}

/// Binds every input of every node to an upstream output and picks unique
/// names for functions and `main` variables.
///
/// Ancestors are scanned nearest first. Within the nearest distance that
/// holds any output of the input's dtype, the levels exact name, normalized
/// name, synonym and bare dtype are tried in turn; the first level matching
/// anything must match exactly one output.
pub fn harmonize(graph: &ResolvedGraph) -> Result<BindingPlan, SynthesisError> {
    let mut preds: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in &graph.edges {
        preds.entry(b.as_str()).or_default().push(a.as_str());
    }
    let mut plan = BindingPlan::default();
    for node in &graph.nodes {
        let ancestors = ancestors(&preds, &node.id);
        if let Some(unknown) = node
            .bindings
            .keys()
            .find(|k| !node.inputs.iter().any(|v| &&v.name == k))
        {
            return Err(bad(node, unknown, format!("`{}` has no such input", node.concept)));
        }
        let mut bindings = Vec::with_capacity(node.inputs.len());
        for input in &node.inputs {
            let binding = match node.bindings.get(&input.name) {
                Some(source) => explicit(graph, node, input, source, &ancestors)?,
                None => inferred(graph, node, input, &ancestors)?,
            };
            bindings.push(binding);
        }
        plan.inputs.insert(node.id.clone(), bindings);
    }
    assign_names(graph, &mut plan);
    Ok(plan)
}

fn bad(node: &ResolvedNode, input: &str, reason: String) -> SynthesisError {
    SynthesisError::new(
        Stage::Harmonize,
        SynthesisErrorKind::BadBinding {
            node: node.id.clone(),
            input: input.to_string(),
            reason,
        },
    )
}

fn explicit(
    graph: &ResolvedGraph,
    node: &ResolvedNode,
    input: &TypedVar,
    source: &crate::graph::BindingRef,
    ancestors: &BTreeMap<String, usize>,
) -> Result<InputBinding, SynthesisError> {
    if !ancestors.contains_key(&source.node) {
        return Err(bad(
            node,
            &input.name,
            format!("`{}` does not precede `{}`", source.node, node.id),
        ));
    }
    let producer = graph.node(&source.node).expect("ancestor exists");
    match &producer.output {
        Some(o) if o.name == source.output && o.dtype == input.dtype => Ok(InputBinding {
            input: input.name.clone(),
            source_node: source.node.clone(),
            source_output: source.output.clone(),
            level: MatchLevel::Explicit,
        }),
        Some(o) if o.name == source.output => Err(bad(
            node,
            &input.name,
            format!("`{source}` is {} but the input is {}", o.dtype, input.dtype),
        )),
        _ => Err(bad(
            node,
            &input.name,
            format!("`{}` has no output `{}`", source.node, source.output),
        )),
    }
}

fn inferred(
    graph: &ResolvedGraph,
    node: &ResolvedNode,
    input: &TypedVar,
    ancestors: &BTreeMap<String, usize>,
) -> Result<InputBinding, SynthesisError> {
    let mut by_distance: BTreeMap<usize, Vec<Candidate>> = BTreeMap::new();
    for (id, &d) in ancestors {
        if let Some(o) = &graph.node(id).expect("ancestor exists").output {
            by_distance.entry(d).or_default().push(Candidate {
                node: id.clone(),
                output: o.name.clone(),
                dtype: o.dtype,
            });
        }
    }
    for group in by_distance.values() {
        let typed: Vec<&Candidate> = group.iter().filter(|c| c.dtype == input.dtype).collect();
        if typed.is_empty() {
            continue;
        }
        for level in [
            MatchLevel::Exact,
            MatchLevel::Normalized,
            MatchLevel::Synonym,
            MatchLevel::Dtype,
        ] {
            let hits: Vec<&Candidate> = typed
                .iter()
                .copied()
                .filter(|c| matches_at(level, &input.name, &c.output))
                .collect();
            match hits[..] {
                [] => continue,
                [c] => {
                    return Ok(InputBinding {
                        input: input.name.clone(),
                        source_node: c.node.clone(),
                        source_output: c.output.clone(),
                        level,
                    })
                }
                _ => {
                    return Err(SynthesisError::new(
                        Stage::Harmonize,
                        SynthesisErrorKind::AmbiguousBinding {
                            node: node.id.clone(),
                            input: input.name.clone(),
                            dtype: input.dtype,
                            candidates: hits.into_iter().cloned().collect(),
                        },
                    ))
                }
            }
        }
    }
    Err(SynthesisError::new(
        Stage::Harmonize,
        SynthesisErrorKind::UnboundInput {
            node: node.id.clone(),
            input: input.name.clone(),
            dtype: input.dtype,
            candidates: by_distance.into_values().flatten().collect(),
        },
    ))
}

fn sanitize(node_id: &str) -> String {
    node_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// `base`, or `base_<node>` (then numbered) when `base` is taken.
fn unique(base: &str, node_id: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    let suffixed = format!("{base}_{}", sanitize(node_id));
    let mut name = suffixed.clone();
    let mut k = 2;
    while taken.contains(&name) {
        name = format!("{suffixed}_{k}");
        k += 1;
    }
    name
}

fn assign_names(graph: &ResolvedGraph, plan: &mut BindingPlan) {
    // one namespace for functions and main variables keeps every backend happy
    let mut taken: BTreeSet<String> = BUILTINS
        .iter()
        .map(|b| b.to_string())
        .chain(["main".to_string()])
        .collect();
    for node in &graph.nodes {
        if plan.functions.contains_key(&node.concept) {
            continue;
        }
        let name = unique(&node.func.name, &node.id, &taken);
        if name != node.func.name {
            plan.renames.push(Rename {
                node: node.id.clone(),
                kind: RenameKind::Function,
                original: node.func.name.clone(),
                emitted: name.clone(),
            });
        }
        taken.insert(name.clone());
        plan.functions.insert(node.concept.clone(), name);
    }
    for node in &graph.nodes {
        let Some(output) = &node.output else {
            continue;
        };
        let name = unique(&output.name, &node.id, &taken);
        if name != output.name {
            plan.renames.push(Rename {
                node: node.id.clone(),
                kind: RenameKind::Variable,
                original: output.name.clone(),
                emitted: name.clone(),
            });
        }
        taken.insert(name.clone());
        plan.variables.insert(node.id.clone(), name);
    }
}

impl BindingPlan {
    /// The emitted `main` variable feeding `input` of `node`.
    pub fn argument(&self, node: &str, input: &str) -> Option<&str> {
        let b = self.inputs.get(node)?.iter().find(|b| b.input == input)?;
        self.variables.get(&b.source_node).map(String::as_str)
    }
}
