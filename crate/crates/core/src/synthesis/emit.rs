use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::render::render;
use super::{Backend, BindingPlan, ResolvedGraph, SynthesisError};
use crate::minilang::ast::{Block, ExprKind, FuncDef, Program, Span, Stmt, StmtKind};
use crate::minilang::Expr;

/// Inclusive 1-based line range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRange {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedProgram {
    pub backend: Backend,
    pub source: String,
    /// Call line of every resolved node, plus the span of call lines of
    /// every input-graph node that expanded into several.
    pub provenance: BTreeMap<String, LineRange>,
}

/// Builds the MiniImp program for a resolved graph and renders it.
///
/// Functions come first, one per distinct concept in node order, renamed per
/// the plan. `main` then calls each node in order, binding each output to
/// its planned variable.
pub fn emit_program(
    graph: &ResolvedGraph,
    plan: &BindingPlan,
    backend: Backend,
) -> Result<GeneratedProgram, SynthesisError> {
    let program = build_program(graph, plan);
    let (source, lines) = render(&program, backend);
    let mut provenance = BTreeMap::new();
    let mut origins: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (node, &line) in graph.nodes.iter().zip(&lines) {
        provenance.insert(node.id.clone(), LineRange { start: line, end: line });
        origins.entry(node.origin.as_str()).or_default().push(line);
    }
    for (origin, lines) in origins {
        if !provenance.contains_key(origin) {
            let start = *lines.iter().min().expect("origin has lines");
            let end = *lines.iter().max().expect("origin has lines");
            provenance.insert(origin.to_string(), LineRange { start, end });
        }
    }
    Ok(GeneratedProgram {
        backend,
        source,
        provenance,
    })
}

fn build_program(graph: &ResolvedGraph, plan: &BindingPlan) -> Program {
    let mut functions = Vec::new();
    let mut emitted = BTreeSet::new();
    for node in &graph.nodes {
        if !emitted.insert(&node.concept) {
            continue;
        }
        let mut f = node.func.clone();
        let name = plan.functions[&node.concept].clone();
        let original = std::mem::replace(&mut f.name, name.clone());
        f.rename_calls(&|callee| (callee == original).then(|| name.clone()));
        functions.push(f);
    }
    let mut body = Block::default();
    for node in &graph.nodes {
        let args = plan.inputs[&node.id]
            .iter()
            .map(|b| Expr::ident(&plan.variables[&b.source_node]))
            .collect();
        let call = Expr::new(
            ExprKind::Call(plan.functions[&node.concept].clone(), args),
            Span::default(),
        );
        let kind = match plan.variables.get(&node.id) {
            Some(var) => StmtKind::Let {
                name: var.clone(),
                value: call,
            },
            None => StmtKind::Expr(call),
        };
        body.stmts.push(Stmt::new(kind, Span::default()));
    }
    functions.push(FuncDef {
        name: "main".into(),
        params: Vec::new(),
        return_dtype: None,
        body,
        span: Span::default(),
    });
    Program { functions }
}

#[cfg(test)]
mod tests {
    use super::super::{expand_graph, harmonize, synthesize};
    use super::*;
    use crate::graph::{ConceptGraph, GraphNode};
    use crate::minilang::{self, Dtype, Value};
    use crate::store::{Concept, Store, TypedVar};

    fn store() -> Store {
        let mut s = Store::new();
        s.add_concept(
            Concept::terminal("read".parse().unwrap(), "Read", "func read() -> list { return [3, 1, 2]; }")
                .with_output(TypedVar::new("xs", Dtype::List)),
        )
        .unwrap();
        s.add_concept(
            Concept::terminal(
                "rev".parse().unwrap(),
                "Reverse",
                "func rev(xs: list) -> list {\n    if len(xs) == 0 { return xs; }\n    let out = [];\n    for i in range(0, len(xs)) { out = push(out, xs[len(xs) - 1 - i]); }\n    return out;\n}",
            )
            .with_inputs(vec![TypedVar::new("xs", Dtype::List)])
            .with_output(TypedVar::new("xs", Dtype::List)),
        )
        .unwrap();
        s.add_concept(
            Concept::terminal("show".parse().unwrap(), "Show", "func show(xs: list) { print(xs); }")
                .with_inputs(vec![TypedVar::new("xs", Dtype::List)]),
        )
        .unwrap();
        s
    }

    fn pipeline(concepts: &[&str]) -> ConceptGraph {
        ConceptGraph {
            nodes: concepts
                .iter()
                .enumerate()
                .map(|(i, c)| GraphNode::new(format!("n{i}"), c.parse().unwrap()))
                .collect(),
            edges: (1..concepts.len())
                .map(|i| (format!("n{}", i - 1), format!("n{i}")))
                .collect(),
        }
    }

    #[test]
    fn minilang_output_runs() {
        let g = pipeline(&["read", "rev", "rev", "show"]);
        let out = synthesize(&store(), &g, Backend::Minilang).unwrap();
        let program = minilang::parse(&out.source).unwrap();
        assert_eq!(minilang::pretty_print(&program), out.source);
        assert!(minilang::unbound_identifiers(&program).is_empty());
        // `rev` is emitted once and called twice
        assert_eq!(out.source.matches("func rev(").count(), 1);
        let run = minilang::evaluate(&program, "main", &[], 10_000).unwrap();
        assert_eq!(run.stdout, "[3, 1, 2]\n");
        assert_eq!(run.result, None::<Value>);
    }

    #[test]
    fn provenance_points_at_calls() {
        let g = pipeline(&["read", "rev", "show"]);
        for backend in Backend::ALL {
            let out = synthesize(&store(), &g, backend).unwrap();
            let lines: Vec<&str> = out.source.lines().collect();
            for (node, callee) in [("n0", "read("), ("n1", "rev("), ("n2", "show(")] {
                let r = out.provenance[node];
                assert_eq!(r.start, r.end);
                assert!(lines[r.start - 1].contains(callee), "{backend}: {node}");
            }
        }
    }

    #[test]
    fn renamed_recursive_function_calls_itself() {
        let mut s = Store::new();
        s.add_concept(
            Concept::terminal(
                "count-down".parse().unwrap(),
                "Count down",
                "func len_down(n: int) -> int { if n == 0 { return 0; } return len_down(n - 1); }",
            )
            .with_inputs(vec![TypedVar::new("n", Dtype::Int)])
            .with_output(TypedVar::new("n", Dtype::Int)),
        )
        .unwrap();
        s.add_concept(
            Concept::terminal("seed".parse().unwrap(), "Seed", "func main() -> int { return 3; }")
                .with_output(TypedVar::new("n", Dtype::Int)),
        )
        .unwrap();
        let g = pipeline(&["seed", "count-down"]);
        let rg = expand_graph(&s, &g).unwrap();
        let plan = harmonize(&rg).unwrap();
        let out = emit_program(&rg, &plan, Backend::Minilang).unwrap();
        let program = minilang::parse(&out.source).unwrap();
        assert!(out.source.contains("func main_n0() -> int"));
        assert!(minilang::unbound_identifiers(&program).is_empty());
        minilang::evaluate(&program, "main", &[], 10_000).unwrap();
    }
}
