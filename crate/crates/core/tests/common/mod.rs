//! Fixtures and independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use codemapper::demo;
use codemapper::graph::{ConceptGraph, GraphNode};
use codemapper::minilang::ast::{Block, Expr, ExprKind, FuncDef, StmtKind};
use codemapper::minilang::{self, Dtype};
use codemapper::store::{Concept, ConceptId, Store, TypedVar};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn cid(s: &str) -> ConceptId {
    s.parse().unwrap()
}

/// Every bundled snippet, counters included, as `(stem, source)`.
pub fn corpus() -> Vec<(&'static str, &'static str)> {
    demo::SNIPPETS.iter().chain(demo::COUNTERS).copied().collect()
}

pub fn corpus_functions() -> Vec<(&'static str, FuncDef)> {
    corpus()
        .into_iter()
        .map(|(stem, src)| (stem, minilang::parse_function(src).unwrap()))
        .collect()
}

// ---------------------------------------------------------------------------
// Random hierarchies

/// A random isa DAG. Index order is a topological order (children after
/// parents); ids are assigned in shuffled order so id order and depth are
/// unrelated.
pub struct Hierarchy {
    pub store: Store,
    pub ids: Vec<ConceptId>,
    /// `(child, parent)` index pairs.
    pub edges: Vec<(usize, usize)>,
    pub implemented: Vec<bool>,
}

pub fn random_hierarchy(rng: &mut StdRng, max_nodes: usize) -> Hierarchy {
    let n = rng.random_range(1..=max_nodes);
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let ids: Vec<ConceptId> = labels.iter().map(|l| cid(&format!("k{l:02}"))).collect();
    let density = rng.random_range(0.02..0.25);
    let implemented_share = rng.random_range(0.05..0.6);
    let implemented: Vec<bool> = (0..n).map(|_| rng.random_bool(implemented_share)).collect();
    let mut store = Store::new();
    for (i, id) in ids.iter().enumerate() {
        let concept = if implemented[i] {
            let src = format!("func {}() {{ print({i}); }}", id.as_str());
            Concept::terminal(id.clone(), id.as_str(), src)
        } else {
            Concept::abstract_concept(id.clone(), id.as_str())
        };
        store.add_concept(concept).unwrap();
    }
    let mut edges = Vec::new();
    for child in 1..n {
        for parent in 0..child {
            if rng.random_bool(density) {
                store.link_specialization(&ids[child], &ids[parent]).unwrap();
                edges.push((child, parent));
            }
        }
    }
    Hierarchy {
        store,
        ids,
        edges,
        implemented,
    }
}

/// Deepest implemented node at or below `root`, depth being the longest
/// isa path. Finds depths by stepping the set of nodes at exactly `k` edges
/// below the root until it empties; ties go to the smallest id.
pub fn brute_force_mu(h: &Hierarchy, root: usize) -> Option<ConceptId> {
    let mut deepest: BTreeMap<usize, usize> = BTreeMap::new();
    let mut layer: BTreeSet<usize> = BTreeSet::from([root]);
    let mut k = 0;
    while !layer.is_empty() {
        for &v in &layer {
            deepest.insert(v, k);
        }
        layer = h
            .edges
            .iter()
            .filter(|(_, p)| layer.contains(p))
            .map(|&(c, _)| c)
            .collect();
        k += 1;
        assert!(k <= h.ids.len(), "hierarchy has a cycle");
    }
    deepest
        .iter()
        .filter(|(v, _)| h.implemented[**v])
        .map(|(&v, &d)| (d, &h.ids[v]))
        .max_by(|(da, a), (db, b)| da.cmp(db).then_with(|| b.cmp(a)))
        .map(|(_, id)| id.clone())
}

/// Kahn's algorithm on `(from, to)` pairs over arbitrary labels.
pub fn kahn_acyclic<T: Ord + Clone>(edges: &[(T, T)]) -> bool {
    let mut indegree: BTreeMap<T, usize> = BTreeMap::new();
    for (a, b) in edges {
        indegree.entry(a.clone()).or_default();
        *indegree.entry(b.clone()).or_default() += 1;
    }
    let mut ready: Vec<T> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(v, _)| v.clone())
        .collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for (a, b) in edges {
            if *a == v {
                let d = indegree.get_mut(b).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(b.clone());
                }
            }
        }
    }
    seen == indegree.len()
}

// ---------------------------------------------------------------------------
// PDG oracle

fn stmt_count(block: &Block) -> usize {
    block
        .stmts
        .iter()
        .map(|s| {
            1 + match &s.kind {
                StmtKind::If {
                    then_block,
                    else_block,
                    ..
                } => stmt_count(then_block) + else_block.as_ref().map_or(0, stmt_count),
                StmtKind::While { body, .. } | StmtKind::ForRange { body, .. } => {
                    stmt_count(body)
                }
                _ => 0,
            }
        })
        .sum()
}

pub fn statement_count(func: &FuncDef) -> usize {
    stmt_count(&func.body)
}

fn idents(e: &Expr, out: &mut BTreeSet<String>) {
    match &e.kind {
        ExprKind::Ident(name) => {
            out.insert(name.clone());
        }
        ExprKind::List(items) | ExprKind::Call(_, items) => {
            items.iter().for_each(|i| idents(i, out));
        }
        ExprKind::Unary(_, a) => idents(a, out),
        ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
            idents(a, out);
            idents(b, out);
        }
        ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Bool(_) | ExprKind::Str(_) => {}
    }
}

/// Control-flow graph in continuation style: each statement hands control
/// to its `follow` (the next statement, or what follows the block).
pub struct OracleCfg {
    pub succ: Vec<BTreeSet<usize>>,
    pub uses: Vec<BTreeSet<String>>,
    pub defs: Vec<BTreeSet<String>>,
}

impl OracleCfg {
    pub fn new(func: &FuncDef) -> Self {
        let n = 1 + statement_count(func);
        let mut cfg = OracleCfg {
            succ: vec![BTreeSet::new(); n],
            uses: vec![BTreeSet::new(); n],
            defs: vec![BTreeSet::new(); n],
        };
        cfg.defs[0] = func.params.iter().map(|p| p.name.clone()).collect();
        if !func.body.stmts.is_empty() {
            cfg.succ[0].insert(1);
        }
        cfg.wire(&func.body, 1, None);
        cfg
    }

    fn wire(&mut self, block: &Block, first: usize, follow: Option<usize>) {
        let mut id = first;
        for (k, stmt) in block.stmts.iter().enumerate() {
            let size = stmt_count(&Block {
                stmts: vec![stmt.clone()],
            });
            let next = if k + 1 < block.stmts.len() {
                Some(id + size)
            } else {
                follow
            };
            let mut uses = BTreeSet::new();
            let mut succ: Vec<Option<usize>> = vec![next];
            match &stmt.kind {
                StmtKind::Let { name, value } | StmtKind::Assign { name, value } => {
                    idents(value, &mut uses);
                    self.defs[id].insert(name.clone());
                }
                StmtKind::IndexAssign { name, index, value } => {
                    idents(index, &mut uses);
                    idents(value, &mut uses);
                    uses.insert(name.clone());
                    self.defs[id].insert(name.clone());
                }
                StmtKind::If {
                    cond,
                    then_block,
                    else_block,
                } => {
                    idents(cond, &mut uses);
                    let then_first = id + 1;
                    let then_size = stmt_count(then_block);
                    succ = vec![if then_size > 0 { Some(then_first) } else { next }];
                    self.wire(then_block, then_first, next);
                    match else_block {
                        Some(b) => {
                            let else_first = then_first + then_size;
                            succ.push(if b.stmts.is_empty() { next } else { Some(else_first) });
                            self.wire(b, else_first, next);
                        }
                        None => succ.push(next),
                    }
                }
                StmtKind::While { cond, body } => {
                    idents(cond, &mut uses);
                    succ.push(Some(if body.stmts.is_empty() { id } else { id + 1 }));
                    self.wire(body, id + 1, Some(id));
                }
                StmtKind::ForRange {
                    var,
                    start,
                    end,
                    body,
                } => {
                    idents(start, &mut uses);
                    idents(end, &mut uses);
                    self.defs[id].insert(var.clone());
                    succ.push(Some(if body.stmts.is_empty() { id } else { id + 1 }));
                    self.wire(body, id + 1, Some(id));
                }
                StmtKind::Return(e) => {
                    if let Some(e) = e {
                        idents(e, &mut uses);
                    }
                    succ.clear();
                }
                StmtKind::Print(e) | StmtKind::Expr(e) => idents(e, &mut uses),
            }
            self.uses[id] = uses;
            self.succ[id].extend(succ.into_iter().flatten());
            id += size;
        }
    }

    /// `(def, use, var)` for every definition that reaches a use along some
    /// definition-clear path. Enumerates simple paths out of each defining
    /// node, up to `2 * nodes` edges; a definition-clear walk always
    /// contains a definition-clear simple path, so this is exhaustive.
    pub fn data_edges(&self) -> BTreeSet<(usize, usize, String)> {
        let n = self.succ.len();
        let mut out = BTreeSet::new();
        for d in 0..n {
            for var in &self.defs[d] {
                let mut on_path = vec![false; n];
                let mut stack: Vec<(usize, Vec<usize>)> =
                    vec![(d, self.succ[d].iter().copied().collect())];
                while let Some((_, pending)) = stack.last_mut() {
                    let Some(next) = pending.pop() else {
                        let (at, _) = stack.pop().unwrap();
                        on_path[at] = false;
                        continue;
                    };
                    if self.uses[next].contains(var) {
                        out.insert((d, next, var.clone()));
                    }
                    let blocked = next == d || on_path[next] || self.defs[next].contains(var);
                    if !blocked && stack.len() < 2 * n {
                        on_path[next] = true;
                        stack.push((next, self.succ[next].iter().copied().collect()));
                    }
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Synthesis fixtures

fn chain(steps: &[(&str, &str)]) -> ConceptGraph {
    ConceptGraph {
        nodes: steps.iter().map(|(n, c)| GraphNode::new(*n, cid(c))).collect(),
        edges: steps
            .windows(2)
            .map(|w| (w[0].0.to_string(), w[1].0.to_string()))
            .collect(),
    }
}

/// Stores and graphs that synthesize successfully.
pub fn synthesis_fixtures() -> Vec<(&'static str, Store, ConceptGraph)> {
    vec![
        ("fig4-insertion", demo::build_fig6(true), demo::fig4_graph()),
        ("fig4-merge", demo::build_fig6(false), demo::fig4_graph()),
        (
            "merge-sort-direct",
            demo::fig6_store(),
            chain(&[("r", "read-list"), ("s", "merge-sort"), ("p", "print-list")]),
        ),
        (
            "merge-steps-inline",
            demo::fig6_store(),
            chain(&[
                ("r", "read-list"),
                ("d", "divide-list"),
                ("h", "merge-sort-half"),
                ("m", "merge-sorted-lists"),
                ("p", "print-list"),
            ]),
        ),
        (
            "read-print",
            demo::fig6_store(),
            chain(&[("r", "read-list"), ("p", "print-list")]),
        ),
        (
            "length-counter",
            counter_store(),
            chain(&[("r", "read-list"), ("l", "list-length"), ("c", "counter-loop")]),
        ),
    ]
}

/// The example store plus a concept turning a list into an int.
pub fn counter_store() -> Store {
    let mut store = demo::fig6_store();
    store
        .add_concept(
            Concept::terminal(cid("list-length"), "List length", "func length(xs: list) -> int { return len(xs); }")
                .with_inputs(vec![TypedVar::new("xs", Dtype::List)])
                .with_output(TypedVar::new("count", Dtype::Int)),
        )
        .unwrap();
    store
}

pub fn fan_in_graph() -> ConceptGraph {
    ConceptGraph {
        nodes: vec![
            GraphNode::new("a", cid("read-list")),
            GraphNode::new("b", cid("read-list")),
            GraphNode::new("show", cid("print-list")),
        ],
        edges: vec![("a".into(), "show".into()), ("b".into(), "show".into())],
    }
}
