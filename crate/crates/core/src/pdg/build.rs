use std::collections::BTreeSet;

use serde::Serialize;

use crate::minilang::ast::{Block, ExprKind, FuncDef, Span, Stmt, StmtKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Entry,
    Let,
    Assign,
    IndexAssign,
    If,
    While,
    For,
    Return,
    Print,
    Expr,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Entry => "entry",
            NodeKind::Let => "let",
            NodeKind::Assign => "assign",
            NodeKind::IndexAssign => "index-assign",
            NodeKind::If => "if",
            NodeKind::While => "while",
            NodeKind::For => "for",
            NodeKind::Return => "return",
            NodeKind::Print => "print",
            NodeKind::Expr => "expr",
        }
    }

    fn of(stmt: &Stmt) -> NodeKind {
        match stmt.kind {
            StmtKind::Let { .. } => NodeKind::Let,
            StmtKind::Assign { .. } => NodeKind::Assign,
            StmtKind::IndexAssign { .. } => NodeKind::IndexAssign,
            StmtKind::If { .. } => NodeKind::If,
            StmtKind::While { .. } => NodeKind::While,
            StmtKind::ForRange { .. } => NodeKind::For,
            StmtKind::Return(_) => NodeKind::Return,
            StmtKind::Print(_) => NodeKind::Print,
            StmtKind::Expr(_) => NodeKind::Expr,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PdgNode {
    pub id: usize,
    pub kind: NodeKind,
    pub span: Span,
    /// Operator symbols in the statement's own expressions, sorted.
    pub ops: Vec<&'static str>,
    /// Variables read by the statement (an index assignment reads its list).
    pub uses: BTreeSet<String>,
    /// Variable written by the statement; the entry node writes every
    /// parameter.
    pub defs: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Control,
    Data,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PdgEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
}

/// Statement-level dependence graph. Node 0 is the entry; statements follow
/// in source order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pdg {
    pub nodes: Vec<PdgNode>,
    pub edges: Vec<PdgEdge>,
}

impl Pdg {
    pub fn data_edges(&self) -> impl Iterator<Item = &PdgEdge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Data)
    }

    pub fn control_edges(&self) -> impl Iterator<Item = &PdgEdge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Control)
    }
}

struct Builder {
    nodes: Vec<PdgNode>,
    /// Control-flow successors per node; `None` marks the function exit.
    cfg: Vec<Vec<Option<usize>>>,
    control: Vec<(usize, usize)>,
}

impl Builder {
    fn add(&mut self, stmt: &Stmt, parent: usize) -> usize {
        let id = self.nodes.len();
        let mut uses: BTreeSet<String> = stmt
            .exprs()
            .iter()
            .flat_map(|e| e.variables())
            .map(str::to_string)
            .collect();
        if let StmtKind::IndexAssign { name, .. } = &stmt.kind {
            uses.insert(name.clone());
        }
        let mut ops = Vec::new();
        for e in stmt.exprs() {
            e.walk(&mut |e| match &e.kind {
                ExprKind::Unary(op, _) => ops.push(op.symbol()),
                ExprKind::Binary(op, _, _) => ops.push(op.symbol()),
                _ => {}
            });
        }
        ops.sort_unstable();
        self.nodes.push(PdgNode {
            id,
            kind: NodeKind::of(stmt),
            span: stmt.span,
            ops,
            uses,
            defs: stmt.defined_var().map(str::to_string).into_iter().collect(),
        });
        self.cfg.push(Vec::new());
        self.control.push((parent, id));
        id
    }

    fn link(&mut self, preds: &[usize], to: Option<usize>) {
        for &p in preds {
            if !self.cfg[p].contains(&to) {
                self.cfg[p].push(to);
            }
        }
    }

    /// Adds the statements of `block`, wiring control flow from `preds`;
    /// returns the nodes that fall through to whatever follows.
    fn block(&mut self, block: &Block, preds: Vec<usize>, parent: usize) -> Vec<usize> {
        let mut preds = preds;
        for stmt in &block.stmts {
            let id = self.add(stmt, parent);
            self.link(&preds, Some(id));
            preds = match &stmt.kind {
                StmtKind::Return(_) => {
                    self.link(&[id], None);
                    Vec::new()
                }
                StmtKind::If {
                    then_block,
                    else_block,
                    ..
                } => {
                    let mut out = self.block(then_block, vec![id], id);
                    match else_block {
                        Some(b) => out.extend(self.block(b, vec![id], id)),
                        None => out.push(id),
                    }
                    out.sort_unstable();
                    out.dedup();
                    out
                }
                StmtKind::While { body, .. } | StmtKind::ForRange { body, .. } => {
                    let tails = self.block(body, vec![id], id);
                    self.link(&tails, Some(id));
                    vec![id]
                }
                _ => vec![id],
            };
        }
        preds
    }
}

/// Builds the dependence graph of one function.
///
/// Control edges run from the innermost enclosing `if`, `while` or `for`
/// to each statement (from the entry at top level). Data edges come from
/// reaching definitions over the structured control-flow graph, loop
/// back-edges included, with parameters defined at the entry.
pub fn build_pdg(func: &FuncDef) -> Pdg {
    let mut b = Builder {
        nodes: vec![PdgNode {
            id: 0,
            kind: NodeKind::Entry,
            span: func.span,
            ops: Vec::new(),
            uses: BTreeSet::new(),
            defs: func.params.iter().map(|p| p.name.clone()).collect(),
        }],
        cfg: vec![Vec::new()],
        control: Vec::new(),
    };
    let tails = b.block(&func.body, vec![0], 0);
    b.link(&tails, None);

    let reaching = reaching_definitions(&b.nodes, &b.cfg);
    let mut edges: BTreeSet<PdgEdge> = b
        .control
        .iter()
        .map(|&(from, to)| PdgEdge {
            from,
            to,
            kind: EdgeKind::Control,
            var: None,
        })
        .collect();
    for (v, node) in b.nodes.iter().enumerate() {
        for (var, u) in &reaching[v] {
            if node.uses.contains(var) {
                edges.insert(PdgEdge {
                    from: *u,
                    to: v,
                    kind: EdgeKind::Data,
                    var: Some(var.clone()),
                });
            }
        }
    }
    Pdg {
        nodes: b.nodes,
        edges: edges.into_iter().collect(),
    }
}

/// Definitions `(var, node)` reaching the start of each node.
fn reaching_definitions(
    nodes: &[PdgNode],
    cfg: &[Vec<Option<usize>>],
) -> Vec<BTreeSet<(String, usize)>> {
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (u, succs) in cfg.iter().enumerate() {
        for v in succs.iter().flatten() {
            preds[*v].push(u);
        }
    }
    let mut reach_in: Vec<BTreeSet<(String, usize)>> = vec![BTreeSet::new(); nodes.len()];
    let mut reach_out: Vec<BTreeSet<(String, usize)>> = vec![BTreeSet::new(); nodes.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..nodes.len() {
            let input: BTreeSet<(String, usize)> = preds[v]
                .iter()
                .flat_map(|&p| reach_out[p].iter().cloned())
                .collect();
            let mut output: BTreeSet<(String, usize)> = input
                .iter()
                .filter(|(var, _)| !nodes[v].defs.contains(var))
                .cloned()
                .collect();
            output.extend(nodes[v].defs.iter().map(|d| (d.clone(), v)));
            if output != reach_out[v] {
                reach_out[v] = output;
                changed = true;
            }
            reach_in[v] = input;
        }
    }
    reach_in
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parse_function;

    fn data(pdg: &Pdg) -> Vec<(usize, usize, &str)> {
        pdg.data_edges()
            .map(|e| (e.from, e.to, e.var.as_deref().unwrap()))
            .collect()
    }

    fn control(pdg: &Pdg) -> Vec<(usize, usize)> {
        pdg.control_edges().map(|e| (e.from, e.to)).collect()
    }

    #[test]
    fn two_statement_body() {
        let f = parse_function("func f(a: int) -> int { let b = a + 1; return b; }").unwrap();
        let pdg = build_pdg(&f);
        assert_eq!(data(&pdg), [(0, 1, "a"), (1, 2, "b")]);
        assert_eq!(control(&pdg), [(0, 1), (0, 2)]);
    }

    #[test]
    fn independent_prints() {
        let f = parse_function("func f() { print(1); print(2); print(3); }").unwrap();
        let pdg = build_pdg(&f);
        assert!(data(&pdg).is_empty());
        assert_eq!(control(&pdg), [(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn loop_accumulator_has_a_self_edge() {
        let f = parse_function(
            "func f(n: int) -> int { let s = 0; let i = 0; while i < n { s = s + i; i = i + 1; } return s; }",
        )
        .unwrap();
        let pdg = build_pdg(&f);
        let d = data(&pdg);
        // nodes: 1 let s, 2 let i, 3 while, 4 s = s + i, 5 i = i + 1, 6 return
        assert!(d.contains(&(4, 4, "s")));
        assert!(d.contains(&(5, 4, "i")));
        assert!(d.contains(&(5, 3, "i")));
        assert!(d.contains(&(4, 6, "s")));
        assert!(d.contains(&(1, 6, "s")));
        assert_eq!(control(&pdg), [(0, 1), (0, 2), (0, 3), (0, 6), (3, 4), (3, 5)]);
    }

    #[test]
    fn return_cuts_the_flow() {
        let f = parse_function(
            "func f(a: int) -> int { if a > 0 { a = 1; return a; } return a; }",
        )
        .unwrap();
        let pdg = build_pdg(&f);
        // the final return only sees the parameter, not the assignment
        assert_eq!(data(&pdg), [(0, 1, "a"), (0, 4, "a"), (2, 3, "a")]);
    }
}
