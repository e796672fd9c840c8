//! Static scope analysis: finds identifiers that are used without being bound.

use std::collections::HashSet;

use super::ast::*;
use super::eval::BUILTINS;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unbound {
    pub function: String,
    pub name: String,
    pub span: Span,
    pub is_call: bool,
}

/// Every variable read or assigned outside the scope that binds it, and every
/// call to a name that is neither a program function nor a builtin.
pub fn unbound_identifiers(program: &Program) -> Vec<Unbound> {
    let functions: HashSet<&str> = program
        .functions
        .iter()
        .map(|f| f.name.as_str())
        .chain(BUILTINS.iter().copied())
        .collect();
    let mut out = Vec::new();
    for f in &program.functions {
        let mut checker = Checker {
            function: &f.name,
            functions: &functions,
            scopes: vec![f.params.iter().map(|p| p.name.clone()).collect()],
            out: &mut out,
        };
        checker.block_in_scope(&f.body);
    }
    out
}

struct Checker<'a> {
    function: &'a str,
    functions: &'a HashSet<&'a str>,
    scopes: Vec<HashSet<String>>,
    out: &'a mut Vec<Unbound>,
}

impl Checker<'_> {
    fn bound(&self, name: &str) -> bool {
        self.scopes.iter().any(|s| s.contains(name))
    }

    fn report(&mut self, name: &str, span: Span, is_call: bool) {
        self.out.push(Unbound {
            function: self.function.to_string(),
            name: name.to_string(),
            span,
            is_call,
        });
    }

    fn block(&mut self, block: &Block) {
        self.scopes.push(HashSet::new());
        self.block_in_scope(block);
        self.scopes.pop();
    }

    fn block_in_scope(&mut self, block: &Block) {
        for stmt in &block.stmts {
            for e in stmt.exprs() {
                self.expr(e);
            }
            match &stmt.kind {
                StmtKind::Let { name, .. } => {
                    self.scopes
                        .last_mut()
                        .expect("scope")
                        .insert(name.clone());
                }
                StmtKind::Assign { name, .. } | StmtKind::IndexAssign { name, .. } => {
                    if !self.bound(name) {
                        self.report(name, stmt.span, false);
                    }
                }
                StmtKind::If {
                    then_block,
                    else_block,
                    ..
                } => {
                    self.block(then_block);
                    if let Some(b) = else_block {
                        self.block(b);
                    }
                }
                StmtKind::While { body, .. } => self.block(body),
                StmtKind::ForRange { var, body, .. } => {
                    self.scopes.push(HashSet::from([var.clone()]));
                    self.block(body);
                    self.scopes.pop();
                }
                StmtKind::Return(_) | StmtKind::Print(_) | StmtKind::Expr(_) => {}
            }
        }
    }

    fn expr(&mut self, e: &Expr) {
        let mut found = Vec::new();
        e.walk(&mut |e| match &e.kind {
            ExprKind::Ident(name) => found.push((name.clone(), e.span, false)),
            ExprKind::Call(name, _) => found.push((name.clone(), e.span, true)),
            _ => {}
        });
        for (name, span, is_call) in found {
            let ok = if is_call {
                self.functions.contains(name.as_str())
            } else {
                self.bound(&name)
            };
            if !ok {
                self.report(&name, span, is_call);
            }
        }
    }
}
