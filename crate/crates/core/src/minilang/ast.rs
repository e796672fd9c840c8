use std::fmt;

use serde::{Deserialize, Serialize};

/// Location of a syntax element in its source text.
///
/// `line` and `column` are 1-based, `offset` and `len` are byte counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub len: usize,
}

impl Span {
    pub fn new(offset: usize, line: usize, column: usize, len: usize) -> Self {
        Span {
            offset,
            line,
            column,
            len,
        }
    }

    /// Smallest span covering both `self` and `other` (assumes `self` starts first).
    pub fn to(self, other: Span) -> Span {
        let end = (other.offset + other.len).max(self.offset + self.len);
        Span {
            len: end - self.offset,
            ..self
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// The closed MiniImp type set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Int,
    Real,
    Bool,
    Str,
    List,
}

impl Dtype {
    pub const ALL: [Dtype; 5] = [Dtype::Int, Dtype::Real, Dtype::Bool, Dtype::Str, Dtype::List];

    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::Int => "int",
            Dtype::Real => "real",
            Dtype::Bool => "bool",
            Dtype::Str => "str",
            Dtype::List => "list",
        }
    }

    pub fn from_name(name: &str) -> Option<Dtype> {
        Dtype::ALL.into_iter().find(|d| d.as_str() == name)
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub functions: Vec<FuncDef>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub dtype: Dtype,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuncDef {
    pub name: String,
    pub params: Vec<Param>,
    pub return_dtype: Option<Dtype>,
    pub body: Block,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Let {
        name: String,
        value: Expr,
    },
    Assign {
        name: String,
        value: Expr,
    },
    IndexAssign {
        name: String,
        index: Expr,
        value: Expr,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    ForRange {
        var: String,
        start: Expr,
        end: Expr,
        body: Block,
    },
    Return(Option<Expr>),
    Print(Expr),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Not => "not",
        }
    }
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "or",
            BinaryOp::And => "and",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

/// Precedence of `not`, between `and` and the comparisons.
pub const NOT_PRECEDENCE: u8 = 3;
/// Precedence of unary minus.
pub const NEG_PRECEDENCE: u8 = 7;
/// Postfix (index, call) and primary expressions.
pub const ATOM_PRECEDENCE: u8 = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
    Ident(String),
    List(Vec<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

impl ExprKind {
    pub fn precedence(&self) -> u8 {
        match self {
            ExprKind::Binary(op, _, _) => op.precedence(),
            ExprKind::Unary(UnaryOp::Not, _) => NOT_PRECEDENCE,
            ExprKind::Unary(UnaryOp::Neg, _) => NEG_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn ident(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Ident(name.into()), Span::default())
    }

    /// Calls `f` on every expression in this tree, outermost first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::List(items) | ExprKind::Call(_, items) => {
                items.iter().for_each(|e| e.walk(f));
            }
            ExprKind::Unary(_, e) => e.walk(f),
            ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Int(_)
            | ExprKind::Real(_)
            | ExprKind::Bool(_)
            | ExprKind::Str(_)
            | ExprKind::Ident(_) => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match &mut self.kind {
            ExprKind::List(items) | ExprKind::Call(_, items) => {
                items.iter_mut().for_each(|e| e.walk_mut(f));
            }
            ExprKind::Unary(_, e) => e.walk_mut(f),
            ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
                a.walk_mut(f);
                b.walk_mut(f);
            }
            ExprKind::Int(_)
            | ExprKind::Real(_)
            | ExprKind::Bool(_)
            | ExprKind::Str(_)
            | ExprKind::Ident(_) => {}
        }
    }

    /// Variables read by this expression, in evaluation order, with repeats.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::Ident(name) = &e.kind {
                out.push(name.as_str());
            }
        });
        out
    }
}

impl Stmt {
    pub fn new(kind: StmtKind, span: Span) -> Self {
        Stmt { kind, span }
    }

    /// Direct child blocks (then/else/loop bodies).
    pub fn blocks(&self) -> Vec<&Block> {
        match &self.kind {
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => std::iter::once(then_block).chain(else_block.iter()).collect(),
            StmtKind::While { body, .. } | StmtKind::ForRange { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    /// Expressions evaluated by this statement itself, not by nested blocks.
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Let { value, .. } | StmtKind::Assign { value, .. } => vec![value],
            StmtKind::IndexAssign { index, value, .. } => vec![index, value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::ForRange { start, end, .. } => vec![start, end],
            StmtKind::Return(value) => value.iter().collect(),
            StmtKind::Print(e) | StmtKind::Expr(e) => vec![e],
        }
    }

    fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            StmtKind::Let { value, .. } | StmtKind::Assign { value, .. } => vec![value],
            StmtKind::IndexAssign { index, value, .. } => vec![index, value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::ForRange { start, end, .. } => vec![start, end],
            StmtKind::Return(value) => value.iter_mut().collect(),
            StmtKind::Print(e) | StmtKind::Expr(e) => vec![e],
        }
    }

    fn blocks_mut(&mut self) -> Vec<&mut Block> {
        match &mut self.kind {
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => std::iter::once(then_block)
                .chain(else_block.iter_mut())
                .collect(),
            StmtKind::While { body, .. } | StmtKind::ForRange { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    /// Name bound or rebound by this statement, if any.
    pub fn defined_var(&self) -> Option<&str> {
        match &self.kind {
            StmtKind::Let { name, .. }
            | StmtKind::Assign { name, .. }
            | StmtKind::IndexAssign { name, .. } => Some(name),
            StmtKind::ForRange { var, .. } => Some(var),
            _ => None,
        }
    }
}

impl Block {
    /// Pre-order traversal over all statements, nested ones included.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        for stmt in &self.stmts {
            f(stmt);
            for block in stmt.blocks() {
                block.walk(f);
            }
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        for stmt in &mut self.stmts {
            f(stmt);
            for block in stmt.blocks_mut() {
                block.walk_mut(f);
            }
        }
    }

    pub fn statement_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

impl FuncDef {
    /// Rewrites every call site whose callee appears in `renames`.
    pub fn rename_calls(&mut self, renames: &impl Fn(&str) -> Option<String>) {
        self.body.walk_mut(&mut |stmt| {
            for expr in stmt.exprs_mut() {
                expr.walk_mut(&mut |e| {
                    if let ExprKind::Call(callee, _) = &mut e.kind {
                        if let Some(new) = renames(callee) {
                            *callee = new;
                        }
                    }
                });
            }
        });
    }

    /// Applies a consistent identifier renaming to parameters and variables.
    /// Function names and callees are left alone.
    pub fn rename_variables(&mut self, renames: &impl Fn(&str) -> Option<String>) {
        for p in &mut self.params {
            if let Some(new) = renames(&p.name) {
                p.name = new;
            }
        }
        self.body.walk_mut(&mut |stmt| {
            match &mut stmt.kind {
                StmtKind::Let { name, .. }
                | StmtKind::Assign { name, .. }
                | StmtKind::IndexAssign { name, .. }
                | StmtKind::ForRange { var: name, .. } => {
                    if let Some(new) = renames(name) {
                        *name = new;
                    }
                }
                _ => {}
            }
            for expr in stmt.exprs_mut() {
                expr.walk_mut(&mut |e| {
                    if let ExprKind::Ident(name) = &mut e.kind {
                        if let Some(new) = renames(name) {
                            *name = new;
                        }
                    }
                });
            }
        });
    }
}

/// Structural copies with every span zeroed, for comparisons modulo spans.
pub trait StripSpans {
    fn without_spans(&self) -> Self;
}

impl StripSpans for Program {
    fn without_spans(&self) -> Self {
        Program {
            functions: self.functions.iter().map(|f| f.without_spans()).collect(),
        }
    }
}

impl StripSpans for FuncDef {
    fn without_spans(&self) -> Self {
        let mut f = self.clone();
        f.span = Span::default();
        for p in &mut f.params {
            p.span = Span::default();
        }
        f.body.walk_mut(&mut |stmt| {
            stmt.span = Span::default();
            for expr in stmt.exprs_mut() {
                expr.walk_mut(&mut |e| e.span = Span::default());
            }
        });
        f
    }
}

impl StripSpans for Expr {
    fn without_spans(&self) -> Self {
        let mut e = self.clone();
        e.walk_mut(&mut |e| e.span = Span::default());
        e
    }
}
