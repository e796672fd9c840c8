use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::pretty::{format_real, quote_str};
use super::{EvalError, RuntimeErrorKind};

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;
pub const MAX_CALL_DEPTH: usize = 200;
const EVAL_STACK_BYTES: usize = 256 * 1024 * 1024;

/// Builtin functions; `range` only appears inside `for`.
pub const BUILTINS: &[&str] = &["len", "push", "swap"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
    List(Vec<Value>),
}

impl Value {
    pub fn dtype(&self) -> Dtype {
        match self {
            Value::Int(_) => Dtype::Int,
            Value::Real(_) => Dtype::Real,
            Value::Bool(_) => Dtype::Bool,
            Value::Str(_) => Dtype::Str,
            Value::List(_) => Dtype::List,
        }
    }

    fn write_nested(&self, out: &mut String) {
        match self {
            Value::Str(s) => out.push_str(&quote_str(s)),
            other => out.push_str(&other.to_string()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => f.write_str(&format_real(*v)),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => f.write_str(s),
            Value::List(items) => {
                let mut out = String::from("[");
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write_nested(&mut out);
                }
                out.push(']');
                f.write_str(&out)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub result: Option<Value>,
    pub stdout: String,
}

/// Runs `entry` with `args`. Deterministic and never mutates `program`.
pub fn evaluate(
    program: &Program,
    entry: &str,
    args: &[Value],
    step_limit: u64,
) -> Result<Outcome, EvalError> {
    let func = program
        .functions
        .iter()
        .find(|f| f.name == entry)
        .ok_or_else(|| EvalError::UnknownEntry(entry.to_string()))?;
    if func.params.len() != args.len() {
        return Err(EvalError::BadArguments(format!(
            "`{entry}` takes {} argument(s), got {}",
            func.params.len(),
            args.len()
        )));
    }
    for (p, a) in func.params.iter().zip(args) {
        if p.dtype != a.dtype() {
            return Err(EvalError::BadArguments(format!(
                "parameter `{}` expects {}, got {}",
                p.name,
                p.dtype,
                a.dtype()
            )));
        }
    }
    let mut interp = Interpreter {
        functions: program
            .functions
            .iter()
            .map(|f| (f.name.as_str(), f))
            .collect(),
        steps: 0,
        step_limit,
        depth: 0,
        stdout: String::new(),
    };
    // deep MiniImp recursion needs more stack than a default thread offers
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .name("minilang-eval".into())
            .stack_size(EVAL_STACK_BYTES)
            .spawn_scoped(scope, move || {
                let result = interp.call(func, args.to_vec(), func.span)?;
                Ok(Outcome {
                    result,
                    stdout: interp.stdout,
                })
            })
            .expect("spawn evaluator thread")
            .join()
            .expect("evaluator thread panicked")
    })
}

/// Evaluates a closed constant expression such as `[5, 2, 9, 1]`.
pub fn evaluate_constant(expr: &Expr) -> Result<Value, EvalError> {
    let mut interp = Interpreter {
        functions: HashMap::new(),
        steps: 0,
        step_limit: DEFAULT_STEP_LIMIT,
        depth: 0,
        stdout: String::new(),
    };
    let mut env = Env { scopes: vec![] };
    interp.expr(expr, &mut env)
}

struct Interpreter<'a> {
    functions: HashMap<&'a str, &'a FuncDef>,
    steps: u64,
    step_limit: u64,
    depth: usize,
    stdout: String,
}

struct Env {
    scopes: Vec<HashMap<String, Value>>,
}

impl Env {
    fn get(&self, name: &str) -> Option<&Value> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn get_mut(&mut self, name: &str) -> Option<&mut Value> {
        self.scopes.iter_mut().rev().find_map(|s| s.get_mut(name))
    }

    fn bind(&mut self, name: &str, v: Value) {
        self.scopes
            .last_mut()
            .expect("scope")
            .insert(name.to_string(), v);
    }
}

enum Flow {
    Normal,
    Return(Option<Value>),
}

fn rt(kind: RuntimeErrorKind, span: Span, message: impl Into<String>) -> EvalError {
    EvalError::Runtime {
        kind,
        span,
        message: message.into(),
    }
}

fn mismatch(span: Span, message: impl Into<String>) -> EvalError {
    rt(RuntimeErrorKind::TypeMismatch, span, message)
}

impl<'a> Interpreter<'a> {
    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.step_limit {
            return Err(EvalError::StepLimitExceeded(self.step_limit));
        }
        Ok(())
    }

    fn call(
        &mut self,
        func: &'a FuncDef,
        args: Vec<Value>,
        call_span: Span,
    ) -> Result<Option<Value>, EvalError> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(EvalError::CallDepthExceeded(MAX_CALL_DEPTH));
        }
        self.depth += 1;
        let mut frame = HashMap::new();
        for (p, a) in func.params.iter().zip(args) {
            frame.insert(p.name.clone(), a);
        }
        let mut env = Env {
            scopes: vec![frame],
        };
        let flow = self.block_in_scope(&func.body, &mut env);
        self.depth -= 1;
        let returned = match flow? {
            Flow::Return(v) => v,
            Flow::Normal => None,
        };
        match (func.return_dtype, returned) {
            (None, None) => Ok(None),
            (Some(want), Some(v)) if v.dtype() == want => Ok(Some(v)),
            (Some(want), Some(v)) => Err(mismatch(
                call_span,
                format!("`{}` must return {want}, returned {}", func.name, v.dtype()),
            )),
            (Some(want), None) => Err(mismatch(
                call_span,
                format!("`{}` finished without returning a {want}", func.name),
            )),
            (None, Some(_)) => Err(mismatch(
                call_span,
                format!("`{}` has no return type but returned a value", func.name),
            )),
        }
    }

    fn block(&mut self, block: &'a Block, env: &mut Env) -> Result<Flow, EvalError> {
        env.scopes.push(HashMap::new());
        let flow = self.block_in_scope(block, env);
        env.scopes.pop();
        flow
    }

    fn block_in_scope(&mut self, block: &'a Block, env: &mut Env) -> Result<Flow, EvalError> {
        for stmt in &block.stmts {
            if let Flow::Return(v) = self.stmt(stmt, env)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn condition(&mut self, cond: &'a Expr, env: &mut Env) -> Result<bool, EvalError> {
        match self.expr(cond, env)? {
            Value::Bool(b) => Ok(b),
            other => Err(mismatch(
                cond.span,
                format!("condition must be bool, found {}", other.dtype()),
            )),
        }
    }

    fn stmt(&mut self, stmt: &'a Stmt, env: &mut Env) -> Result<Flow, EvalError> {
        self.tick()?;
        match &stmt.kind {
            StmtKind::Let { name, value } => {
                let v = self.expr(value, env)?;
                env.bind(name, v);
            }
            StmtKind::Assign { name, value } => {
                let v = self.expr(value, env)?;
                let slot = env.get_mut(name).ok_or_else(|| {
                    rt(
                        RuntimeErrorKind::UndefinedName,
                        stmt.span,
                        format!("assignment to unbound `{name}`"),
                    )
                })?;
                *slot = v;
            }
            StmtKind::IndexAssign { name, index, value } => {
                let i = self.expr(index, env)?;
                let v = self.expr(value, env)?;
                let current = env.get(name).cloned().ok_or_else(|| {
                    rt(
                        RuntimeErrorKind::UndefinedName,
                        stmt.span,
                        format!("assignment to unbound `{name}`"),
                    )
                })?;
                let Value::List(mut items) = current else {
                    return Err(mismatch(stmt.span, format!("`{name}` is not a list")));
                };
                let at = list_index(&items, &i, index.span)?;
                items[at] = v;
                *env.get_mut(name).expect("checked above") = Value::List(items);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                if self.condition(cond, env)? {
                    return self.block(then_block, env);
                } else if let Some(b) = else_block {
                    return self.block(b, env);
                }
            }
            StmtKind::While { cond, body } => {
                while self.condition(cond, env)? {
                    self.tick()?;
                    if let Flow::Return(v) = self.block(body, env)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::ForRange {
                var,
                start,
                end,
                body,
            } => {
                let lo = self.int(start, env)?;
                let hi = self.int(end, env)?;
                for i in lo..hi {
                    self.tick()?;
                    env.scopes.push(HashMap::from([(var.clone(), Value::Int(i))]));
                    let flow = self.block(body, env);
                    env.scopes.pop();
                    if let Flow::Return(v) = flow? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Return(value) => {
                let v = value.as_ref().map(|e| self.expr(e, env)).transpose()?;
                return Ok(Flow::Return(v));
            }
            StmtKind::Print(e) => {
                let v = self.expr(e, env)?;
                self.stdout.push_str(&v.to_string());
                self.stdout.push('\n');
            }
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Call(callee, args) => {
                    self.call_expr(e, callee, args, env)?;
                }
                _ => {
                    self.expr(e, env)?;
                }
            },
        }
        Ok(Flow::Normal)
    }

    fn int(&mut self, e: &'a Expr, env: &mut Env) -> Result<i64, EvalError> {
        match self.expr(e, env)? {
            Value::Int(v) => Ok(v),
            other => Err(mismatch(
                e.span,
                format!("expected int, found {}", other.dtype()),
            )),
        }
    }

    fn expr(&mut self, e: &'a Expr, env: &mut Env) -> Result<Value, EvalError> {
        match &e.kind {
            ExprKind::Int(v) => Ok(Value::Int(*v)),
            ExprKind::Real(v) => Ok(Value::Real(*v)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Str(s) => Ok(Value::Str(s.clone())),
            ExprKind::Ident(name) => env.get(name).cloned().ok_or_else(|| {
                rt(
                    RuntimeErrorKind::UndefinedName,
                    e.span,
                    format!("`{name}` is not bound"),
                )
            }),
            ExprKind::List(items) => items
                .iter()
                .map(|item| self.expr(item, env))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::List),
            ExprKind::Unary(op, inner) => {
                let v = self.expr(inner, env)?;
                match (op, v) {
                    (UnaryOp::Neg, Value::Int(i)) => Ok(Value::Int(i.wrapping_neg())),
                    (UnaryOp::Neg, Value::Real(r)) => Ok(Value::Real(-r)),
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (op, v) => Err(mismatch(
                        e.span,
                        format!("cannot apply `{}` to {}", op.symbol(), v.dtype()),
                    )),
                }
            }
            ExprKind::Binary(BinaryOp::And, lhs, rhs) => {
                Ok(Value::Bool(self.condition(lhs, env)? && self.condition(rhs, env)?))
            }
            ExprKind::Binary(BinaryOp::Or, lhs, rhs) => {
                Ok(Value::Bool(self.condition(lhs, env)? || self.condition(rhs, env)?))
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let a = self.expr(lhs, env)?;
                let b = self.expr(rhs, env)?;
                binary(*op, a, b, e.span)
            }
            ExprKind::Index(base, index) => {
                let b = self.expr(base, env)?;
                let i = self.expr(index, env)?;
                match b {
                    Value::List(items) => {
                        let at = list_index(&items, &i, index.span)?;
                        Ok(items[at].clone())
                    }
                    other => Err(mismatch(
                        base.span,
                        format!("cannot index into {}", other.dtype()),
                    )),
                }
            }
            ExprKind::Call(callee, args) => self
                .call_expr(e, callee, args, env)?
                .ok_or_else(|| mismatch(e.span, format!("`{callee}` does not return a value"))),
        }
    }

    /// Evaluates a call; `None` when a user function returns nothing.
    fn call_expr(
        &mut self,
        e: &'a Expr,
        callee: &str,
        args: &'a [Expr],
        env: &mut Env,
    ) -> Result<Option<Value>, EvalError> {
        let values = args
            .iter()
            .map(|a| self.expr(a, env))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(func) = self.functions.get(callee).copied() {
            if func.params.len() != values.len() {
                return Err(mismatch(
                    e.span,
                    format!(
                        "`{callee}` takes {} argument(s), got {}",
                        func.params.len(),
                        values.len()
                    ),
                ));
            }
            for (p, v) in func.params.iter().zip(&values) {
                if p.dtype != v.dtype() {
                    return Err(mismatch(
                        e.span,
                        format!(
                            "argument `{}` of `{callee}` expects {}, got {}",
                            p.name,
                            p.dtype,
                            v.dtype()
                        ),
                    ));
                }
            }
            return self.call(func, values, e.span);
        }
        builtin(callee, values, e, args).map(Some)
    }
}

fn list_index(items: &[Value], index: &Value, span: Span) -> Result<usize, EvalError> {
    let Value::Int(i) = index else {
        return Err(mismatch(
            span,
            format!("list index must be int, found {}", index.dtype()),
        ));
    };
    usize::try_from(*i)
        .ok()
        .filter(|&i| i < items.len())
        .ok_or_else(|| {
            rt(
                RuntimeErrorKind::IndexOutOfBounds,
                span,
                format!("index {i} out of bounds for list of length {}", items.len()),
            )
        })
}

fn builtin(name: &str, mut values: Vec<Value>, e: &Expr, args: &[Expr]) -> Result<Value, EvalError> {
    let arity = |n: usize| {
        if values.len() == n {
            Ok(())
        } else {
            Err(mismatch(
                e.span,
                format!("`{name}` takes {n} argument(s), got {}", values.len()),
            ))
        }
    };
    match name {
        "len" => {
            arity(1)?;
            match &values[0] {
                Value::List(items) => Ok(Value::Int(items.len() as i64)),
                Value::Str(s) => Ok(Value::Int(s.chars().count() as i64)),
                other => Err(mismatch(
                    args[0].span,
                    format!("`len` expects list or str, found {}", other.dtype()),
                )),
            }
        }
        "push" => {
            arity(2)?;
            let v = values.pop().expect("arity");
            match values.pop().expect("arity") {
                Value::List(mut items) => {
                    items.push(v);
                    Ok(Value::List(items))
                }
                other => Err(mismatch(
                    args[0].span,
                    format!("`push` expects a list, found {}", other.dtype()),
                )),
            }
        }
        "swap" => {
            arity(3)?;
            let j = values.pop().expect("arity");
            let i = values.pop().expect("arity");
            match values.pop().expect("arity") {
                Value::List(mut items) => {
                    let a = list_index(&items, &i, args[1].span)?;
                    let b = list_index(&items, &j, args[2].span)?;
                    items.swap(a, b);
                    Ok(Value::List(items))
                }
                other => Err(mismatch(
                    args[0].span,
                    format!("`swap` expects a list, found {}", other.dtype()),
                )),
            }
        }
        _ => Err(rt(
            RuntimeErrorKind::UndefinedName,
            e.span,
            format!("no function named `{name}`"),
        )),
    }
}

fn numeric_pair(a: &Value, b: &Value) -> Option<(f64, f64)> {
    match (a, b) {
        (Value::Int(x), Value::Real(y)) => Some((*x as f64, *y)),
        (Value::Real(x), Value::Int(y)) => Some((*x, *y as f64)),
        (Value::Real(x), Value::Real(y)) => Some((*x, *y)),
        _ => None,
    }
}

fn values_equal(a: &Value, b: &Value) -> Option<bool> {
    if let Some((x, y)) = numeric_pair(a, b) {
        return Some(x == y);
    }
    match (a, b) {
        (Value::List(xs), Value::List(ys)) => {
            if xs.len() != ys.len() {
                return Some(false);
            }
            for (x, y) in xs.iter().zip(ys) {
                if !values_equal(x, y)? {
                    return Some(false);
                }
            }
            Some(true)
        }
        _ if a.dtype() == b.dtype() => Some(a == b),
        _ => None,
    }
}

fn binary(op: BinaryOp, a: Value, b: Value, span: Span) -> Result<Value, EvalError> {
    use BinaryOp::*;
    let type_error = |a: &Value, b: &Value| {
        mismatch(
            span,
            format!(
                "cannot apply `{}` to {} and {}",
                op.symbol(),
                a.dtype(),
                b.dtype()
            ),
        )
    };
    let div_zero = || rt(RuntimeErrorKind::DivisionByZero, span, "division by zero");
    match op {
        Eq | Ne => {
            let eq = values_equal(&a, &b).ok_or_else(|| type_error(&a, &b))?;
            Ok(Value::Bool(eq == (op == Eq)))
        }
        Lt | Le | Gt | Ge => {
            let ord = match (&a, &b) {
                (Value::Int(x), Value::Int(y)) => x.partial_cmp(y),
                (Value::Str(x), Value::Str(y)) => x.partial_cmp(y),
                _ => numeric_pair(&a, &b)
                    .ok_or_else(|| type_error(&a, &b))
                    .map(|(x, y)| x.partial_cmp(&y))?,
            };
            let result = ord.is_some_and(|o| match op {
                Lt => o.is_lt(),
                Le => o.is_le(),
                Gt => o.is_gt(),
                _ => o.is_ge(),
            });
            Ok(Value::Bool(result))
        }
        Add | Sub | Mul | Div | Rem => {
            match (&a, &b) {
                (Value::Int(x), Value::Int(y)) => {
                    let (x, y) = (*x, *y);
                    return Ok(Value::Int(match op {
                        Add => x.wrapping_add(y),
                        Sub => x.wrapping_sub(y),
                        Mul => x.wrapping_mul(y),
                        Div if y == 0 => return Err(div_zero()),
                        Div => x.wrapping_div(y),
                        Rem if y == 0 => return Err(div_zero()),
                        _ => x.wrapping_rem(y),
                    }));
                }
                (Value::Str(x), Value::Str(y)) if op == Add => {
                    return Ok(Value::Str(format!("{x}{y}")));
                }
                (Value::List(x), Value::List(y)) if op == Add => {
                    return Ok(Value::List(x.iter().chain(y).cloned().collect()));
                }
                _ => {}
            }
            let (x, y) = numeric_pair(&a, &b).ok_or_else(|| type_error(&a, &b))?;
            Ok(Value::Real(match op {
                Add => x + y,
                Sub => x - y,
                Mul => x * y,
                Div if y == 0.0 => return Err(div_zero()),
                Div => x / y,
                Rem if y == 0.0 => return Err(div_zero()),
                _ => x % y,
            }))
        }
        And | Or => unreachable!("short-circuit operators are handled by the caller"),
    }
}
