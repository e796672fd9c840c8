//! Canonical MiniImp formatting: four-space indentation, one statement per
//! line, minimal parentheses.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (i, f) in program.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&print_function(f));
    }
    out
}

pub fn print_function(f: &FuncDef) -> String {
    let mut out = String::new();
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| format!("{}: {}", p.name, p.dtype))
        .collect();
    write!(out, "func {}({})", f.name, params.join(", ")).unwrap();
    if let Some(ret) = f.return_dtype {
        write!(out, " -> {ret}").unwrap();
    }
    out.push(' ');
    print_block(&f.body, 0, &mut out);
    out.push('\n');
    out
}

/// Formats one statement (and its nested blocks) at the given depth, without
/// a trailing newline.
pub fn print_stmt(stmt: &Stmt, depth: usize) -> String {
    let mut out = String::new();
    write_stmt(stmt, depth, &mut out);
    out
}

fn print_block(block: &Block, depth: usize, out: &mut String) {
    if block.stmts.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for stmt in &block.stmts {
        write_stmt(stmt, depth + 1, out);
        out.push('\n');
    }
    out.push_str(&INDENT.repeat(depth));
    out.push('}');
}

fn write_stmt(stmt: &Stmt, depth: usize, out: &mut String) {
    out.push_str(&INDENT.repeat(depth));
    match &stmt.kind {
        StmtKind::Let { name, value } => {
            write!(out, "let {name} = {};", print_expr(value)).unwrap();
        }
        StmtKind::Assign { name, value } => {
            write!(out, "{name} = {};", print_expr(value)).unwrap();
        }
        StmtKind::IndexAssign { name, index, value } => {
            write!(out, "{name}[{}] = {};", print_expr(index), print_expr(value)).unwrap();
        }
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            write!(out, "if {} ", print_expr(cond)).unwrap();
            print_block(then_block, depth, out);
            if let Some(else_block) = else_block {
                out.push_str(" else ");
                print_block(else_block, depth, out);
            }
        }
        StmtKind::While { cond, body } => {
            write!(out, "while {} ", print_expr(cond)).unwrap();
            print_block(body, depth, out);
        }
        StmtKind::ForRange {
            var,
            start,
            end,
            body,
        } => {
            write!(
                out,
                "for {var} in range({}, {}) ",
                print_expr(start),
                print_expr(end)
            )
            .unwrap();
            print_block(body, depth, out);
        }
        StmtKind::Return(None) => out.push_str("return;"),
        StmtKind::Return(Some(e)) => write!(out, "return {};", print_expr(e)).unwrap(),
        StmtKind::Print(e) => write!(out, "print({});", print_expr(e)).unwrap(),
        StmtKind::Expr(e) => write!(out, "{};", print_expr(e)).unwrap(),
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

/// Writes `e`, parenthesized when its precedence is below `min`.
fn write_operand(e: &Expr, min: u8, out: &mut String) {
    if e.kind.precedence() < min {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Int(v) => write!(out, "{v}").unwrap(),
        ExprKind::Real(v) => out.push_str(&format_real(*v)),
        ExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        ExprKind::Str(s) => out.push_str(&quote_str(s)),
        ExprKind::Ident(name) => out.push_str(name),
        ExprKind::List(items) => {
            out.push('[');
            write_args(items, out);
            out.push(']');
        }
        ExprKind::Call(callee, args) => {
            out.push_str(callee);
            out.push('(');
            write_args(args, out);
            out.push(')');
        }
        ExprKind::Unary(op, inner) => {
            match op {
                UnaryOp::Neg => out.push('-'),
                UnaryOp::Not => out.push_str("not "),
            }
            write_operand(inner, e.kind.precedence(), out);
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let prec = op.precedence();
            // left-associative levels accept an equal-precedence left operand;
            // comparisons do not chain, so both sides must bind tighter
            let left_min = if op.is_comparison() { prec + 1 } else { prec };
            write_operand(lhs, left_min, out);
            write!(out, " {} ", op.symbol()).unwrap();
            write_operand(rhs, prec + 1, out);
        }
        ExprKind::Index(base, index) => {
            write_operand(base, ATOM_PRECEDENCE, out);
            out.push('[');
            write_expr(index, out);
            out.push(']');
        }
    }
}

fn write_args(items: &[Expr], out: &mut String) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(item, out);
    }
}

/// Shortest representation that lexes back to the same `f64`.
pub fn format_real(v: f64) -> String {
    let s = format!("{v:?}");
    match s.find('e') {
        Some(pos) if !s[..pos].contains('.') => format!("{}.0{}", &s[..pos], &s[pos..]),
        _ => s,
    }
}

pub fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
