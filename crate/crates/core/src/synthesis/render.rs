//! Textual renderings of a MiniImp program for the non-native backends.
//! Both keep MiniImp's statement structure line for line, so provenance
//! computed on one rendering carries over to the others.

use super::Backend;
use crate::minilang::ast::{
    Block, Expr, ExprKind, FuncDef, Program, Stmt, StmtKind, UnaryOp, ATOM_PRECEDENCE,
    NEG_PRECEDENCE,
};
use crate::minilang::{format_real, pretty_print, quote_str, Dtype};

const INDENT: &str = "    ";

const CSHARP_KEYWORDS: &[&str] = &[
    "abstract", "as", "base", "bool", "break", "byte", "case", "catch", "char", "checked",
    "class", "const", "continue", "decimal", "default", "delegate", "do", "double", "else",
    "enum", "event", "explicit", "extern", "false", "finally", "fixed", "float", "for",
    "foreach", "goto", "if", "implicit", "in", "int", "interface", "internal", "is", "lock",
    "long", "namespace", "new", "null", "object", "operator", "out", "override", "params",
    "private", "protected", "public", "readonly", "ref", "return", "sbyte", "sealed", "short",
    "sizeof", "stackalloc", "static", "string", "struct", "switch", "this", "throw", "true",
    "try", "typeof", "uint", "ulong", "unchecked", "unsafe", "ushort", "using", "virtual",
    "void", "volatile", "while",
];

const PYTHON_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
    "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return",
    "try", "while", "with", "yield",
];

/// Renders `program`, whose last function is `main`, and returns the source
/// with the 1-based line of each statement in `main`'s body.
pub(super) fn render(program: &Program, backend: Backend) -> (String, Vec<usize>) {
    match backend {
        Backend::Minilang => render_minilang(program),
        Backend::CLike => Renderer::new(Flavor::CLike).program(program),
        Backend::PyLike => Renderer::new(Flavor::PyLike).program(program),
    }
}

fn render_minilang(program: &Program) -> (String, Vec<usize>) {
    let source = pretty_print(program);
    let main = program.functions.last().expect("program has main");
    // main's calls are one line each, followed by the closing brace
    let n = main.body.stmts.len();
    let total = source.lines().count();
    let lines = (total - n..total).collect();
    (source, lines)
}

#[derive(Clone, Copy, PartialEq)]
enum Flavor {
    CLike,
    PyLike,
}

struct Renderer {
    flavor: Flavor,
    lines: Vec<String>,
}

impl Renderer {
    fn new(flavor: Flavor) -> Self {
        Renderer {
            flavor,
            lines: Vec::new(),
        }
    }

    fn program(mut self, program: &Program) -> (String, Vec<usize>) {
        let mut main_lines = Vec::new();
        let last = program.functions.len().saturating_sub(1);
        for (i, f) in program.functions.iter().enumerate() {
            if i > 0 {
                self.lines.push(String::new());
            }
            self.function(f, (i == last).then_some(&mut main_lines));
        }
        let mut source = self.lines.join("\n");
        source.push('\n');
        (source, main_lines)
    }

    fn emit(&mut self, depth: usize, text: String) {
        self.lines.push(format!("{}{text}", INDENT.repeat(depth)));
    }

    fn ident(&self, name: &str) -> String {
        match self.flavor {
            Flavor::CLike if CSHARP_KEYWORDS.contains(&name) => format!("@{name}"),
            Flavor::PyLike if PYTHON_KEYWORDS.contains(&name) => format!("{name}_"),
            _ => name.to_string(),
        }
    }

    fn dtype(&self, d: Option<Dtype>) -> &'static str {
        match (self.flavor, d) {
            (Flavor::CLike, None) => "void",
            (Flavor::CLike, Some(Dtype::Int)) => "long",
            (Flavor::CLike, Some(Dtype::Real)) => "double",
            (Flavor::CLike, Some(Dtype::Bool)) => "bool",
            (Flavor::CLike, Some(Dtype::Str)) => "string",
            (Flavor::CLike, Some(Dtype::List)) => "List<object>",
            (Flavor::PyLike, None) => "None",
            (Flavor::PyLike, Some(Dtype::Int)) => "int",
            (Flavor::PyLike, Some(Dtype::Real)) => "float",
            (Flavor::PyLike, Some(Dtype::Bool)) => "bool",
            (Flavor::PyLike, Some(Dtype::Str)) => "str",
            (Flavor::PyLike, Some(Dtype::List)) => "list",
        }
    }

    fn function(&mut self, f: &FuncDef, mut main_lines: Option<&mut Vec<usize>>) {
        let name = self.ident(&f.name);
        let header = match self.flavor {
            Flavor::CLike => {
                let params: Vec<String> = f
                    .params
                    .iter()
                    .map(|p| format!("{} {}", self.dtype(Some(p.dtype)), self.ident(&p.name)))
                    .collect();
                format!(
                    "static {} {name}({})",
                    self.dtype(f.return_dtype),
                    params.join(", ")
                )
            }
            Flavor::PyLike => {
                let params: Vec<String> = f
                    .params
                    .iter()
                    .map(|p| format!("{}: {}", self.ident(&p.name), self.dtype(Some(p.dtype))))
                    .collect();
                format!(
                    "def {name}({}) -> {}",
                    params.join(", "),
                    self.dtype(f.return_dtype)
                )
            }
        };
        self.open(0, header);
        for stmt in &f.body.stmts {
            if let Some(lines) = main_lines.as_deref_mut() {
                lines.push(self.lines.len() + 1);
            }
            self.stmt(stmt, 1);
        }
        self.close(0, &f.body);
    }

    fn open(&mut self, depth: usize, header: String) {
        match self.flavor {
            Flavor::CLike => self.emit(depth, format!("{header} {{")),
            Flavor::PyLike => self.emit(depth, format!("{header}:")),
        }
    }

    fn close(&mut self, depth: usize, block: &Block) {
        match self.flavor {
            Flavor::CLike => self.emit(depth, "}".into()),
            Flavor::PyLike if block.stmts.is_empty() => self.emit(depth + 1, "pass".into()),
            Flavor::PyLike => {}
        }
    }

    fn block(&mut self, header: String, block: &Block, depth: usize) {
        self.open(depth, header);
        for s in &block.stmts {
            self.stmt(s, depth + 1);
        }
        self.close(depth, block);
    }

    fn stmt(&mut self, stmt: &Stmt, depth: usize) {
        let c = self.flavor == Flavor::CLike;
        let semi = if c { ";" } else { "" };
        match &stmt.kind {
            StmtKind::Let { name, value } => {
                let kw = if c { "var " } else { "" };
                let text = format!("{kw}{} = {}{semi}", self.ident(name), self.expr(value));
                self.emit(depth, text);
            }
            StmtKind::Assign { name, value } => {
                let text = format!("{} = {}{semi}", self.ident(name), self.expr(value));
                self.emit(depth, text);
            }
            StmtKind::IndexAssign { name, index, value } => {
                let text = format!(
                    "{}[{}] = {}{semi}",
                    self.ident(name),
                    self.expr(index),
                    self.expr(value)
                );
                self.emit(depth, text);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let cond = self.expr(cond);
                let header = if c { format!("if ({cond})") } else { format!("if {cond}") };
                match else_block {
                    None => self.block(header, then_block, depth),
                    Some(else_block) if c => {
                        self.open(depth, header);
                        for s in &then_block.stmts {
                            self.stmt(s, depth + 1);
                        }
                        self.emit(depth, "} else {".into());
                        for s in &else_block.stmts {
                            self.stmt(s, depth + 1);
                        }
                        self.close(depth, else_block);
                    }
                    Some(else_block) => {
                        self.block(header, then_block, depth);
                        self.block("else".into(), else_block, depth);
                    }
                }
            }
            StmtKind::While { cond, body } => {
                let cond = self.expr(cond);
                let header = if c { format!("while ({cond})") } else { format!("while {cond}") };
                self.block(header, body, depth);
            }
            StmtKind::ForRange {
                var,
                start,
                end,
                body,
            } => {
                let v = self.ident(var);
                let (start, end) = (self.expr(start), self.expr(end));
                let header = if c {
                    format!("for (long {v} = {start}; {v} < {end}; {v}++)")
                } else {
                    format!("for {v} in range({start}, {end})")
                };
                self.block(header, body, depth);
            }
            StmtKind::Return(None) => self.emit(depth, format!("return{semi}")),
            StmtKind::Return(Some(e)) => {
                let text = format!("return {}{semi}", self.expr(e));
                self.emit(depth, text);
            }
            StmtKind::Print(e) => {
                let f = if c { "Console.WriteLine" } else { "print" };
                let text = format!("{f}({}){semi}", self.expr(e));
                self.emit(depth, text);
            }
            StmtKind::Expr(e) => {
                let text = format!("{}{semi}", self.expr(e));
                self.emit(depth, text);
            }
        }
    }

    fn expr(&self, e: &Expr) -> String {
        let c = self.flavor == Flavor::CLike;
        match &e.kind {
            ExprKind::Int(v) => v.to_string(),
            ExprKind::Real(v) => format_real(*v),
            ExprKind::Bool(b) if c => b.to_string(),
            ExprKind::Bool(true) => "True".into(),
            ExprKind::Bool(false) => "False".into(),
            ExprKind::Str(s) => quote_str(s),
            ExprKind::Ident(name) => self.ident(name),
            ExprKind::List(items) if c => {
                if items.is_empty() {
                    "new List<object>()".into()
                } else {
                    format!("new List<object> {{ {} }}", self.args(items))
                }
            }
            ExprKind::List(items) => format!("[{}]", self.args(items)),
            ExprKind::Call(callee, args) => format!("{}({})", self.ident(callee), self.args(args)),
            ExprKind::Unary(UnaryOp::Neg, inner) => {
                let operand = self.operand(inner, NEG_PRECEDENCE);
                if operand.starts_with('-') {
                    format!("-({operand})")
                } else {
                    format!("-{operand}")
                }
            }
            ExprKind::Unary(UnaryOp::Not, inner) if c => {
                if inner.kind.precedence() >= NEG_PRECEDENCE {
                    format!("!{}", self.expr(inner))
                } else {
                    format!("!({})", self.expr(inner))
                }
            }
            ExprKind::Unary(UnaryOp::Not, inner) => {
                format!("not {}", self.operand(inner, e.kind.precedence()))
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let prec = op.precedence();
                let left_min = if op.is_comparison() { prec + 1 } else { prec };
                let symbol = match (c, op.symbol()) {
                    (true, "and") => "&&",
                    (true, "or") => "||",
                    (_, s) => s,
                };
                format!(
                    "{} {symbol} {}",
                    self.operand(lhs, left_min),
                    self.operand(rhs, prec + 1)
                )
            }
            ExprKind::Index(base, index) => {
                format!("{}[{}]", self.operand(base, ATOM_PRECEDENCE), self.expr(index))
            }
        }
    }

    fn operand(&self, e: &Expr, min: u8) -> String {
        if e.kind.precedence() < min {
            format!("({})", self.expr(e))
        } else {
            self.expr(e)
        }
    }

    fn args(&self, items: &[Expr]) -> String {
        items
            .iter()
            .map(|i| self.expr(i))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parse;

    const SRC: &str = "\
func f(xs: list, n: int) -> bool {
    let class = not n < 2 and true;
    for i in range(0, n) {
        if xs[i] == -(-1) {
            return false;
        } else {}
    }
    while n > 0 {
        n = n - 1;
    }
    print(\"done\");
    return class;
}
";

    #[test]
    fn c_like() {
        let (src, _) = render(&parse(SRC).unwrap(), Backend::CLike);
        assert_eq!(
            src,
            "\
static bool f(List<object> xs, long n) {
    var @class = !(n < 2) && true;
    for (long i = 0; i < n; i++) {
        if (xs[i] == -(-1)) {
            return false;
        } else {
        }
    }
    while (n > 0) {
        n = n - 1;
    }
    Console.WriteLine(\"done\");
    return @class;
}
"
        );
    }

    #[test]
    fn py_like() {
        let (src, _) = render(&parse(SRC).unwrap(), Backend::PyLike);
        assert_eq!(
            src,
            "\
def f(xs: list, n: int) -> bool:
    class_ = not n < 2 and True
    for i in range(0, n):
        if xs[i] == -(-1):
            return False
        else:
            pass
    while n > 0:
        n = n - 1
    print(\"done\")
    return class_
"
        );
    }

    #[test]
    fn main_lines_are_tracked() {
        let program = parse("func g() {}\n\nfunc main() {\n    g();\n    g();\n}\n").unwrap();
        for backend in Backend::ALL {
            let (src, lines) = render(&program, backend);
            let text: Vec<&str> = src.lines().collect();
            assert_eq!(lines.len(), 2, "{backend}");
            for l in lines {
                assert!(text[l - 1].trim_start().starts_with('g'), "{backend}: {src}");
            }
        }
    }
}
