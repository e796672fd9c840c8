use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Parses a whole MiniImp program.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(src)?;
    let mut functions: Vec<FuncDef> = Vec::new();
    while p.peek() != &Tok::Eof {
        let func = p.funcdef()?;
        if functions.iter().any(|f| f.name == func.name) {
            return Err(ParseError::semantic(
                func.span,
                format!("function `{}` is defined twice", func.name),
            ));
        }
        functions.push(func);
    }
    Ok(Program { functions })
}

/// Parses a single expression, e.g. a literal passed on the command line.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    scopes: Vec<HashSet<String>>,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(src)?,
            pos: 0,
            scopes: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_token(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek_token();
        ParseError {
            span: t.span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
            message: None,
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if self.peek() == &tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let t = self.advance();
                Ok((name, t.span))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn dtype(&mut self) -> Result<Dtype, ParseError> {
        if let Tok::Ident(name) = self.peek() {
            if let Some(d) = Dtype::from_name(name) {
                self.advance();
                return Ok(d);
            }
        }
        Err(self.unexpected(&["int", "real", "bool", "str", "list"]))
    }

    fn declare(&mut self, name: &str, span: Span) -> Result<(), ParseError> {
        let scope = self.scopes.last_mut().expect("inside a function");
        if !scope.insert(name.to_string()) {
            return Err(ParseError::semantic(
                span,
                format!("`{name}` is already bound in this scope"),
            ));
        }
        Ok(())
    }

    fn funcdef(&mut self) -> Result<FuncDef, ParseError> {
        let start = self.expect(Tok::Func, "`func`")?.span;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen, "`(`")?;
        self.scopes.push(HashSet::new());
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                let (pname, pspan) = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let dtype = self.dtype()?;
                self.declare(&pname, pspan)?;
                params.push(Param {
                    name: pname,
                    dtype,
                    span: pspan,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        let return_dtype = if self.eat(&Tok::Arrow) {
            Some(self.dtype()?)
        } else {
            None
        };
        // parameters and top-level body statements share one scope
        let (body, end) = self.block_in_current_scope()?;
        self.scopes.pop();
        Ok(FuncDef {
            name,
            params,
            return_dtype,
            body,
            span: start.to(end),
        })
    }

    fn block(&mut self) -> Result<(Block, Span), ParseError> {
        self.scopes.push(HashSet::new());
        let out = self.block_in_current_scope();
        self.scopes.pop();
        out
    }

    fn block_in_current_scope(&mut self) -> Result<(Block, Span), ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while self.peek() != &Tok::RBrace {
            if self.peek() == &Tok::Eof {
                return Err(self.unexpected(&["statement", "`}`"]));
            }
            stmts.push(self.stmt()?);
        }
        let end = self.advance().span;
        Ok((Block { stmts }, end))
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.peek_token().span;
        let (kind, end) = match self.peek() {
            Tok::Let => {
                self.advance();
                let (name, nspan) = self.ident()?;
                self.expect(Tok::Assign, "`=`")?;
                let value = self.expr()?;
                let end = self.expect(Tok::Semi, "`;`")?.span;
                self.declare(&name, nspan)?;
                (StmtKind::Let { name, value }, end)
            }
            Tok::If => {
                self.advance();
                let cond = self.expr()?;
                let (then_block, mut end) = self.block()?;
                let else_block = if self.eat(&Tok::Else) {
                    let (b, e) = self.block()?;
                    end = e;
                    Some(b)
                } else {
                    None
                };
                (
                    StmtKind::If {
                        cond,
                        then_block,
                        else_block,
                    },
                    end,
                )
            }
            Tok::While => {
                self.advance();
                let cond = self.expr()?;
                let (body, end) = self.block()?;
                (StmtKind::While { cond, body }, end)
            }
            Tok::For => {
                self.advance();
                let (var, vspan) = self.ident()?;
                self.expect(Tok::In, "`in`")?;
                self.expect(Tok::Range, "`range`")?;
                self.expect(Tok::LParen, "`(`")?;
                let start_e = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let end_e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                // the loop variable lives in its own scope around the body
                self.scopes.push(HashSet::new());
                self.declare(&var, vspan)?;
                let body = self.block();
                self.scopes.pop();
                let (body, end) = body?;
                (
                    StmtKind::ForRange {
                        var,
                        start: start_e,
                        end: end_e,
                        body,
                    },
                    end,
                )
            }
            Tok::Return => {
                self.advance();
                let value = if self.peek() == &Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                let end = self.expect(Tok::Semi, "`;`")?.span;
                (StmtKind::Return(value), end)
            }
            Tok::Print => {
                self.advance();
                self.expect(Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let end = self.expect(Tok::Semi, "`;`")?.span;
                (StmtKind::Print(e), end)
            }
            _ => {
                let target = self.expr()?;
                if self.eat(&Tok::Assign) {
                    let value = self.expr()?;
                    let end = self.expect(Tok::Semi, "`;`")?.span;
                    let kind = match target.kind {
                        ExprKind::Ident(name) => StmtKind::Assign { name, value },
                        ExprKind::Index(base, index) => match base.kind {
                            ExprKind::Ident(name) => StmtKind::IndexAssign {
                                name,
                                index: *index,
                                value,
                            },
                            _ => return Err(invalid_target(target.span)),
                        },
                        _ => return Err(invalid_target(target.span)),
                    };
                    (kind, end)
                } else {
                    let end = self.expect(Tok::Semi, "`;` or `=`")?.span;
                    (StmtKind::Expr(target), end)
                }
            }
        };
        Ok(Stmt::new(kind, start.to(end)))
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn binary_level(
        &mut self,
        ops: &[(Tok, BinaryOp)],
        next: fn(&mut Self) -> Result<Expr, ParseError>,
    ) -> Result<Expr, ParseError> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (tok, op) in ops {
                if self.peek() == tok {
                    self.advance();
                    let rhs = next(self)?;
                    let span = lhs.span.to(rhs.span);
                    lhs = Expr::new(ExprKind::Binary(*op, Box::new(lhs), Box::new(rhs)), span);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[(Tok::Or, BinaryOp::Or)], Self::and_expr)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[(Tok::And, BinaryOp::And)], Self::not_expr)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Not {
            let start = self.advance().span;
            let inner = self.not_expr()?;
            let span = start.to(inner.span);
            return Ok(Expr::new(
                ExprKind::Unary(UnaryOp::Not, Box::new(inner)),
                span,
            ));
        }
        self.comparison()
    }

    // comparisons do not chain: `a < b < c` is rejected
    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::EqEq => BinaryOp::Eq,
            Tok::NotEq => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.additive()?;
        let span = lhs.span.to(rhs.span);
        Ok(Expr::new(
            ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            span,
        ))
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(
            &[(Tok::Plus, BinaryOp::Add), (Tok::Minus, BinaryOp::Sub)],
            Self::multiplicative,
        )
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(
            &[
                (Tok::Star, BinaryOp::Mul),
                (Tok::Slash, BinaryOp::Div),
                (Tok::Percent, BinaryOp::Rem),
            ],
            Self::unary,
        )
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Minus {
            let start = self.advance().span;
            let inner = self.unary()?;
            let span = start.to(inner.span);
            return Ok(Expr::new(
                ExprKind::Unary(UnaryOp::Neg, Box::new(inner)),
                span,
            ));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.peek() == &Tok::LBracket {
            self.advance();
            let index = self.expr()?;
            let end = self.expect(Tok::RBracket, "`]`")?.span;
            let span = e.span.to(end);
            e = Expr::new(ExprKind::Index(Box::new(e), Box::new(index)), span);
        }
        Ok(e)
    }

    fn comma_list(&mut self, close: Tok, what: &str) -> Result<(Vec<Expr>, Span), ParseError> {
        let mut items = Vec::new();
        if self.peek() != &close {
            loop {
                items.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let end = self.expect(close, what)?.span;
        Ok((items, end))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek_token().clone();
        let kind = match t.tok {
            Tok::Int(v) => ExprKind::Int(v),
            Tok::Real(v) => ExprKind::Real(v),
            Tok::Str(s) => ExprKind::Str(s),
            Tok::True => ExprKind::Bool(true),
            Tok::False => ExprKind::Bool(false),
            Tok::Ident(name) => {
                self.advance();
                if self.peek() == &Tok::LParen {
                    self.advance();
                    let (args, end) = self.comma_list(Tok::RParen, "`)` or `,`")?;
                    return Ok(Expr::new(ExprKind::Call(name, args), t.span.to(end)));
                }
                return Ok(Expr::new(ExprKind::Ident(name), t.span));
            }
            Tok::LBracket => {
                self.advance();
                let (items, end) = self.comma_list(Tok::RBracket, "`]` or `,`")?;
                return Ok(Expr::new(ExprKind::List(items), t.span.to(end)));
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(inner);
            }
            _ => return Err(self.unexpected(&["expression"])),
        };
        self.advance();
        Ok(Expr::new(kind, t.span))
    }
}

fn invalid_target(span: Span) -> ParseError {
    ParseError::semantic(span, "assignment target must be a variable or `name[index]`")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_function() {
        let prog = parse("func id(x: int) -> int { return x; }").unwrap();
        assert_eq!(prog.functions.len(), 1);
        let f = &prog.functions[0];
        assert_eq!(f.params.len(), 1);
        assert_eq!(f.return_dtype, Some(Dtype::Int));
        assert_eq!(f.body.stmts.len(), 1);
        assert!(matches!(f.body.stmts[0].kind, StmtKind::Return(Some(_))));
    }

    #[test]
    fn missing_expression_points_at_semicolon() {
        let src = "func f() { let x = ; }";
        let err = parse(src).unwrap_err();
        assert_eq!((err.span.line, err.span.column), (1, 20));
        assert_eq!(&src[err.span.offset..err.span.offset + 1], ";");
        assert_eq!(err.expected, vec!["expression".to_string()]);
        assert_eq!(err.found, "`;`");
    }

    #[test]
    fn precedence_shapes_the_tree() {
        let e = parse_expr("1 + 2 * 3 < 7 and not false or x").unwrap();
        let ExprKind::Binary(BinaryOp::Or, lhs, _) = e.kind else {
            panic!("expected or at the root");
        };
        let ExprKind::Binary(BinaryOp::And, cmp, not) = lhs.kind else {
            panic!("expected and");
        };
        assert!(matches!(cmp.kind, ExprKind::Binary(BinaryOp::Lt, _, _)));
        assert!(matches!(not.kind, ExprKind::Unary(UnaryOp::Not, _)));
    }

    #[test]
    fn duplicate_let_in_same_scope() {
        let err = parse("func f(a: int) { let a = 1; }").unwrap_err();
        assert!(err.to_string().contains("already bound"));
        // shadowing in a nested block is fine
        parse("func f(a: int) { if true { let a = 1; } }").unwrap();
    }

    #[test]
    fn index_assign_and_bad_targets() {
        let prog = parse("func f(xs: list) { xs[0] = 1; }").unwrap();
        assert!(matches!(
            prog.functions[0].body.stmts[0].kind,
            StmtKind::IndexAssign { .. }
        ));
        assert!(parse("func f(xs: list) { xs[0][1] = 1; }").is_err());
        assert!(parse("func f() { 1 = 2; }").is_err());
    }

    #[test]
    fn comparisons_do_not_chain() {
        assert!(parse_expr("1 < 2 < 3").is_err());
    }

    #[test]
    fn spans_cover_statements() {
        let src = "func f() {\n    print(1 + 2);\n}";
        let prog = parse(src).unwrap();
        let s = &prog.functions[0].body.stmts[0];
        assert_eq!(&src[s.span.offset..s.span.offset + s.span.len], "print(1 + 2);");
    }
}
