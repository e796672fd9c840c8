use std::fmt;

use super::ast::Span;
use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Int(i64),
    Real(f64),
    Str(String),
    Ident(String),
    // keywords
    Func,
    Let,
    If,
    Else,
    While,
    For,
    In,
    Range,
    Return,
    Print,
    True,
    False,
    And,
    Or,
    Not,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Arrow,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Eof,
}

pub const KEYWORDS: &[&str] = &[
    "func", "let", "if", "else", "while", "for", "in", "range", "return", "print", "true", "false",
    "and", "or", "not",
];

impl Tok {
    fn keyword(word: &str) -> Option<Tok> {
        Some(match word {
            "func" => Tok::Func,
            "let" => Tok::Let,
            "if" => Tok::If,
            "else" => Tok::Else,
            "while" => Tok::While,
            "for" => Tok::For,
            "in" => Tok::In,
            "range" => Tok::Range,
            "return" => Tok::Return,
            "print" => Tok::Print,
            "true" => Tok::True,
            "false" => Tok::False,
            "and" => Tok::And,
            "or" => Tok::Or,
            "not" => Tok::Not,
            _ => return None,
        })
    }

    pub fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Real(v) => format!("real `{v}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Func => "func",
            Tok::Let => "let",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::For => "for",
            Tok::In => "in",
            Tok::Range => "range",
            Tok::Return => "return",
            Tok::Print => "print",
            Tok::True => "true",
            Tok::False => "false",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Arrow => "->",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Int(_) | Tok::Real(_) | Tok::Str(_) | Tok::Ident(_) | Tok::Eof => "",
        }
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia();
        let start = (lx.pos, lx.line, lx.col);
        let Some(c) = lx.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                span: Span::new(lx.pos, lx.line, lx.col, 0),
            });
            return Ok(out);
        };
        let tok = if c.is_ascii_digit() {
            lx.number()?
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let word = lx.take_while(|b| b.is_ascii_alphanumeric() || b == b'_');
            Tok::keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()))
        } else if c == b'"' {
            lx.string()?
        } else {
            lx.punct()?
        };
        out.push(Token {
            tok,
            span: Span::new(start.0, start.1, start.2, lx.pos - start.0),
        });
    }
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.bytes.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if c & 0xC0 != 0x80 {
            // count chars, not UTF-8 continuation bytes
            self.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, pred: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
        &self.src[start..self.pos]
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek_at(1) == Some(b'/') => {
                    while self.peek().is_some_and(|c| c != b'\n') {
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn error_here(&self, len: usize, expected: &[&str], found: String) -> ParseError {
        ParseError {
            span: Span::new(self.pos, self.line, self.col, len),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
            message: None,
        }
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let (start, line, col) = (self.pos, self.line, self.col);
        self.take_while(|b| b.is_ascii_digit());
        let mut is_real = false;
        if self.peek() == Some(b'.') && self.peek_at(1).is_some_and(|b| b.is_ascii_digit()) {
            is_real = true;
            self.bump();
            self.take_while(|b| b.is_ascii_digit());
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let sign = usize::from(matches!(self.peek_at(1), Some(b'+' | b'-')));
            if self.peek_at(1 + sign).is_some_and(|b| b.is_ascii_digit()) {
                is_real = true;
                for _ in 0..=sign {
                    self.bump();
                }
                self.take_while(|b| b.is_ascii_digit());
            }
        }
        let text = &self.src[start..self.pos];
        let span = Span::new(start, line, col, self.pos - start);
        let out_of_range = |what: &str| ParseError {
            span,
            expected: vec![what.to_string()],
            found: format!("`{text}`"),
            message: Some(format!("{what} literal out of range")),
        };
        if is_real {
            let v: f64 = text.parse().map_err(|_| out_of_range("real"))?;
            if !v.is_finite() {
                return Err(out_of_range("real"));
            }
            Ok(Tok::Real(v))
        } else {
            text.parse().map(Tok::Int).map_err(|_| out_of_range("integer"))
        }
    }

    fn string(&mut self) -> Result<Tok, ParseError> {
        let (start, line, col) = (self.pos, self.line, self.col);
        self.bump();
        let mut value = String::new();
        loop {
            match self.peek() {
                None | Some(b'\n') => {
                    return Err(ParseError {
                        span: Span::new(start, line, col, self.pos - start),
                        expected: vec!["`\"`".to_string()],
                        found: "end of line".to_string(),
                        message: Some("unterminated string literal".to_string()),
                    })
                }
                Some(b'"') => {
                    self.bump();
                    return Ok(Tok::Str(value));
                }
                Some(b'\\') => {
                    self.bump();
                    let escaped = match self.peek() {
                        Some(b'n') => '\n',
                        Some(b't') => '\t',
                        Some(b'"') => '"',
                        Some(b'\\') => '\\',
                        _ => {
                            return Err(self.error_here(
                                1,
                                &["escape sequence"],
                                "invalid escape".to_string(),
                            ))
                        }
                    };
                    self.bump();
                    value.push(escaped);
                }
                Some(_) => {
                    let rest = &self.src[self.pos..];
                    let ch = rest.chars().next().expect("non-empty");
                    for _ in 0..ch.len_utf8() {
                        self.bump();
                    }
                    value.push(ch);
                }
            }
        }
    }

    fn punct(&mut self) -> Result<Tok, ParseError> {
        let c = self.peek().expect("caller checked");
        let next = self.peek_at(1);
        let (tok, len) = match (c, next) {
            (b'-', Some(b'>')) => (Tok::Arrow, 2),
            (b'=', Some(b'=')) => (Tok::EqEq, 2),
            (b'!', Some(b'=')) => (Tok::NotEq, 2),
            (b'<', Some(b'=')) => (Tok::Le, 2),
            (b'>', Some(b'=')) => (Tok::Ge, 2),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b'{', _) => (Tok::LBrace, 1),
            (b'}', _) => (Tok::RBrace, 1),
            (b'[', _) => (Tok::LBracket, 1),
            (b']', _) => (Tok::RBracket, 1),
            (b',', _) => (Tok::Comma, 1),
            (b';', _) => (Tok::Semi, 1),
            (b':', _) => (Tok::Colon, 1),
            (b'=', _) => (Tok::Assign, 1),
            (b'<', _) => (Tok::Lt, 1),
            (b'>', _) => (Tok::Gt, 1),
            (b'+', _) => (Tok::Plus, 1),
            (b'-', _) => (Tok::Minus, 1),
            (b'*', _) => (Tok::Star, 1),
            (b'/', _) => (Tok::Slash, 1),
            (b'%', _) => (Tok::Percent, 1),
            _ => {
                let ch = self.src[self.pos..].chars().next().expect("non-empty");
                return Err(self.error_here(
                    ch.len_utf8(),
                    &["token"],
                    format!("unexpected character `{ch}`"),
                ));
            }
        };
        for _ in 0..len {
            self.bump();
        }
        Ok(tok)
    }
}
