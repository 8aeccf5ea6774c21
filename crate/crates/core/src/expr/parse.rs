//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+'|'-') term)* ;
//! term    := factor (('*'|'/') factor)* ;
//! factor  := base ('^' factor)? ;
//! base    := NUMBER | 'pi' | 'e' | 'x' | FUNC '(' expr ')' | '(' expr ')' | '-' base ;
//! ```

use super::number::parse_decimal;
use super::{BinaryOp, Constant, Expr, ExprError, UnaryOp};

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Number(&'a str),
    Ident(&'a str),
    Symbol(char),
    End,
}

impl Token<'_> {
    fn describe(&self) -> String {
        match self {
            Token::Number(n) => format!("number `{n}`"),
            Token::Ident(i) => format!("identifier `{i}`"),
            Token::Symbol(c) => format!("`{c}`"),
            Token::End => "end of input".to_string(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Next token and its byte offset.
    fn next(&mut self) -> Result<(Token<'a>, usize), ExprError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(start) else {
            return Ok((Token::End, start));
        };
        if c.is_ascii_digit() || (c == b'.' && bytes.get(start + 1).is_some_and(u8::is_ascii_digit)) {
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end < bytes.len() && bytes[end] == b'.' {
                end += 1;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
            // exponent only if digits follow
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut probe = end + 1;
                if probe < bytes.len() && (bytes[probe] == b'+' || bytes[probe] == b'-') {
                    probe += 1;
                }
                if probe < bytes.len() && bytes[probe].is_ascii_digit() {
                    end = probe;
                    while end < bytes.len() && bytes[end].is_ascii_digit() {
                        end += 1;
                    }
                }
            }
            self.pos = end;
            return Ok((Token::Number(&self.src[start..end]), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((Token::Ident(&self.src[start..end]), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('\0');
        if "+-*/^()".contains(ch) {
            self.pos += 1;
            return Ok((Token::Symbol(ch), start));
        }
        Err(ExprError::Syntax {
            offset: start,
            expected: vec!["number", "identifier", "operator", "parenthesis"],
            found: format!("character `{ch}`"),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: Token<'a>,
    offset: usize,
}

const BASE_START: &[&str] = &["number", "pi", "e", "x", "function", "`(`", "`-`"];

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ExprError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (current, offset) = lexer.next()?;
        Ok(Parser { lexer, current, offset })
    }

    fn bump(&mut self) -> Result<(), ExprError> {
        let (tok, off) = self.lexer.next()?;
        self.current = tok;
        self.offset = off;
        Ok(())
    }

    fn error(&self, expected: &[&'static str]) -> ExprError {
        ExprError::Syntax { offset: self.offset, expected: expected.to_vec(), found: self.current.describe() }
    }

    fn expect(&mut self, sym: char, label: &'static str) -> Result<(), ExprError> {
        if self.current == Token::Symbol(sym) {
            self.bump()
        } else {
            Err(self.error(&[label]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.current {
                Token::Symbol('+') => BinaryOp::Add,
                Token::Symbol('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.current {
                Token::Symbol('*') => BinaryOp::Mul,
                Token::Symbol('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if self.current == Token::Symbol('^') {
            self.bump()?;
            // right-associative
            let exponent = self.factor()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        match self.current.clone() {
            Token::Number(text) => {
                let value = match parse_decimal(text) {
                    Some(r) => Expr::Rational(r),
                    None => Expr::Float(text.parse::<f64>().map_err(|_| self.error(&["number"]))?),
                };
                self.bump()?;
                Ok(value)
            }
            Token::Ident(name) => {
                let offset = self.offset;
                let leaf = match name {
                    "x" => Some(Expr::Var),
                    "pi" => Some(Expr::Const(Constant::Pi)),
                    "e" => Some(Expr::Const(Constant::E)),
                    _ => None,
                };
                if let Some(leaf) = leaf {
                    self.bump()?;
                    return Ok(leaf);
                }
                let Some(func) = UnaryOp::from_name(name) else {
                    return Err(ExprError::UnknownIdentifier { name: name.to_string(), offset });
                };
                self.bump()?;
                self.expect('(', "`(`")?;
                let arg = self.expr()?;
                self.expect(')', "`)`")?;
                Ok(Expr::unary(func, arg))
            }
            Token::Symbol('(') => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect(')', "`)`")?;
                Ok(inner)
            }
            Token::Symbol('-') => {
                self.bump()?;
                Ok(Expr::neg(self.base()?))
            }
            _ => Err(self.error(BASE_START)),
        }
    }
}

/// Parses an expression in `x`. Only `x`, `pi`, `e` and the eight function
/// names are valid identifiers.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut parser = Parser::new(text)?;
    let e = parser.expr()?;
    if parser.current != Token::End {
        return Err(parser.error(&["operator", "end of input"]));
    }
    Ok(e)
}
