use std::sync::Arc;

use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("invalid variable list: {0}")]
    Variables(String),
}

impl ParseError {
    /// Byte offset into the source, when the error has one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::UnknownFunction { offset, .. } => Some(*offset),
            ParseError::Variables(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                out.push((Token::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Token::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Token::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    vars: &'a [Arc<str>],
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Token, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Token::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // `^` binds tighter than prefix minus: -p^2 is -(p^2).
    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Token::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Token::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Token::Num(v) => Ok(Expr::Const(v)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if *self.peek() == Token::LParen {
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
                        name: name.clone(),
                        offset,
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match self.vars.iter().find(|v| ***v == *name) {
                    Some(v) => Ok(Expr::Var(v.clone())),
                    None if Func::from_name(&name).is_some() => {
                        Err(syntax(self.offset(), format!("expected `(` after `{name}`")))
                    }
                    None => Err(ParseError::UnknownIdentifier { name, offset }),
                }
            }
            other => Err(syntax(offset, format!("expected operand, found {}", other.describe()))),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Token::RParen => {
                self.bump();
                Ok(())
            }
            other => Err(syntax(
                self.offset(),
                format!("expected `)`, found {}", other.describe()),
            )),
        }
    }
}

/// Parses `source` as an expression in the declared `variables`.
///
/// One or two distinct variable names are accepted; any other identifier
/// that is not a function call is rejected.
pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Expr, ParseError> {
    let vars: Vec<Arc<str>> = variables.iter().map(|v| Arc::from(v.as_ref())).collect();
    parse_interned(source, &vars)
}

pub(crate) fn parse_interned(source: &str, vars: &[Arc<str>]) -> Result<Expr, ParseError> {
    if vars.is_empty() || vars.len() > 2 {
        return Err(ParseError::Variables(format!(
            "expected one or two variables, got {}",
            vars.len()
        )));
    }
    if vars.len() == 2 && vars[0] == vars[1] {
        return Err(ParseError::Variables(format!("duplicate variable `{}`", vars[0])));
    }
    for v in vars {
        let ok = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok || Func::from_name(v).is_some() {
            return Err(ParseError::Variables(format!("`{v}` is not a usable variable name")));
        }
    }
    if source.trim().is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        vars,
    };
    let e = parser.expr()?;
    match parser.peek() {
        Token::End => Ok(e),
        other => Err(syntax(
            parser.offset(),
            format!("unexpected {}", other.describe()),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Box<Expr> {
        Box::new(Expr::Const(v))
    }

    fn v(name: &str) -> Box<Expr> {
        Box::new(Expr::var(name))
    }

    #[test]
    fn half_square() {
        let e = parse("p^2/2", &["p"]).unwrap();
        assert_eq!(e, Expr::Div(Box::new(Expr::Pow(v("p"), c(2.0))), c(2.0)));
    }

    #[test]
    fn two_variables() {
        let e = parse("p*y + sin(y)", &["p", "y"]).unwrap();
        assert_eq!(
            e,
            Expr::Add(
                Box::new(Expr::Mul(v("p"), v("y"))),
                Box::new(Expr::Call(Func::Sin, v("y")))
            )
        );
    }

    #[test]
    fn syntax_error_offset() {
        let err = parse("p +* 2", &["p"]).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 3, .. }), "{err:?}");
        assert_eq!(err.offset(), Some(3));
    }

    #[test]
    fn unary_minus_is_looser_than_power() {
        let e = parse("-p^2", &["p"]).unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::Pow(v("p"), c(2.0)))));
        assert_eq!(e.eval(&[("p", 3.0)]).unwrap(), -9.0);
        // right associative
        let e = parse("2^3^2", &["p"]).unwrap();
        assert_eq!(e.eval(&[("p", 0.0)]).unwrap(), 512.0);
    }

    #[test]
    fn numbers() {
        let e = parse("1.5e2 + .25 + 3E-1", &["p"]).unwrap();
        assert_eq!(e.eval(&[("p", 0.0)]).unwrap(), 150.55);
        assert!(matches!(parse("1.2.3", &["p"]), Err(ParseError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn identifier_errors() {
        assert_eq!(
            parse("p + q", &["p"]),
            Err(ParseError::UnknownIdentifier {
                name: "q".into(),
                offset: 4
            })
        );
        assert_eq!(
            parse("abs(p)", &["p"]),
            Err(ParseError::UnknownFunction {
                name: "abs".into(),
                offset: 0
            })
        );
        assert!(matches!(parse("sin + 1", &["p"]), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(parse("", &["p"]), Err(ParseError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("(p + 1", &["p"]), Err(ParseError::Syntax { offset: 6, .. })));
        assert!(matches!(parse("p)", &["p"]), Err(ParseError::Syntax { offset: 1, .. })));
        assert!(matches!(parse("2p", &["p"]), Err(ParseError::Syntax { offset: 1, .. })));
        assert!(matches!(parse("p # 1", &["p"]), Err(ParseError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn variable_list_is_checked() {
        assert!(matches!(parse("p", &[] as &[&str]), Err(ParseError::Variables(_))));
        assert!(matches!(parse("p", &["p", "p"]), Err(ParseError::Variables(_))));
        assert!(matches!(parse("p", &["p", "y", "z"]), Err(ParseError::Variables(_))));
        assert!(matches!(parse("p", &["sin"]), Err(ParseError::Variables(_))));
    }
}
