use thiserror::Error;

use super::{Expr, Func, Node};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier {name} at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable {name} out of range for dimension {dim} at byte {offset}")]
    VarOutOfRange { name: String, dim: usize, offset: usize },
    #[error("path parameter t is not allowed here (byte {offset})")]
    ParameterNotAllowed { offset: usize },
    #[error("exponent at byte {offset} must be an integer literal unless the base is exp(..) or sqrt(..)")]
    NonIntegerExponent { offset: usize },
}

/// Parse `src` into an expression over `x1..x{dim}` (and `t` if `allow_t`).
///
/// Precedence, tightest first: unary minus, `^` (right-associative),
/// `*` `/`, `+` `-`.
pub fn parse_expr(src: &str, dim: usize, allow_t: bool) -> Result<Expr, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, dim, allow_t };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected '{}'", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
    allow_t: bool,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(self.term()?.neg_expr());
            } else {
                break;
            }
        }
        Ok(Expr::add_all(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                acc = Expr::mul_all([acc, rhs]);
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                acc = acc.div_expr(&rhs);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg_expr());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let at = self.pos;
        let exponent = self.factor()?;
        let value = exponent.as_const().ok_or(ParseError::NonIntegerExponent { offset: at })?;
        if value.fract() == 0.0 && value.abs() <= i32::MAX as f64 {
            return Ok(base.powi(value as i32));
        }
        // Positive bases admit real exponents through exp/log.
        match base.node() {
            Node::Func(Func::Exp, arg) => Ok((Expr::constant(value) * arg).exp()),
            Node::Func(Func::Sqrt, arg) => Ok((Expr::constant(value / 2.0) * arg.ln()).exp()),
            _ => Err(ParseError::NonIntegerExponent { offset: at }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.syntax(format!("unexpected '{}'", c as char))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut mantissa = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.syntax("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("malformed number {text}"),
        })?;
        if !value.is_finite() {
            return Err(ParseError::Syntax { offset: start, message: format!("number {text} overflows") });
        }
        Ok(Expr::constant(value))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.syntax(format!("expected '(' after {name}")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax("expected ')'"));
            }
            return Ok(Expr::apply(func, &arg));
        }
        if name == "t" {
            if !self.allow_t {
                return Err(ParseError::ParameterNotAllowed { offset: start });
            }
            return Ok(Expr::t());
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().unwrap_or(0);
                if index == 0 || index > self.dim {
                    return Err(ParseError::VarOutOfRange { name: name.to_string(), dim: self.dim, offset: start });
                }
                return Ok(Expr::coord(index - 1));
            }
        }
        Err(ParseError::UnknownIdentifier { name: name.to_string(), offset: start })
    }
}
