//! Plain-text infix grammar for symbolic models.
//!
//! Emitted form: decimal numbers with 17 significant digits, variables
//! `u<k>`, functions `sin cos exp log square`, operators `+ - *`, and
//! parentheses. The parser additionally accepts implicit multiplication
//! between a number and a following variable, function, or parenthesis
//! (`0.015u1`), and prefix minus, so published-style expressions paste in
//! directly. Serialize-then-parse is bit-exact.

use crate::error::{Error, Result};
use crate::regress::symbolic::expr::{BinaryOp, Expr, UnaryOp};
use crate::scalar::Real;

/// Canonical rendering of an expression.
pub fn print_expr<T: Real>(expr: &Expr<T>) -> String {
    let mut out = String::new();
    write_expr(expr, 0, &mut out);
    out
}

// Precedence: 1 for +/-, 2 for *, atoms bind tightest.
fn write_expr<T: Real>(expr: &Expr<T>, parent_level: u8, out: &mut String) {
    match expr {
        Expr::Constant(c) => {
            let v = c.as_f64();
            if v < 0.0 || v.is_sign_negative() {
                out.push('(');
                out.push_str(&format!("{v:.16e}"));
                out.push(')');
            } else {
                out.push_str(&format!("{v:.16e}"));
            }
        }
        Expr::Variable(v) => out.push_str(&format!("u{}", v + 1)),
        Expr::Unary(op, a) => {
            out.push_str(op.name());
            out.push('(');
            write_expr(a, 0, out);
            out.push(')');
        }
        Expr::Binary(op, a, b) => {
            let level = match op {
                BinaryOp::Add | BinaryOp::Sub => 1,
                BinaryOp::Mul => 2,
            };
            let needs_parens = level < parent_level || (level == parent_level && parent_level > 0);
            if needs_parens {
                out.push('(');
            }
            write_expr(a, level, out);
            out.push(' ');
            out.push(op.symbol());
            out.push(' ');
            // The right operand of - binds one tighter so a - (b + c)
            // round-trips; same-level right operands of * get parens too
            // (multiplication of protected primitives is associative in
            // value but we keep the tree shape exact).
            let right_level = match op {
                BinaryOp::Sub => level + 1,
                BinaryOp::Add => level,
                BinaryOp::Mul => level + 1,
            };
            write_expr(b, right_level, out);
            if needs_parens {
                out.push(')');
            }
        }
    }
}

struct Parser<'a, T> {
    text: &'a [u8],
    pos: usize,
    _marker: std::marker::PhantomData<T>,
}

/// Parses an expression in the model grammar.
pub fn parse_expr<T: Real>(text: &str) -> Result<Expr<T>> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        _marker: std::marker::PhantomData,
    };
    let expr = p.expression()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(p.error("trailing input"));
    }
    Ok(expr)
}

impl<T: Real> Parser<'_, T> {
    fn error(&self, detail: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            detail: detail.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expression(&mut self) -> Result<Expr<T>> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Binary(BinaryOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Binary(BinaryOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr<T>> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Binary(BinaryOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                // Implicit multiplication: `0.015u1`, `2sin(x)`, `3(...)`.
                Some(c) if c == b'(' || c.is_ascii_alphabetic() => {
                    let rhs = self.factor()?;
                    lhs = Expr::Binary(BinaryOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr<T>> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                // A prefix minus directly on a number folds into the
                // constant; anything else becomes 0 - x.
                match self.peek() {
                    Some(c) if c.is_ascii_digit() || c == b'.' => {
                        let value = self.number()?;
                        Ok(Expr::Constant(T::of(-value)))
                    }
                    _ => {
                        let inner = self.factor()?;
                        Ok(Expr::Binary(
                            BinaryOp::Sub,
                            Box::new(Expr::Constant(T::zero())),
                            Box::new(inner),
                        ))
                    }
                }
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expression()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let value = self.number()?;
                Ok(Expr::Constant(T::of(value)))
            }
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(self.error("expected a factor")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self
            .text
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_digit() || *c == b'.')
        {
            self.pos += 1;
        }
        // Exponent part: e or E, optional sign, digits.
        if self.text.get(self.pos).is_some_and(|c| *c == b'e' || *c == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self
                .text
                .get(self.pos)
                .is_some_and(|c| *c == b'+' || *c == b'-')
            {
                self.pos += 1;
            }
            if self.text.get(self.pos).is_some_and(u8::is_ascii_digit) {
                while self.text.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. `2exp(...)` implicit mul).
                self.pos = mark;
            }
        }
        let slice = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
        slice
            .parse::<f64>()
            .map_err(|_| self.error("malformed number"))
    }

    fn identifier(&mut self) -> Result<Expr<T>> {
        self.skip_ws();
        let start = self.pos;
        while self
            .text
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
        if let Some(index) = name.strip_prefix('u').and_then(|d| {
            let d = d.strip_prefix('_').unwrap_or(d);
            d.parse::<usize>().ok()
        }) {
            if index == 0 {
                return Err(self.error("variables are numbered from u1"));
            }
            return Ok(Expr::Variable(index - 1));
        }
        let op = match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "square" => UnaryOp::Square,
            other => return Err(self.error(&format!("unknown identifier `{other}`"))),
        };
        if self.peek() != Some(b'(') {
            return Err(self.error("expected `(` after function name"));
        }
        self.pos += 1;
        let inner = self.expression()?;
        if self.peek() != Some(b')') {
            return Err(self.error("expected `)`"));
        }
        self.pos += 1;
        Ok(Expr::Unary(op, Box::new(inner)))
    }
}
