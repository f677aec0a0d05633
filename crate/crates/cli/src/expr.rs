//! Polynomial expressions in the generator coordinates `x` and `y`.
//!
//! Grammar: sums and differences of products, `^` with a nonnegative integer
//! exponent, unary minus, parentheses, decimal literals.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprError {
    pub offset: usize,
    pub msg: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.offset, self.msg)
    }
}

impl std::error::Error for ExprError {}

impl Expr {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Pow(a, n) => a.eval(x, y).powi(*n as i32),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected {:?}", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ExprError {
        ExprError {
            offset: self.pos,
            msg: msg.into(),
        }
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

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if c == b'+' {
                Expr::Add(Box::new(acc), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(acc), Box::new(rhs))
            };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
                }
                // implicit product: 2x, 3(x+1), x y
                Some(c) if c == b'(' || c == b'x' || c == b'y' || c.is_ascii_digit() || c == b'.' => {
                    acc = Expr::Mul(Box::new(acc), Box::new(self.power()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
            let n: u32 = digits
                .parse()
                .map_err(|_| ExprError {
                    offset: start,
                    msg: "exponent must be a nonnegative integer".into(),
                })?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(Expr::X)
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(Expr::Y)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
                    self.pos += 1;
                }
                // exponent part: 1e-3
                if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                        self.pos += 1;
                    }
                    let digits = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if self.pos == digits {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
                text.parse().map(Expr::Num).map_err(|_| ExprError {
                    offset: start,
                    msg: format!("bad number {text:?}"),
                })
            }
            Some(c) => Err(self.error(format!("unexpected {:?}", c as char))),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(src: &str, x: f64, y: f64) -> f64 {
        parse(src).unwrap().eval(x, y)
    }

    #[test]
    fn precedence_and_powers() {
        assert_eq!(at("1 + 2*x^2 - y", 3.0, 4.0), 15.0);
        assert_eq!(at("-x^2", 3.0, 0.0), -9.0);
        assert_eq!(at("(x + y)^3", 1.0, 1.0), 8.0);
        assert_eq!(at("2x y + 3(x - 1)", 2.0, 5.0), 23.0);
        assert_eq!(at("1.5e1 * x", 2.0, 0.0), 30.0);
        assert_eq!(at("x - y - 1", 5.0, 1.0), 3.0);
    }

    #[test]
    fn rejects_non_polynomials() {
        assert!(parse("x^-1").is_err());
        assert!(parse("sin(x)").is_err());
        assert!(parse("x +").is_err());
        assert!(parse("(x").is_err());
        assert_eq!(parse("x $").unwrap_err().offset, 2);
    }
}
