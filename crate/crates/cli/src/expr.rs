//! Forcing expressions over `t`, `x` and `dx`.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | name | name '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! Exponents (of `^` and `pow`) must be constant. A non-integer power of a
//! negative base is taken as `sign(u)·|u|^p`.

use thiserror::Error;

use fraclangevin::solver::Forcing;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X,
    Dx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Arctan,
    Exp,
    Sin,
    Cos,
    Abs,
}

impl Func {
    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Arctan => v.atan(),
            Func::Exp => v.exp(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    /// Base raised to a constant exponent.
    Pow(Box<Expr>, f64),
}

/// `u^p` with the odd extension for non-integer `p`.
pub fn odd_pow(u: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        u.powi(p as i32)
    } else {
        u.signum() * u.abs().powf(p)
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let mut p = Parser::new(src);
        let e = p.sum()?;
        p.skip_ws();
        if let Some(c) = p.peek() {
            return Err(p.error_here(format!("unexpected '{c}'")));
        }
        Ok(e)
    }

    /// Parses an expression that must not mention `t`, `x` or `dx`.
    pub fn parse_constant(src: &str) -> Result<f64, ParseError> {
        let e = Expr::parse(src)?;
        if !e.is_constant() {
            return Err(ParseError {
                column: 1,
                message: "expected a constant expression".into(),
            });
        }
        Ok(e.eval(0.0, 0.0, 0.0))
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn eval(&self, t: f64, x: f64, dx: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Dx) => dx,
            Expr::Neg(a) => -a.eval(t, x, dx),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(t, x, dx), b.eval(t, x, dx));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(t, x, dx)),
            Expr::Pow(a, p) => odd_pow(a.eval(t, x, dx), *p),
        }
    }
}

/// An [`Expr`] used as the right-hand side `f(t, x, x′)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprForcing(pub Expr);

impl Forcing for ExprForcing {
    fn eval(&self, t: f64, x: f64, dx: f64) -> f64 {
        self.0.eval(t, x, dx)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            column: pos + 1,
            message: message.into(),
        }
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        self.error_at(self.pos, message)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error_here(match self.peek() {
                Some(got) => format!("expected '{c}', found '{got}'"),
                None => format!("expected '{c}', found end of input"),
            }))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            let exponent = self.unary()?;
            let p = self.constant_exponent(&exponent, start)?;
            return Ok(Expr::Pow(Box::new(base), p));
        }
        Ok(base)
    }

    fn constant_exponent(&self, e: &Expr, start: usize) -> Result<f64, ParseError> {
        if !e.is_constant() {
            return Err(self.error_at(start, "exponent must be a constant"));
        }
        let p = e.eval(0.0, 0.0, 0.0);
        if !p.is_finite() {
            return Err(self.error_at(start, "exponent is not finite"));
        }
        Ok(p)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error_here("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                self.name(&name, start)
            }
            Some(c) => Err(self.error_here(format!("unexpected '{c}'"))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.error_at(start, format!("invalid number '{text}'")))
    }

    fn name(&mut self, name: &str, start: usize) -> Result<Expr, ParseError> {
        let func = match name {
            "t" => return Ok(Expr::Var(Var::T)),
            "x" => return Ok(Expr::Var(Var::X)),
            "dx" => return Ok(Expr::Var(Var::Dx)),
            "e" => return Ok(Expr::Num(std::f64::consts::E)),
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "arctan" | "atan" => Some(Func::Arctan),
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "abs" => Some(Func::Abs),
            "pow" => None,
            _ => return Err(self.error_at(start, format!("unknown name '{name}'"))),
        };
        self.expect('(')?;
        let arg = self.sum()?;
        let out = match func {
            Some(f) => Expr::Call(f, Box::new(arg)),
            None => {
                self.expect(',')?;
                self.skip_ws();
                let p_start = self.pos;
                let exponent = self.sum()?;
                let p = self.constant_exponent(&exponent, p_start)?;
                Expr::Pow(Box::new(arg), p)
            }
        };
        self.expect(')')?;
        Ok(out)
    }
}
