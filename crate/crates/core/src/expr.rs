//! A small arithmetic expression language for problem coefficients.
//!
//! Coefficient fields such as `b(x,t)`, `f(x,t)`, the boundary traces and the
//! initial profile are written as strings in problem files and parsed into an
//! immutable [`Expression`].
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | power ;
//! power    = primary [ "^" [ "+" | "-" ] integer ] ;
//! primary  = number | constant | variable | function "(" expr ")" | "(" expr ")" ;
//! number   = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!          | "." digits [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! constant = "pi" | "e" ;
//! variable = "x" | "t" ;
//! function = "exp" | "sin" | "cos" | "sqrt" | "ln" ;
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. Exponents are
//! integer literals only. Whitespace is ignored between tokens.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use core::fmt;

use thiserror::Error;

/// Independent variables of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    T,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::T => "t",
        }
    }
}

/// The set of variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarSet {
    pub x: bool,
    pub t: bool,
}

impl VarSet {
    pub const X: VarSet = VarSet { x: true, t: false };
    pub const T: VarSet = VarSet { x: false, t: true };
    pub const XT: VarSet = VarSet { x: true, t: true };
    pub const NONE: VarSet = VarSet { x: false, t: false };

    pub fn contains(self, var: Var) -> bool {
        match var {
            Var::X => self.x,
            Var::T => self.t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Ln,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "ln" => Func::Ln,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Ln => "ln",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax {
        offset: usize,
        message: &'static str,
    },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of a nonpositive number")]
    LogOfNonPositive,
    #[error("square root of a negative number")]
    SqrtOfNegative,
}

/// A parsed, immutable coefficient expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    vars: VarSet,
}

impl Expression {
    pub fn parse(source: &str, allowed: VarSet) -> Result<Expression, ParseError> {
        let mut parser = Parser {
            src: source.as_bytes(),
            pos: 0,
            allowed,
        };
        parser.skip_ws();
        if parser.at_end() {
            return Err(parser.error("empty expression"));
        }
        let root = parser.expr()?;
        parser.skip_ws();
        if !parser.at_end() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Expression {
            root,
            vars: allowed,
        })
    }

    /// A constant expression.
    pub fn constant(value: f64) -> Expression {
        Expression {
            root: Node::Const(value),
            vars: VarSet::NONE,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Variables the expression was allowed to reference when parsed.
    pub fn allowed_vars(&self) -> VarSet {
        self.vars
    }

    /// Evaluates at the point `(x, t)`. Variables the expression does not use are ignored.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        eval_node(&self.root, x, t)
    }
}

impl fmt::Display for Expression {
    /// Fully parenthesized form; reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, f)
    }
}

fn write_node(node: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Const(c) => write!(f, "{:?}", c),
        Node::Var(v) => f.write_str(v.name()),
        Node::Neg(a) => {
            f.write_str("(-")?;
            write_node(a, f)?;
            f.write_str(")")
        }
        Node::Add(a, b) => write_binary(a, "+", b, f),
        Node::Sub(a, b) => write_binary(a, "-", b, f),
        Node::Mul(a, b) => write_binary(a, "*", b, f),
        Node::Div(a, b) => write_binary(a, "/", b, f),
        Node::Pow(a, n) => {
            f.write_str("(")?;
            write_node(a, f)?;
            write!(f, "^{})", n)
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(a, f)?;
            f.write_str(")")
        }
    }
}

fn write_binary(a: &Node, op: &str, b: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("(")?;
    write_node(a, f)?;
    f.write_str(op)?;
    write_node(b, f)?;
    f.write_str(")")
}

fn eval_node(node: &Node, x: f64, t: f64) -> Result<f64, EvalError> {
    Ok(match node {
        Node::Const(c) => *c,
        Node::Var(Var::X) => x,
        Node::Var(Var::T) => t,
        Node::Neg(a) => -eval_node(a, x, t)?,
        Node::Add(a, b) => eval_node(a, x, t)? + eval_node(b, x, t)?,
        Node::Sub(a, b) => eval_node(a, x, t)? - eval_node(b, x, t)?,
        Node::Mul(a, b) => eval_node(a, x, t)? * eval_node(b, x, t)?,
        Node::Div(a, b) => {
            let num = eval_node(a, x, t)?;
            let den = eval_node(b, x, t)?;
            if den == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            num / den
        }
        Node::Pow(a, n) => int_pow(eval_node(a, x, t)?, *n)?,
        Node::Call(func, a) => {
            let v = eval_node(a, x, t)?;
            match func {
                Func::Exp => libm::exp(v),
                Func::Sin => libm::sin(v),
                Func::Cos => libm::cos(v),
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(EvalError::SqrtOfNegative);
                    }
                    libm::sqrt(v)
                }
                Func::Ln => {
                    if v <= 0.0 {
                        return Err(EvalError::LogOfNonPositive);
                    }
                    libm::log(v)
                }
            }
        }
    })
}

fn int_pow(base: f64, exp: i32) -> Result<f64, EvalError> {
    let mut n = exp.unsigned_abs();
    let mut acc = 1.0;
    let mut sq = base;
    while n > 0 {
        if n & 1 == 1 {
            acc *= sq;
        }
        sq *= sq;
        n >>= 1;
    }
    if exp < 0 {
        if acc == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        acc = 1.0 / acc;
    }
    Ok(acc)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    allowed: VarSet,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &'static str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message,
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    /// Consumes `c` (after whitespace) if it is next.
    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat(b'-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let negative = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer exponent"));
        }
        let digits = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let magnitude: i32 = digits.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: "exponent out of range",
        })?;
        Ok(Node::Pow(
            Box::new(base),
            if negative { -magnitude } else { magnitude },
        ))
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut mantissa = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            return Err(ParseError::Syntax {
                offset: start,
                message: "malformed number",
            });
        }
        // An exponent marker only counts when digits follow it.
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: "malformed number",
        })?;
        if !value.is_finite() {
            return Err(ParseError::Syntax {
                offset: start,
                message: "number out of range",
            });
        }
        Ok(Node::Const(value))
    }

    fn identifier(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.error("expected `(` after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Node::Call(func, Box::new(arg)));
        }
        let var = match name {
            "pi" => return Ok(Node::Const(core::f64::consts::PI)),
            "e" => return Ok(Node::Const(core::f64::consts::E)),
            "x" => Var::X,
            "t" => Var::T,
            _ => {
                return Err(ParseError::UnknownVariable {
                    name: name.to_string(),
                    offset: start,
                })
            }
        };
        if !self.allowed.contains(var) {
            return Err(ParseError::UnknownVariable {
                name: name.to_string(),
                offset: start,
            });
        }
        Ok(Node::Var(var))
    }
}
