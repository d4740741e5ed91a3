//! Symbolic scalar fields on a chart, with exact first derivatives.
//!
//! The metric data `alpha_ij(x)`, `beta_j(x)` and curve coordinates `c^k(t)`
//! enter the library as strings in a small expression grammar:
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ['^' int]
//! base   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers are the coordinates `x1..xN` (or the curve parameter `t`) and
//! the functions `sin, cos, exp, log, sqrt, abs` (`log` is the natural
//! logarithm). Exponents are constant integers; general powers go through
//! `exp`/`log`. Whitespace is insignificant.
//!
//! Derivatives are forward-mode dual numbers, one seeded pass per coordinate
//! direction: dimensions here are small, so simplicity wins over reverse
//! mode. There is no simplification pass; an expression evaluates exactly as
//! parsed, deterministically.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
#[cfg(not(feature = "std"))]
use num_traits::Float;
use thiserror::Error;

/// Variable namespace an expression is parsed against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarSpace {
    /// Chart coordinates `x1..xN`.
    Coords(usize),
    /// The single curve parameter `t`.
    CurveParam,
}

impl VarSpace {
    /// Number of evaluation slots (coordinates) in this namespace.
    pub fn dim(self) -> usize {
        match self {
            VarSpace::Coords(n) => n,
            VarSpace::CurveParam => 1,
        }
    }

    fn var_name(self, index: usize) -> String {
        match self {
            VarSpace::Coords(_) => format!("x{}", index + 1),
            VarSpace::CurveParam => "t".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum UnaryFn {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Neg => "-",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Abs => "abs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Tree node. The `u32` on operator nodes is the byte offset in the source,
/// kept for domain-error reporting and ignored by equality.
#[derive(Clone, Debug)]
enum Node {
    Num(f64),
    Var(usize),
    Unary(UnaryFn, Box<Node>, u32),
    Binary(BinOp, Box<Node>, Box<Node>, u32),
    Pow(Box<Node>, i32, u32),
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Node::Num(a), Node::Num(b)) => a == b,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Unary(f, a, _), Node::Unary(g, b, _)) => f == g && a == b,
            (Node::Binary(f, a1, a2, _), Node::Binary(g, b1, b2, _)) => {
                f == g && a1 == b1 && a2 == b2
            }
            (Node::Pow(a, k, _), Node::Pow(b, l, _)) => k == l && a == b,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("variable x{index} exceeds dimension {dim} (byte {offset})")]
    VarOutOfRange {
        offset: usize,
        index: usize,
        dim: usize,
    },
}

/// Domain failure during evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainError {
    SqrtOfNegative,
    LogOfNonPositive,
    DivisionByZero,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainError::SqrtOfNegative => "square root of a negative number",
            DomainError::LogOfNonPositive => "logarithm of a non-positive number",
            DomainError::DivisionByZero => "division by zero",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("point has {got} coordinates, expression expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{kind} at byte {offset} of the source expression")]
    Domain { offset: u32, kind: DomainError },
}

/// One-directional dual number: a value and its derivative along a seeded
/// direction. Arithmetic on the value lane never reads the derivative lane,
/// so dual evaluation reproduces plain evaluation bit for bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub val: f64,
    pub dot: f64,
}

impl Dual {
    pub fn constant(val: f64) -> Self {
        Dual { val, dot: 0.0 }
    }
}

/// A parsed scalar field. Immutable after construction; evaluation is pure,
/// so expressions can be shared across threads freely.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    vars: VarSpace,
    root: Node,
}

impl Expression {
    /// Parse a field of the chart coordinates `x1..x<dimension>`.
    pub fn parse(source: &str, dimension: usize) -> Result<Self, ParseError> {
        Self::parse_in(source, VarSpace::Coords(dimension))
    }

    /// Parse a function of the curve parameter `t`.
    pub fn parse_curve(source: &str) -> Result<Self, ParseError> {
        Self::parse_in(source, VarSpace::CurveParam)
    }

    fn parse_in(source: &str, vars: VarSpace) -> Result<Self, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            vars,
        };
        p.skip_ws();
        let root = p.parse_expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(ParseError::Syntax {
                offset: p.pos,
                message: "unexpected trailing input".to_string(),
            });
        }
        Ok(Expression { vars, root })
    }

    pub fn constant(value: f64, vars: VarSpace) -> Self {
        Expression {
            vars,
            root: Node::Num(value),
        }
    }

    /// Coordinate variable `x{index+1}` (or `t` in curve space).
    ///
    /// Panics if the index is out of range; this is a programmatic builder,
    /// not a parser entry point.
    pub fn var(index: usize, vars: VarSpace) -> Self {
        assert!(
            index < vars.dim(),
            "variable index {index} out of range for dimension {}",
            vars.dim()
        );
        Expression {
            vars,
            root: Node::Var(index),
        }
    }

    pub fn var_space(&self) -> VarSpace {
        self.vars
    }

    pub fn dim(&self) -> usize {
        self.vars.dim()
    }

    /// Value of the field at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.check_point(point)?;
        Ok(eval_node(&self.root, point, None)?.val)
    }

    /// Value and directional derivative along `direction` in one pass.
    pub fn eval_directional(&self, point: &[f64], direction: &[f64]) -> Result<Dual, EvalError> {
        self.check_point(point)?;
        self.check_point(direction)?;
        eval_node(&self.root, point, Some(direction))
    }

    /// Value and full gradient, one seeded dual pass per coordinate.
    pub fn eval_with_gradient(&self, point: &[f64]) -> Result<(f64, Vec<f64>), EvalError> {
        self.check_point(point)?;
        let n = self.dim();
        let mut seed = vec![0.0; n];
        let mut grad = vec![0.0; n];
        let mut value = 0.0;
        for i in 0..n {
            seed[i] = 1.0;
            let d = eval_node(&self.root, point, Some(&seed))?;
            seed[i] = 0.0;
            grad[i] = d.dot;
            value = d.val;
        }
        if n == 0 {
            value = eval_node(&self.root, point, None)?.val;
        }
        Ok((value, grad))
    }

    fn check_point(&self, point: &[f64]) -> Result<(), EvalError> {
        if point.len() != self.dim() {
            return Err(EvalError::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        Ok(())
    }

    fn unary(self, f: UnaryFn) -> Self {
        Expression {
            vars: self.vars,
            root: Node::Unary(f, Box::new(self.root), 0),
        }
    }

    fn binary(self, op: BinOp, rhs: Self) -> Self {
        assert_eq!(
            self.vars, rhs.vars,
            "cannot combine expressions over different variable spaces"
        );
        Expression {
            vars: self.vars,
            root: Node::Binary(op, Box::new(self.root), Box::new(rhs.root), 0),
        }
    }

    pub fn sin(self) -> Self {
        self.unary(UnaryFn::Sin)
    }

    pub fn cos(self) -> Self {
        self.unary(UnaryFn::Cos)
    }

    pub fn exp(self) -> Self {
        self.unary(UnaryFn::Exp)
    }

    pub fn log(self) -> Self {
        self.unary(UnaryFn::Log)
    }

    pub fn sqrt(self) -> Self {
        self.unary(UnaryFn::Sqrt)
    }

    pub fn abs(self) -> Self {
        self.unary(UnaryFn::Abs)
    }

    pub fn powi(self, k: i32) -> Self {
        Expression {
            vars: self.vars,
            root: Node::Pow(Box::new(self.root), k, 0),
        }
    }
}

impl Add for Expression {
    type Output = Expression;
    fn add(self, rhs: Self) -> Self {
        self.binary(BinOp::Add, rhs)
    }
}

impl Sub for Expression {
    type Output = Expression;
    fn sub(self, rhs: Self) -> Self {
        self.binary(BinOp::Sub, rhs)
    }
}

impl Mul for Expression {
    type Output = Expression;
    fn mul(self, rhs: Self) -> Self {
        self.binary(BinOp::Mul, rhs)
    }
}

impl Div for Expression {
    type Output = Expression;
    fn div(self, rhs: Self) -> Self {
        self.binary(BinOp::Div, rhs)
    }
}

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Self {
        self.unary(UnaryFn::Neg)
    }
}

fn eval_node(node: &Node, point: &[f64], seed: Option<&[f64]>) -> Result<Dual, EvalError> {
    match node {
        Node::Num(c) => Ok(Dual::constant(*c)),
        Node::Var(i) => Ok(Dual {
            val: point[*i],
            dot: seed.map_or(0.0, |s| s[*i]),
        }),
        Node::Unary(f, inner, off) => {
            let u = eval_node(inner, point, seed)?;
            apply_unary(*f, u, *off)
        }
        Node::Binary(op, lhs, rhs, off) => {
            let a = eval_node(lhs, point, seed)?;
            let b = eval_node(rhs, point, seed)?;
            apply_binary(*op, a, b, *off)
        }
        Node::Pow(base, k, off) => {
            let u = eval_node(base, point, seed)?;
            apply_pow(u, *k, *off)
        }
    }
}

fn apply_unary(f: UnaryFn, u: Dual, offset: u32) -> Result<Dual, EvalError> {
    let d = match f {
        UnaryFn::Neg => Dual {
            val: -u.val,
            dot: -u.dot,
        },
        UnaryFn::Sin => Dual {
            val: u.val.sin(),
            dot: u.val.cos() * u.dot,
        },
        UnaryFn::Cos => Dual {
            val: u.val.cos(),
            dot: -u.val.sin() * u.dot,
        },
        UnaryFn::Exp => {
            let e = u.val.exp();
            Dual {
                val: e,
                dot: e * u.dot,
            }
        }
        UnaryFn::Log => {
            if u.val <= 0.0 {
                return Err(EvalError::Domain {
                    offset,
                    kind: DomainError::LogOfNonPositive,
                });
            }
            Dual {
                val: u.val.ln(),
                dot: u.dot / u.val,
            }
        }
        UnaryFn::Sqrt => {
            if u.val < 0.0 {
                return Err(EvalError::Domain {
                    offset,
                    kind: DomainError::SqrtOfNegative,
                });
            }
            let r = u.val.sqrt();
            let dot = if u.dot == 0.0 { 0.0 } else { u.dot / (2.0 * r) };
            Dual { val: r, dot }
        }
        UnaryFn::Abs => Dual {
            val: u.val.abs(),
            // signum(0) taken as 0: |.| has no derivative at the kink.
            dot: if u.val == 0.0 {
                0.0
            } else {
                u.val.signum() * u.dot
            },
        },
    };
    Ok(d)
}

fn apply_binary(op: BinOp, a: Dual, b: Dual, offset: u32) -> Result<Dual, EvalError> {
    let d = match op {
        BinOp::Add => Dual {
            val: a.val + b.val,
            dot: a.dot + b.dot,
        },
        BinOp::Sub => Dual {
            val: a.val - b.val,
            dot: a.dot - b.dot,
        },
        BinOp::Mul => Dual {
            val: a.val * b.val,
            dot: a.dot * b.val + a.val * b.dot,
        },
        BinOp::Div => {
            if b.val == 0.0 {
                return Err(EvalError::Domain {
                    offset,
                    kind: DomainError::DivisionByZero,
                });
            }
            Dual {
                val: a.val / b.val,
                dot: (a.dot * b.val - a.val * b.dot) / (b.val * b.val),
            }
        }
    };
    Ok(d)
}

fn apply_pow(u: Dual, k: i32, offset: u32) -> Result<Dual, EvalError> {
    if k == 0 {
        return Ok(Dual::constant(1.0));
    }
    if k < 0 && u.val == 0.0 {
        return Err(EvalError::Domain {
            offset,
            kind: DomainError::DivisionByZero,
        });
    }
    let val = u.val.powi(k);
    let dot = f64::from(k) * u.val.powi(k - 1) * u.dot;
    Ok(Dual { val, dot })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: VarSpace,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    /// Consume an operator character, treating U+2212 (typographic minus)
    /// as '-'.
    fn eat_op(&mut self, op: u8) -> bool {
        if self.peek() == Some(op) {
            self.pos += 1;
            self.skip_ws();
            return true;
        }
        if op == b'-' && self.src[self.pos..].starts_with("\u{2212}".as_bytes()) {
            self.pos += 3;
            self.skip_ws();
            return true;
        }
        false
    }

    fn syntax<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        })
    }

    fn parse_expr(&mut self) -> Result<Node, ParseError> {
        let mut node = if self.eat_op(b'-') {
            let off = self.pos as u32;
            Node::Unary(UnaryFn::Neg, Box::new(self.parse_term()?), off)
        } else {
            self.parse_term()?
        };
        loop {
            let off = self.pos as u32;
            if self.eat_op(b'+') {
                node = Node::Binary(BinOp::Add, Box::new(node), Box::new(self.parse_term()?), off);
            } else if self.eat_op(b'-') {
                node = Node::Binary(BinOp::Sub, Box::new(node), Box::new(self.parse_term()?), off);
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn parse_term(&mut self) -> Result<Node, ParseError> {
        let mut node = self.parse_factor()?;
        loop {
            let off = self.pos as u32;
            if self.eat_op(b'*') {
                node = Node::Binary(
                    BinOp::Mul,
                    Box::new(node),
                    Box::new(self.parse_factor()?),
                    off,
                );
            } else if self.eat_op(b'/') {
                node = Node::Binary(
                    BinOp::Div,
                    Box::new(node),
                    Box::new(self.parse_factor()?),
                    off,
                );
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn parse_factor(&mut self) -> Result<Node, ParseError> {
        if self.eat_op(b'-') {
            let off = self.pos as u32;
            return Ok(Node::Unary(UnaryFn::Neg, Box::new(self.parse_factor()?), off));
        }
        let base = self.parse_base()?;
        let off = self.pos as u32;
        if self.eat_op(b'^') {
            let k = self.parse_int()?;
            return Ok(Node::Pow(Box::new(base), k, off));
        }
        Ok(base)
    }

    fn parse_int(&mut self) -> Result<i32, ParseError> {
        let negative = self.eat_op(b'-');
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.syntax("expected integer exponent");
        }
        let digits = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let k: i32 = digits.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: "integer exponent out of range".to_string(),
        })?;
        self.skip_ws();
        Ok(if negative { -k } else { k })
    }

    fn parse_base(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.parse_expr()?;
                if !self.eat_op(b')') {
                    return self.syntax("expected ')'");
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.parse_number(),
            Some(c) if c.is_ascii_alphabetic() => self.parse_ident(),
            _ => self.syntax("expected a number, identifier or '('"),
        }
    }

    fn parse_number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // 'e' belonged to something else (e.g. `2*exp(x1)` typo'd);
                // let the caller report it.
                self.pos = mark;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("invalid number literal `{text}`"),
        })?;
        self.skip_ws();
        Ok(Node::Num(value))
    }

    fn parse_ident(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        self.skip_ws();
        if self.peek() == Some(b'(') {
            let func = match name.as_str() {
                "sin" => UnaryFn::Sin,
                "cos" => UnaryFn::Cos,
                "exp" => UnaryFn::Exp,
                "log" => UnaryFn::Log,
                "sqrt" => UnaryFn::Sqrt,
                "abs" => UnaryFn::Abs,
                _ => {
                    return Err(ParseError::UnknownFunction {
                        offset: start,
                        name,
                    })
                }
            };
            self.pos += 1;
            self.skip_ws();
            let arg = self.parse_expr()?;
            if !self.eat_op(b')') {
                return self.syntax("expected ')' after function argument");
            }
            return Ok(Node::Unary(func, Box::new(arg), start as u32));
        }
        if name == "t" {
            return match self.vars {
                VarSpace::CurveParam => Ok(Node::Var(0)),
                VarSpace::Coords(_) => Err(ParseError::UnknownIdentifier {
                    offset: start,
                    name,
                }),
            };
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|c| c.is_ascii_digit()) {
                let index: usize = digits.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: "variable index out of range".to_string(),
                })?;
                return match self.vars {
                    VarSpace::Coords(dim) => {
                        if index == 0 || index > dim {
                            Err(ParseError::VarOutOfRange {
                                offset: start,
                                index,
                                dim,
                            })
                        } else {
                            Ok(Node::Var(index - 1))
                        }
                    }
                    VarSpace::CurveParam => Err(ParseError::UnknownIdentifier {
                        offset: start,
                        name,
                    }),
                };
            }
        }
        Err(ParseError::UnknownIdentifier {
            offset: start,
            name,
        })
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print_node(&self.root, self.vars, f)
    }
}

fn print_node(node: &Node, vars: VarSpace, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Num(c) => {
            if *c < 0.0 {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        Node::Var(i) => f.write_str(&vars.var_name(*i)),
        Node::Unary(UnaryFn::Neg, inner, _) => {
            f.write_str("(-")?;
            print_node(inner, vars, f)?;
            f.write_str(")")
        }
        Node::Unary(func, inner, _) => {
            f.write_str(func.name())?;
            f.write_str("(")?;
            print_node(inner, vars, f)?;
            f.write_str(")")
        }
        Node::Binary(op, lhs, rhs, _) => {
            f.write_str("(")?;
            print_node(lhs, vars, f)?;
            write!(f, " {} ", op.symbol())?;
            print_node(rhs, vars, f)?;
            f.write_str(")")
        }
        Node::Pow(base, k, _) => {
            let needs_parens = !matches!(**base, Node::Num(_) | Node::Var(_));
            if needs_parens {
                f.write_str("(")?;
                print_node(base, vars, f)?;
                f.write_str(")")?;
            } else {
                print_node(base, vars, f)?;
            }
            if *k < 0 {
                write!(f, "^({k})")
            } else {
                write!(f, "^{k}")
            }
        }
    }
}
