//! A small expression language for test integrands.
//!
//! Grammar, with `^` right-associative and binding tighter than unary minus
//! (so `-x^2` is the negation of `x^2`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `x` in one dimension and `x1`, `x2` in two. Besides parsed
//! expressions there are built-in families (power singularities, box
//! indicators, oscillations, constants) that lower to the same [`Ast`].

use std::sync::Arc;

use thiserror::Error;

use crate::grid::{Grid, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Ln,
    Exp,
    Sin,
    Cos,
    Pow,
    Step,
    Min,
    Max,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Pow => "pow",
            Func::Step => "step",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "ln" => Func::Ln,
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "pow" => Func::Pow,
            "step" => Func::Step,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// A coordinate variable together with the dimension it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    X1,
    X2,
}

impl Var {
    pub fn axis(self) -> usize {
        match self {
            Var::X | Var::X1 => 0,
            Var::X2 => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::X1 => "x1",
            Var::X2 => "x2",
        }
    }

    fn dim(self) -> usize {
        match self {
            Var::X => 1,
            Var::X1 | Var::X2 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Num(f64),
    Var(Var),
    Neg(Box<Ast>),
    Bin(BinOp, Box<Ast>, Box<Ast>),
    Call(Func, Vec<Ast>),
}

impl Ast {
    pub fn num(v: f64) -> Ast {
        // Negative literals are kept as a negation so printing and reparsing
        // reproduce the same tree.
        if v < 0.0 {
            Ast::Neg(Box::new(Ast::Num(-v)))
        } else {
            Ast::Num(v)
        }
    }

    pub fn bin(op: BinOp, a: Ast, b: Ast) -> Ast {
        Ast::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn mul(a: Ast, b: Ast) -> Ast {
        Ast::bin(BinOp::Mul, a, b)
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    LogOfNonPositive,
    DivisionByZero,
    PowOutsideDomain,
    NonFiniteResult,
}

#[derive(Debug, Error, PartialEq)]
#[error("evaluation failed at point ({:?}): {kind:?}", point)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub point: [f64; 2],
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset, message: message.into() })
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

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        if self.eat(b) {
            Ok(())
        } else {
            self.err(self.pos, format!("expected '{}'", b as char))
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Ast::bin(BinOp::Add, lhs, self.term()?);
            } else if self.eat(b'-') {
                lhs = Ast::bin(BinOp::Sub, lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Ast::bin(BinOp::Mul, lhs, self.factor()?);
            } else if self.eat(b'/') {
                lhs = Ast::bin(BinOp::Div, lhs, self.factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        if self.eat(b'-') {
            Ok(Ast::Neg(Box::new(self.factor()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // Right-associative: the exponent is a full factor.
            Ok(Ast::bin(BinOp::Pow, base, self.factor()?))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => self.err(self.pos, format!("unexpected character '{}'", c as char)),
            None => self.err(self.pos, "unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            if self.pos >= self.src.len() || !self.src[self.pos].is_ascii_digit() {
                return self.err(self.pos, "expected digits after decimal point");
            }
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all; "2e" could start an identifier error later.
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Ast::Num(v)),
            Err(_) => self.err(start, format!("invalid number literal '{text}'")),
        }
    }

    fn ident(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let var = match name {
            "x" => Some(Var::X),
            "x1" => Some(Var::X1),
            "x2" => Some(Var::X2),
            _ => None,
        };
        if let Some(v) = var {
            if v.dim() != self.dim {
                return self.err(
                    start,
                    format!("variable '{name}' is not available in dimension {}", self.dim),
                );
            }
            return Ok(Ast::Var(v));
        }
        if let Some(f) = Func::lookup(name) {
            self.expect(b'(')?;
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            self.expect(b')')?;
            if args.len() != f.arity() {
                return self.err(
                    start,
                    format!("{} takes {} argument(s), got {}", f.name(), f.arity(), args.len()),
                );
            }
            return Ok(Ast::Call(f, args));
        }
        self.err(start, format!("unknown identifier '{name}'"))
    }
}

/// Parse an expression for a domain of the given dimension.
pub fn parse(src: &str, dim: usize) -> Result<Ast, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, dim };
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err(p.pos, "trailing input after expression");
    }
    Ok(ast)
}

/// Fully parenthesized canonical form; `parse(print(a))` reproduces `a`.
pub fn print(ast: &Ast) -> String {
    let mut out = String::new();
    write_ast(ast, &mut out);
    out
}

fn write_ast(ast: &Ast, out: &mut String) {
    match ast {
        Ast::Num(v) => {
            if *v < 0.0 {
                out.push_str(&format!("(-{})", -v));
            } else {
                out.push_str(&format!("{v}"));
            }
        }
        Ast::Var(v) => out.push_str(v.name()),
        Ast::Neg(a) => {
            out.push_str("(-");
            write_ast(a, out);
            out.push(')');
        }
        Ast::Bin(op, a, b) => {
            out.push('(');
            write_ast(a, out);
            out.push(op.symbol());
            write_ast(b, out);
            out.push(')');
        }
        Ast::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_ast(a, out);
            }
            out.push(')');
        }
    }
}

/// Evaluate at a point, reporting the point on any domain error.
pub fn eval(ast: &Ast, point: [f64; 2]) -> Result<f64, EvalError> {
    let v = eval_inner(ast, point)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError { kind: EvalErrorKind::NonFiniteResult, point })
    }
}

fn eval_inner(ast: &Ast, p: [f64; 2]) -> Result<f64, EvalError> {
    let fail = |kind| Err(EvalError { kind, point: p });
    Ok(match ast {
        Ast::Num(v) => *v,
        Ast::Var(v) => p[v.axis()],
        Ast::Neg(a) => -eval_inner(a, p)?,
        Ast::Bin(op, a, b) => {
            let (a, b) = (eval_inner(a, p)?, eval_inner(b, p)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return fail(EvalErrorKind::DivisionByZero);
                    }
                    a / b
                }
                BinOp::Pow => return checked_pow(a, b, p),
            }
        }
        Ast::Call(f, args) => {
            let a = eval_inner(&args[0], p)?;
            match f {
                Func::Abs => a.abs(),
                Func::Ln => {
                    if a <= 0.0 {
                        return fail(EvalErrorKind::LogOfNonPositive);
                    }
                    a.ln()
                }
                Func::Exp => a.exp(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Step => {
                    if a >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Func::Pow => return checked_pow(a, eval_inner(&args[1], p)?, p),
                Func::Min => a.min(eval_inner(&args[1], p)?),
                Func::Max => a.max(eval_inner(&args[1], p)?),
            }
        }
    })
}

fn checked_pow(base: f64, exp: f64, point: [f64; 2]) -> Result<f64, EvalError> {
    if (base == 0.0 && exp < 0.0) || (base < 0.0 && exp.fract() != 0.0) {
        return Err(EvalError { kind: EvalErrorKind::PowOutsideDomain, point });
    }
    Ok(base.powf(exp))
}

/// Sample an expression at every cell center of a grid.
pub fn sample(ast: &Ast, grid: &Arc<Grid>) -> Result<GridFunction, EvalError> {
    let mut values = Vec::with_capacity(grid.n_cells());
    for &c in grid.centers() {
        values.push(eval(ast, c)?);
    }
    Ok(GridFunction::from_values(grid, values))
}

/// Built-in integrand families, lowered to expressions via [`family_to_ast`].
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// `|x - point|^(-beta)` (Euclidean distance in two dimensions).
    Power { beta: f64, point: [f64; 2] },
    /// Indicator of the open box `(lo, hi)` (closed at the lower edges:
    /// `step(0) = 1`). Ties with cell centers never occur on our meshes.
    Indicator { lo: [f64; 2], hi: [f64; 2] },
    /// `sin(k pi x)`, and the product over both axes in two dimensions.
    Oscillatory { k: f64 },
    Constant { c: f64 },
}

/// Lower a family to the expression it abbreviates.
pub fn family_to_ast(spec: &FamilySpec, dim: usize) -> Ast {
    match spec {
        FamilySpec::Power { beta, point } => {
            if dim == 1 {
                let dist = Ast::Call(
                    Func::Abs,
                    vec![Ast::bin(BinOp::Sub, Ast::Var(Var::X), Ast::num(point[0]))],
                );
                Ast::bin(BinOp::Pow, dist, Ast::num(-beta))
            } else {
                let dx = Ast::bin(BinOp::Sub, Ast::Var(Var::X1), Ast::num(point[0]));
                let dy = Ast::bin(BinOp::Sub, Ast::Var(Var::X2), Ast::num(point[1]));
                let sq = Ast::bin(
                    BinOp::Add,
                    Ast::bin(BinOp::Pow, dx, Ast::Num(2.0)),
                    Ast::bin(BinOp::Pow, dy, Ast::Num(2.0)),
                );
                Ast::bin(BinOp::Pow, sq, Ast::num(-beta / 2.0))
            }
        }
        FamilySpec::Indicator { lo, hi } => {
            let axis = |v: Var, a: f64, b: f64| {
                Ast::mul(
                    Ast::Call(Func::Step, vec![Ast::bin(BinOp::Sub, Ast::Var(v), Ast::num(a))]),
                    Ast::Call(Func::Step, vec![Ast::bin(BinOp::Sub, Ast::num(b), Ast::Var(v))]),
                )
            };
            if dim == 1 {
                axis(Var::X, lo[0], hi[0])
            } else {
                Ast::mul(axis(Var::X1, lo[0], hi[0]), axis(Var::X2, lo[1], hi[1]))
            }
        }
        FamilySpec::Oscillatory { k } => {
            let wave = |v: Var| {
                Ast::Call(
                    Func::Sin,
                    vec![Ast::mul(Ast::num(k * std::f64::consts::PI), Ast::Var(v))],
                )
            };
            if dim == 1 {
                wave(Var::X)
            } else {
                Ast::mul(wave(Var::X1), wave(Var::X2))
            }
        }
        FamilySpec::Constant { c } => Ast::num(*c),
    }
}
