//! Small arithmetic expression language in `t` and `eps`.
//!
//! Grammar (lowest to highest precedence, binary operators left-associative):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INTEGER)*
//! primary := NUMBER | 't' | 'eps' | 'pi' | 'i' | FUNC '(' expr ')' | '(' expr ')'
//! FUNC    := 'sin' | 'cos' | 'exp'
//! ```
//!
//! Exponents are restricted to non-negative integer literals so that every
//! expression has an exact symbolic derivative. `i` is the imaginary unit.

use std::fmt;

use thiserror::Error;

use crate::Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ExprError {
    pub kind: ExprErrorKind,
    /// Byte offset into the source text.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token '{0}'")]
    UnexpectedToken(String),
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("exponent must be a non-negative integer literal")]
    BadExponent,
    #[error("malformed number '{0}'")]
    BadNumber(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    Eps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // scientific notation: e/E followed by digits, optionally signed
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
            let v: f64 = text.parse().map_err(|_| ExprError {
                kind: ExprErrorKind::BadNumber(text.to_string()),
                offset: start,
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(ExprError { kind: ExprErrorKind::UnexpectedChar(ch), offset: i });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn err(&self, kind: ExprErrorKind) -> ExprError {
        ExprError { kind, offset: self.offset() }
    }

    fn unexpected(&self) -> ExprError {
        match self.peek() {
            None => self.err(ExprErrorKind::UnexpectedEnd),
            Some(Tok::Num(v)) => self.err(ExprErrorKind::UnexpectedToken(v.to_string())),
            Some(Tok::Ident(s)) => self.err(ExprErrorKind::UnexpectedToken(s.clone())),
            Some(Tok::Op(c)) => self.err(ExprErrorKind::UnexpectedToken(c.to_string())),
        }
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let mut base = self.primary()?;
        while self.eat('^') {
            match self.peek() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 0.0 && *v <= u32::MAX as f64 => {
                    base = Expr::Pow(Box::new(base), *v as u32);
                    self.pos += 1;
                }
                None => return Err(self.err(ExprErrorKind::UnexpectedEnd)),
                _ => return Err(self.err(ExprErrorKind::BadExponent)),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(Complex64::new(v, 0.0)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.unexpected());
                }
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "t" => return Ok(Expr::Var(Var::T)),
                    "eps" => return Ok(Expr::Var(Var::Eps)),
                    "pi" => return Ok(Expr::Num(Complex64::new(std::f64::consts::PI, 0.0))),
                    "i" => return Ok(Expr::Num(Complex64::new(0.0, 1.0))),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => {
                        return Err(ExprError { kind: ExprErrorKind::UnknownIdentifier(name), offset });
                    }
                };
                if !self.eat('(') {
                    return Err(self.unexpected());
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.unexpected());
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses `source` into an expression tree.
pub fn parse_expression(source: &str) -> Result<Expr, ExprError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0, end: source.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

fn num(z: f64) -> Expr {
    Expr::Num(Complex64::new(z, 0.0))
}

fn as_num(e: &Expr) -> Option<Complex64> {
    match e {
        Expr::Num(z) => Some(*z),
        _ => None,
    }
}

fn is_zero(e: &Expr) -> bool {
    as_num(e) == Some(Complex64::new(0.0, 0.0))
}

fn is_one(e: &Expr) -> bool {
    as_num(e) == Some(Complex64::new(1.0, 0.0))
}

// Smart constructors folding constants and trivial identities.

fn add(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        _ if is_zero(&a) => b,
        _ if is_zero(&b) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        _ if is_zero(&b) => a,
        _ if is_zero(&a) => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        _ if is_zero(&a) || is_zero(&b) => num(0.0),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return num(0.0);
    }
    if is_one(&b) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(z) => Expr::Num(-z),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn pow(a: Expr, n: u32) -> Expr {
    match n {
        0 => num(1.0),
        1 => a,
        _ => match as_num(&a) {
            Some(z) => Expr::Num(z.powu(n)),
            None => Expr::Pow(Box::new(a), n),
        },
    }
}

impl Expr {
    pub fn constant(z: Complex64) -> Self {
        Expr::Num(z)
    }

    /// Evaluates at the given variable values.
    pub fn eval(&self, t: f64, eps: f64) -> Complex64 {
        match self {
            Expr::Num(z) => *z,
            Expr::Var(Var::T) => Complex64::new(t, 0.0),
            Expr::Var(Var::Eps) => Complex64::new(eps, 0.0),
            Expr::Neg(a) => -a.eval(t, eps),
            Expr::Add(a, b) => a.eval(t, eps) + b.eval(t, eps),
            Expr::Sub(a, b) => a.eval(t, eps) - b.eval(t, eps),
            Expr::Mul(a, b) => a.eval(t, eps) * b.eval(t, eps),
            Expr::Div(a, b) => a.eval(t, eps) / b.eval(t, eps),
            Expr::Pow(a, n) => a.eval(t, eps).powu(*n),
            Expr::Call(f, a) => {
                let x = a.eval(t, eps);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                }
            }
        }
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.uses(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.uses(var) || b.uses(var),
        }
    }

    /// Exact derivative with respect to `var`, lightly simplified.
    pub fn derivative(&self, var: Var) -> Expr {
        if !self.uses(var) {
            return num(0.0);
        }
        match self {
            Expr::Num(_) => num(0.0),
            Expr::Var(v) => num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(var)),
            Expr::Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Expr::Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Expr::Mul(a, b) => add(
                mul(a.derivative(var), (**b).clone()),
                mul((**a).clone(), b.derivative(var)),
            ),
            Expr::Div(a, b) => {
                let da = a.derivative(var);
                let db = b.derivative(var);
                if is_zero(&db) {
                    div(da, (**b).clone())
                } else {
                    div(
                        sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                        pow((**b).clone(), 2),
                    )
                }
            }
            Expr::Pow(a, n) => match n {
                0 => num(0.0),
                _ => mul(mul(num(*n as f64), pow((**a).clone(), n - 1)), a.derivative(var)),
            },
            Expr::Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::Call(Func::Cos, Box::new(inner)),
                    Func::Cos => neg(Expr::Call(Func::Sin, Box::new(inner))),
                    Func::Exp => Expr::Call(Func::Exp, Box::new(inner)),
                };
                mul(outer, a.derivative(var))
            }
        }
    }

    /// Substitutes a value for `eps`, folding constants where possible.
    pub fn bind_eps(&self, eps: f64) -> Expr {
        if !self.uses(Var::Eps) {
            return self.clone();
        }
        if !self.uses(Var::T) {
            return Expr::Num(self.eval(0.0, eps));
        }
        match self {
            Expr::Num(_) | Expr::Var(Var::T) => self.clone(),
            Expr::Var(Var::Eps) => num(eps),
            Expr::Neg(a) => neg(a.bind_eps(eps)),
            Expr::Add(a, b) => add(a.bind_eps(eps), b.bind_eps(eps)),
            Expr::Sub(a, b) => sub(a.bind_eps(eps), b.bind_eps(eps)),
            Expr::Mul(a, b) => mul(a.bind_eps(eps), b.bind_eps(eps)),
            Expr::Div(a, b) => div(a.bind_eps(eps), b.bind_eps(eps)),
            Expr::Pow(a, n) => pow(a.bind_eps(eps), *n),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.bind_eps(eps))),
        }
    }
}

fn fmt_num(z: &Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if z.im == 0.0 {
        if z.re < 0.0 {
            write!(f, "({:?})", z.re)
        } else {
            write!(f, "{:?}", z.re)
        }
    } else {
        write!(f, "({:?}+{:?}*i)", z.re, z.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(z) => fmt_num(z, f),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Var(Var::Eps) => f.write_str("eps"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}
