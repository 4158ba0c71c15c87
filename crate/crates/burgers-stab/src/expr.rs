//! Scalar-field expressions in the variables `x1`, `x2`, `t`.
//!
//! Steady states, initial data, exact solutions and manufactured forcings
//! are all given as closed-form expressions. This module parses them,
//! evaluates them, and produces exact symbolic partial derivatives; the
//! derivatives feed the assembly of the convection/reaction matrices and
//! the manufactured-forcing construction, so no numerical differentiation
//! happens anywhere in the pipeline.
//!
//! Grammar (standard precedence, `^` binds tightest, then unary minus,
//! then `*` `/`, then `+` `-`; left associative; parentheses honored):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' integer)?
//! atom   := number | 'pi' | 'x1' | 'x2' | 't'
//!         | ('sin'|'cos'|'exp') '(' expr ')' | '(' expr ')'
//! ```
//!
//! Only integer exponents are supported; the fields in the built-in corpus
//! are polynomial/trigonometric and never need more.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Independent variable of a scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X1,
    X2,
    T,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X1 => write!(f, "x1"),
            Var::X2 => write!(f, "x2"),
            Var::T => write!(f, "t"),
        }
    }
}

/// Expression tree over constants, `pi`, variables, arithmetic, integer
/// powers and the functions `sin`, `cos`, `exp`.
#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    Pi,
    Var(Var),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    PowInt(Arc<Expr>, i32),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Smart constructor with constant folding; keeps derivative trees from
    /// exploding with `0*...` and `...+0` debris.
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            (_, Some(y)) if y == 0.0 => a,
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            _ => Expr::Sub(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            (Some(x), _) if x == 0.0 => Expr::Const(0.0),
            (_, Some(y)) if y == 0.0 => Expr::Const(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Mul(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), _) if x == 0.0 => Expr::Const(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Div(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a.as_const() {
            Some(x) => Expr::Const(-x),
            None => Expr::Neg(Arc::new(a)),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match n {
            0 => Expr::Const(1.0),
            1 => a,
            _ => match a.as_const() {
                Some(x) => Expr::Const(x.powi(n)),
                None => Expr::PowInt(Arc::new(a), n),
            },
        }
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::Sin(Arc::new(a))
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::Cos(Arc::new(a))
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Arc::new(a))
    }

    /// IEEE double evaluation at `(x1, x2, t)`.
    pub fn eval(&self, x1: f64, x2: f64, t: f64) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(Var::X1) => x1,
            Expr::Var(Var::X2) => x2,
            Expr::Var(Var::T) => t,
            Expr::Neg(a) => -a.eval(x1, x2, t)?,
            Expr::Add(a, b) => a.eval(x1, x2, t)? + b.eval(x1, x2, t)?,
            Expr::Sub(a, b) => a.eval(x1, x2, t)? - b.eval(x1, x2, t)?,
            Expr::Mul(a, b) => a.eval(x1, x2, t)? * b.eval(x1, x2, t)?,
            Expr::Div(a, b) => {
                let d = b.eval(x1, x2, t)?;
                if d == 0.0 {
                    return Err(Error::Numerical(format!(
                        "division by zero evaluating expression at ({x1}, {x2}, t={t})"
                    )));
                }
                a.eval(x1, x2, t)? / d
            }
            Expr::PowInt(a, n) => a.eval(x1, x2, t)?.powi(*n),
            Expr::Sin(a) => a.eval(x1, x2, t)?.sin(),
            Expr::Cos(a) => a.eval(x1, x2, t)?.cos(),
            Expr::Exp(a) => a.eval(x1, x2, t)?.exp(),
        })
    }

    /// Exact symbolic partial derivative with respect to `var`.
    pub fn diff(&self, var: Var) -> Expr {
        match self {
            Expr::Const(_) | Expr::Pi => Expr::Const(0.0),
            Expr::Var(v) => {
                if *v == var {
                    Expr::Const(1.0)
                } else {
                    Expr::Const(0.0)
                }
            }
            Expr::Neg(a) => Expr::neg(a.diff(var)),
            Expr::Add(a, b) => Expr::add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => Expr::sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(var), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => {
                // (a/b)' = (a'b - ab') / b^2
                let num = Expr::sub(
                    Expr::mul(a.diff(var), (**b).clone()),
                    Expr::mul((**a).clone(), b.diff(var)),
                );
                Expr::div(num, Expr::pow((**b).clone(), 2))
            }
            Expr::PowInt(a, n) => Expr::mul(
                Expr::mul(Expr::Const(f64::from(*n)), Expr::pow((**a).clone(), n - 1)),
                a.diff(var),
            ),
            Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.diff(var)),
            Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), a.diff(var))),
            Expr::Exp(a) => Expr::mul(Expr::exp((**a).clone()), a.diff(var)),
        }
    }

    /// Spatial gradient `(d/dx1, d/dx2)`.
    pub fn gradient(&self) -> [Expr; 2] {
        [self.diff(Var::X1), self.diff(Var::X2)]
    }

    /// Laplacian in the space variables.
    pub fn laplacian(&self) -> Expr {
        Expr::add(
            self.diff(Var::X1).diff(Var::X1),
            self.diff(Var::X2).diff(Var::X2),
        )
    }

    /// True if the tree contains `sin`, `cos` or `exp`; used to pick the
    /// quadrature order for assembly.
    pub fn has_transcendental(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Pi | Expr::Var(_) => false,
            Expr::Neg(a) | Expr::PowInt(a, _) => a.has_transcendental(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_transcendental() || b.has_transcendental()
            }
            Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) => true,
        }
    }

    /// True if the tree references the time variable.
    pub fn depends_on_time(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Pi => false,
            Expr::Var(v) => *v == Var::T,
            Expr::Neg(a) | Expr::PowInt(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
                a.depends_on_time()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on_time() || b.depends_on_time()
            }
        }
    }
}

/// Parse an expression from text. Errors carry the byte offset of the
/// offending token.
pub fn parse(text: &str) -> Result<Expr> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.parse_expr()?;
    if p.pos != p.tokens.len() {
        let (offset, tok) = (p.tokens[p.pos].offset, p.tokens[p.pos].kind.describe());
        return Err(Error::Config(format!(
            "syntax error at byte {offset}: unexpected {tok}"
        )));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Number(v) => format!("number {v}"),
            TokKind::Ident(s) => format!("identifier '{s}'"),
            TokKind::Plus => "'+'".into(),
            TokKind::Minus => "'-'".into(),
            TokKind::Star => "'*'".into(),
            TokKind::Slash => "'/'".into(),
            TokKind::Caret => "'^'".into(),
            TokKind::LParen => "'('".into(),
            TokKind::RParen => "')'".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    if !text.is_ascii() {
        return Err(Error::Config("expression must be ASCII".into()));
    }
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let kind = match c {
                    '+' => TokKind::Plus,
                    '-' => TokKind::Minus,
                    '*' => TokKind::Star,
                    '/' => TokKind::Slash,
                    '^' => TokKind::Caret,
                    '(' => TokKind::LParen,
                    _ => TokKind::RParen,
                };
                tokens.push(Token { kind, offset: i });
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // scientific-notation tail: e or E, optional sign, digits
                if i < bytes.len()
                    && matches!(bytes[i] as char, 'e' | 'E')
                    && i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_digit()
                        || (matches!(bytes[i + 1] as char, '+' | '-')
                            && i + 2 < bytes.len()
                            && bytes[i + 2].is_ascii_digit()))
                {
                    i += 2;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let s = &text[start..i];
                let value: f64 = s.parse().map_err(|_| {
                    Error::Config(format!("syntax error at byte {start}: bad number '{s}'"))
                })?;
                tokens.push(Token {
                    kind: TokKind::Number(value),
                    offset: start,
                });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] as char == '_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokKind::Ident(text[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                return Err(Error::Config(format!(
                    "syntax error at byte {i}: unexpected character '{c}'"
                )))
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&TokKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: &TokKind, what: &str) -> Result<()> {
        match self.bump() {
            Some(t) if t.kind == *kind => Ok(()),
            Some(t) => Err(Error::Config(format!(
                "syntax error at byte {}: expected {what}, found {}",
                t.offset,
                t.kind.describe()
            ))),
            None => Err(Error::Config(format!(
                "syntax error at end of input: expected {what}"
            ))),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        while let Some(op) = self.peek() {
            match op {
                TokKind::Plus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Add(Arc::new(lhs), Arc::new(rhs));
                }
                TokKind::Minus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Sub(Arc::new(lhs), Arc::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_factor()?;
        while let Some(op) = self.peek() {
            match op {
                TokKind::Star => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Mul(Arc::new(lhs), Arc::new(rhs));
                }
                TokKind::Slash => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Div(Arc::new(lhs), Arc::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<Expr> {
        if let Some(TokKind::Minus) = self.peek() {
            self.bump();
            let inner = self.parse_factor()?;
            return Ok(Expr::Neg(Arc::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr> {
        let base = self.parse_atom()?;
        if let Some(TokKind::Caret) = self.peek() {
            self.bump();
            let exponent = self.parse_int_exponent()?;
            return Ok(Expr::PowInt(Arc::new(base), exponent));
        }
        Ok(base)
    }

    fn parse_int_exponent(&mut self) -> Result<i32> {
        let mut sign = 1i32;
        if let Some(TokKind::Minus) = self.peek() {
            self.bump();
            sign = -1;
        }
        match self.bump() {
            Some(Token {
                kind: TokKind::Number(v),
                offset,
            }) => {
                if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
                    Err(Error::Config(format!(
                        "syntax error at byte {offset}: exponent must be an integer, got {v}"
                    )))
                } else {
                    Ok(sign * v as i32)
                }
            }
            Some(t) => Err(Error::Config(format!(
                "syntax error at byte {}: expected integer exponent, found {}",
                t.offset,
                t.kind.describe()
            ))),
            None => Err(Error::Config(
                "syntax error at end of input: expected integer exponent".into(),
            )),
        }
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Token {
                kind: TokKind::Number(v),
                ..
            }) => Ok(Expr::Const(v)),
            Some(Token {
                kind: TokKind::Ident(name),
                offset,
            }) => match name.as_str() {
                "pi" => Ok(Expr::Pi),
                "x1" => Ok(Expr::Var(Var::X1)),
                "x2" => Ok(Expr::Var(Var::X2)),
                "t" => Ok(Expr::Var(Var::T)),
                "sin" | "cos" | "exp" => {
                    self.expect(&TokKind::LParen, "'(' after function name")?;
                    let arg = self.parse_expr()?;
                    self.expect(&TokKind::RParen, "')'")?;
                    Ok(match name.as_str() {
                        "sin" => Expr::sin(arg),
                        "cos" => Expr::cos(arg),
                        _ => Expr::exp(arg),
                    })
                }
                _ => Err(Error::Config(format!(
                    "unknown identifier '{name}' at byte {offset}"
                ))),
            },
            Some(Token {
                kind: TokKind::LParen,
                ..
            }) => {
                let e = self.parse_expr()?;
                self.expect(&TokKind::RParen, "')'")?;
                Ok(e)
            }
            Some(t) => Err(Error::Config(format!(
                "syntax error at byte {}: unexpected {}",
                t.offset,
                t.kind.describe()
            ))),
            None => Err(Error::Config(
                "syntax error: empty expression".into(),
            )),
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized rendering; `parse(print(e))` evaluates
    /// identically to `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Pi => write!(f, "pi"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::PowInt(a, n) => {
                if *n < 0 {
                    write!(f, "({a}^-{})", -i64::from(*n))
                } else {
                    write!(f, "({a}^{n})")
                }
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}
