//! Scalar expressions in one or two named variables.
//!
//! Expressions are parsed from a small infix grammar, evaluated against
//! variable bindings and differentiated symbolically. The only rewriting
//! performed is constant folding and elimination of additive/multiplicative
//! identities while building derivatives.

mod diff;
mod parse;
mod poly;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use diff::differentiate;
pub use parse::{parse, ParseError};
pub use poly::{antiderivative, Polynomial};

/// Elementary functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Arc<str>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    NonRealPower,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogNonPositive => "log of a non-positive value",
            DomainKind::SqrtNegative => "sqrt of a negative value",
            DomainKind::NonRealPower => "non-real power",
            DomainKind::NonFinite => "non-finite result",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no binding for variable `{0}`")]
    Unbound(String),
    #[error("{kind} in `{subexpr}`")]
    Domain { kind: DomainKind, subexpr: String },
}

/// Source of variable values during evaluation.
pub trait Bindings {
    fn lookup(&self, name: &Arc<str>) -> Option<f64>;
}

impl Bindings for [(&str, f64)] {
    fn lookup(&self, name: &Arc<str>) -> Option<f64> {
        self.iter().find(|(n, _)| *n == &**name).map(|&(_, v)| v)
    }
}

impl<const N: usize> Bindings for [(&str, f64); N] {
    fn lookup(&self, name: &Arc<str>) -> Option<f64> {
        self.as_slice().lookup(name)
    }
}

impl<S> Bindings for std::collections::HashMap<S, f64>
where
    S: std::borrow::Borrow<str> + std::hash::Hash + Eq,
{
    fn lookup(&self, name: &Arc<str>) -> Option<f64> {
        self.get(&**name).copied()
    }
}

impl<S> Bindings for std::collections::BTreeMap<S, f64>
where
    S: std::borrow::Borrow<str> + Ord,
{
    fn lookup(&self, name: &Arc<str>) -> Option<f64> {
        self.get(&**name).copied()
    }
}

/// Positional bindings over interned names; pointer comparison first.
pub(crate) struct Slots<'a> {
    pub names: &'a [Arc<str>],
    pub values: &'a [f64],
}

impl Bindings for Slots<'_> {
    #[inline]
    fn lookup(&self, name: &Arc<str>) -> Option<f64> {
        for (n, v) in self.names.iter().zip(self.values) {
            if Arc::ptr_eq(n, name) || **n == **name {
                return Some(*v);
            }
        }
        None
    }
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(name: impl Into<Arc<str>>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Whether `name` occurs anywhere in the tree.
    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => &**v == name,
            Expr::Neg(a) | Expr::Call(_, a) => a.mentions(name),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.mentions(name) || b.mentions(name)
            }
        }
    }

    /// Collects distinct variable names in order of first appearance.
    pub fn variables(&self) -> Vec<Arc<str>> {
        fn walk(e: &Expr, out: &mut Vec<Arc<str>>) {
            match e {
                Expr::Const(_) => {}
                Expr::Var(v) => {
                    if !out.iter().any(|o| o == v) {
                        out.push(v.clone());
                    }
                }
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
                Expr::Add(a, b)
                | Expr::Sub(a, b)
                | Expr::Mul(a, b)
                | Expr::Div(a, b)
                | Expr::Pow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    pub fn eval<B: Bindings + ?Sized>(&self, env: &B) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var(name) => env
                .lookup(name)
                .ok_or_else(|| EvalError::Unbound(name.to_string()))?,
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Expr::Div(a, b) => {
                let num = a.eval(env)?;
                let den = b.eval(env)?;
                if den == 0.0 {
                    return Err(self.domain(DomainKind::DivisionByZero));
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval(env)?;
                let exp = b.eval(env)?;
                self.power(base, exp)?
            }
            Expr::Call(func, a) => {
                let x = a.eval(env)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Tanh => x.tanh(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(self.domain(DomainKind::LogNonPositive));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain(DomainKind::SqrtNegative));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.domain(DomainKind::NonFinite))
        }
    }

    fn power(&self, base: f64, exp: f64) -> Result<f64, EvalError> {
        let integral = exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64;
        if base == 0.0 && exp < 0.0 {
            return Err(self.domain(DomainKind::DivisionByZero));
        }
        if integral {
            Ok(base.powi(exp as i32))
        } else if base < 0.0 {
            Err(self.domain(DomainKind::NonRealPower))
        } else {
            Ok(base.powf(exp))
        }
    }

    fn domain(&self, kind: DomainKind) -> EvalError {
        EvalError::Domain {
            kind,
            subexpr: self.to_string(),
        }
    }
}

// Printing precedence: sums < products < unary minus < powers < atoms.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Add(..) | Expr::Sub(..) => PREC_SUM,
            Expr::Mul(..) | Expr::Div(..) => PREC_PRODUCT,
            Expr::Pow(..) => PREC_POWER,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.fmt_bare(f)?;
            write!(f, ")")
        } else {
            self.fmt_bare(f)
        }
    }

    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_at(f, PREC_UNARY)
            }
            Expr::Add(a, b) => {
                a.fmt_at(f, PREC_SUM)?;
                write!(f, " + ")?;
                b.fmt_at(f, PREC_SUM + 1)
            }
            Expr::Sub(a, b) => {
                a.fmt_at(f, PREC_SUM)?;
                write!(f, " - ")?;
                b.fmt_at(f, PREC_SUM + 1)
            }
            Expr::Mul(a, b) => {
                a.fmt_at(f, PREC_PRODUCT)?;
                write!(f, " * ")?;
                b.fmt_at(f, PREC_PRODUCT + 1)
            }
            Expr::Div(a, b) => {
                a.fmt_at(f, PREC_PRODUCT)?;
                write!(f, " / ")?;
                b.fmt_at(f, PREC_PRODUCT + 1)
            }
            Expr::Pow(a, b) => {
                a.fmt_at(f, PREC_ATOM)?;
                write!(f, "^")?;
                b.fmt_at(f, PREC_UNARY)
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_bare(f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_bare(f)
    }
}

// Simplifying constructors used by differentiation and composition.

fn fold(value: f64, otherwise: impl FnOnce() -> Expr) -> Expr {
    if value.is_finite() {
        Expr::Const(value)
    } else {
        otherwise()
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => fold(x + y, || Expr::Add(Box::new(a), Box::new(b))),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => fold(x - y, || Expr::Sub(Box::new(a), Box::new(b))),
        (Some(0.0), _) => neg(b),
        (_, Some(0.0)) => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => fold(x * y, || Expr::Mul(Box::new(a), Box::new(b))),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Const(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => fold(x / y, || Expr::Div(Box::new(a), Box::new(b))),
        (Some(0.0), _) => Expr::Const(0.0),
        (_, Some(1.0)) => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (_, Some(0.0)) => Expr::Const(1.0),
        (_, Some(1.0)) => a,
        (Some(x), Some(y)) => {
            let folded = Expr::Pow(Box::new(Expr::Const(x)), Box::new(Expr::Const(y)));
            match folded.eval(&[] as &[(&str, f64)]) {
                Ok(v) => Expr::Const(v),
                Err(_) => folded,
            }
        }
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

pub fn call(func: Func, a: Expr) -> Expr {
    if let Some(x) = a.as_const() {
        let folded = Expr::Call(func, Box::new(Expr::Const(x)));
        return match folded.eval(&[] as &[(&str, f64)]) {
            Ok(v) => Expr::Const(v),
            Err(_) => folded,
        };
    }
    Expr::Call(func, Box::new(a))
}
