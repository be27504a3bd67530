//! Expressions bundled with their cached symbolic partial derivatives.

use std::borrow::Cow;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::expr::{differentiate, parse, EvalError, Expr, ParseError, Slots};

/// Highest total derivative order kept in the cache.
pub const CACHED_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothFnError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("expression mentions `{0}`, which is not a declared variable")]
    Undeclared(String),
    #[error("expected one or two distinct variables, got {0:?}")]
    Arity(Vec<String>),
}

/// A smooth scalar function of one or two variables.
///
/// Partial derivatives up to total order three are computed lazily and kept;
/// higher orders are rebuilt on every request.
#[derive(Clone)]
pub struct SmoothFn {
    vars: Vec<Arc<str>>,
    base: Expr,
    cache: [OnceLock<Expr>; 9],
}

// (i, j) with 1 <= i + j <= 3, grouped by order.
fn slot(di: usize, dj: usize) -> Option<usize> {
    match (di, dj) {
        (1, 0) => Some(0),
        (0, 1) => Some(1),
        (2, 0) => Some(2),
        (1, 1) => Some(3),
        (0, 2) => Some(4),
        (3, 0) => Some(5),
        (2, 1) => Some(6),
        (1, 2) => Some(7),
        (0, 3) => Some(8),
        _ => None,
    }
}

impl SmoothFn {
    pub fn new<S: AsRef<str>>(base: Expr, vars: &[S]) -> Result<SmoothFn, SmoothFnError> {
        let names: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        if names.is_empty() || names.len() > 2 || (names.len() == 2 && names[0] == names[1]) {
            return Err(SmoothFnError::Arity(names));
        }
        // Reuse the tree's own name handles so lookups hit the pointer fast path.
        let mentioned = base.variables();
        if let Some(bad) = mentioned.iter().find(|m| !names.iter().any(|n| n == &***m)) {
            return Err(SmoothFnError::Undeclared(bad.to_string()));
        }
        let vars = names
            .iter()
            .map(|n| {
                mentioned
                    .iter()
                    .find(|m| &***m == n)
                    .cloned()
                    .unwrap_or_else(|| Arc::from(n.as_str()))
            })
            .collect();
        Ok(SmoothFn {
            vars,
            base,
            cache: Default::default(),
        })
    }

    pub fn parse<S: AsRef<str>>(source: &str, vars: &[S]) -> Result<SmoothFn, SmoothFnError> {
        let e = parse(source, vars)?;
        SmoothFn::new(e, vars)
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|v| &**v)
    }

    pub fn expr(&self) -> &Expr {
        &self.base
    }

    /// Symbolic partial: `di` times in the first variable, `dj` times in the second.
    pub fn partial(&self, di: usize, dj: usize) -> Cow<'_, Expr> {
        assert!(
            dj == 0 || self.arity() == 2,
            "second-variable derivative of a univariate function"
        );
        if di + dj == 0 {
            return Cow::Borrowed(&self.base);
        }
        match slot(di, dj) {
            Some(k) => Cow::Borrowed(self.cache[k].get_or_init(|| self.fresh_step(di, dj))),
            None => Cow::Owned(self.fresh_partial(di, dj)),
        }
    }

    fn fresh_step(&self, di: usize, dj: usize) -> Expr {
        if di > 0 {
            differentiate(&self.partial(di - 1, dj), &self.vars[0])
        } else {
            differentiate(&self.partial(0, dj - 1), &self.vars[1])
        }
    }

    /// Partial derivative rebuilt from the base expression, bypassing the cache.
    pub fn fresh_partial(&self, di: usize, dj: usize) -> Expr {
        let mut e = self.base.clone();
        for _ in 0..di {
            e = differentiate(&e, &self.vars[0]);
        }
        for _ in 0..dj {
            e = differentiate(&e, &self.vars[1]);
        }
        e
    }

    /// The partial derivative as a function over the same variables.
    pub fn derivative(&self, di: usize, dj: usize) -> SmoothFn {
        SmoothFn {
            vars: self.vars.clone(),
            base: self.partial(di, dj).into_owned(),
            cache: Default::default(),
        }
    }

    /// Evaluates at positional arguments in declaration order.
    pub fn eval(&self, args: &[f64]) -> Result<f64, EvalError> {
        debug_assert_eq!(args.len(), self.vars.len());
        self.base.eval(&Slots {
            names: &self.vars,
            values: args,
        })
    }

    pub fn eval_partial(&self, di: usize, dj: usize, args: &[f64]) -> Result<f64, EvalError> {
        self.partial(di, dj).eval(&Slots {
            names: &self.vars,
            values: args,
        })
    }
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothFn({}; {})", self.vars.join(", "), self.base)
    }
}

impl fmt::Display for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)
    }
}
