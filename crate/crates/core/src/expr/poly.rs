use super::{add, div, mul, pow, Expr};

/// Dense univariate polynomial, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    fn constant(c: f64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    fn add(&self, other: &Self, sign: f64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0)
                    + sign * other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Polynomial { coeffs }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs }
    }

    fn scale(&self, s: f64) -> Self {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Reads `e` as a polynomial in `var`, or `None` if it is not one.
    pub fn from_expr(e: &Expr, var: &str) -> Option<Polynomial> {
        const MAX_DEGREE: usize = 64;
        let p = match e {
            Expr::Const(c) => Polynomial::constant(*c),
            Expr::Var(v) if &**v == var => Polynomial {
                coeffs: vec![0.0, 1.0],
            },
            Expr::Var(_) | Expr::Call(..) => return None,
            Expr::Neg(a) => Polynomial::from_expr(a, var)?.scale(-1.0),
            Expr::Add(a, b) => Polynomial::from_expr(a, var)?.add(&Polynomial::from_expr(b, var)?, 1.0),
            Expr::Sub(a, b) => Polynomial::from_expr(a, var)?.add(&Polynomial::from_expr(b, var)?, -1.0),
            Expr::Mul(a, b) => Polynomial::from_expr(a, var)?.mul(&Polynomial::from_expr(b, var)?),
            Expr::Div(a, b) => {
                let den = Polynomial::from_expr(b, var)?;
                if den.coeffs.iter().skip(1).any(|&c| c != 0.0) || den.coeffs[0] == 0.0 {
                    return None;
                }
                Polynomial::from_expr(a, var)?.scale(1.0 / den.coeffs[0])
            }
            Expr::Pow(a, b) => {
                let k = b.as_const()?;
                if k < 0.0 || k.fract() != 0.0 || k as usize > MAX_DEGREE {
                    return None;
                }
                let base = Polynomial::from_expr(a, var)?;
                let mut acc = Polynomial::constant(1.0);
                for _ in 0..k as usize {
                    acc = acc.mul(&base);
                }
                acc
            }
        };
        if p.coeffs.len() > MAX_DEGREE + 1 {
            return None;
        }
        Some(p)
    }
}

/// Antiderivative in `var` (zero constant of integration) of a polynomial
/// expression. Returns `None` for anything that is not a polynomial in `var`.
pub fn antiderivative(e: &Expr, var: &str) -> Option<Expr> {
    let poly = Polynomial::from_expr(e, var)?;
    let v = e
        .variables()
        .into_iter()
        .find(|n| &**n == var)
        .map(Expr::Var)
        .unwrap_or_else(|| Expr::var(var));
    let mut out = Expr::Const(0.0);
    for (k, &c) in poly.coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let n = (k + 1) as f64;
        let monomial = pow(v.clone(), Expr::Const(n));
        out = add(out, div(mul(Expr::Const(c), monomial), Expr::Const(n)));
    }
    Some(out)
}
