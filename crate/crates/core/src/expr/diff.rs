use super::{add, call, div, mul, neg, pow, sub, Expr, Func};

/// Symbolic partial derivative of `e` with respect to `var`.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var(v) => Expr::Const(if &**v == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(differentiate(a, var)),
        Expr::Add(a, b) => add(differentiate(a, var), differentiate(b, var)),
        Expr::Sub(a, b) => sub(differentiate(a, var), differentiate(b, var)),
        Expr::Mul(a, b) => add(
            mul(differentiate(a, var), (**b).clone()),
            mul((**a).clone(), differentiate(b, var)),
        ),
        Expr::Div(a, b) => {
            let da = differentiate(a, var);
            let db = differentiate(b, var);
            if db.is_zero() {
                div(da, (**b).clone())
            } else {
                div(
                    sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), Expr::Const(2.0)),
                )
            }
        }
        Expr::Pow(base, exponent) => {
            let dbase = differentiate(base, var);
            let dexp = differentiate(exponent, var);
            if dexp.is_zero() {
                // d(u^c) = c u^(c-1) u'
                let lowered = pow(
                    (**base).clone(),
                    sub((**exponent).clone(), Expr::Const(1.0)),
                );
                mul(mul((**exponent).clone(), lowered), dbase)
            } else {
                // d(u^v) = u^v (v' log u + v u'/u)
                let log_term = mul(dexp, call(Func::Log, (**base).clone()));
                let ratio_term = div(mul((**exponent).clone(), dbase), (**base).clone());
                mul(e.clone(), add(log_term, ratio_term))
            }
        }
        Expr::Call(func, arg) => {
            let darg = differentiate(arg, var);
            if darg.is_zero() {
                return Expr::Const(0.0);
            }
            let a = (**arg).clone();
            let outer = match func {
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Exp => call(Func::Exp, a),
                Func::Log => return div(darg, a),
                Func::Sqrt => {
                    return div(darg, mul(Expr::Const(2.0), call(Func::Sqrt, a)));
                }
                Func::Tanh => sub(
                    Expr::Const(1.0),
                    pow(call(Func::Tanh, a), Expr::Const(2.0)),
                ),
            };
            mul(outer, darg)
        }
    }
}
