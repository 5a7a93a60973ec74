use super::simplify::to_poly;
use super::{Expr, Func, T};
use crate::error::{Error, Result};

/// Unsimplified partial derivative with respect to the symbol `var`.
pub(super) fn derivative(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Sym(s) => Expr::Const(if s == var { 1.0 } else { 0.0 }),
        Expr::Add(terms) => Expr::Add(terms.iter().map(|t| derivative(t, var)).collect()),
        Expr::Neg(inner) => Expr::neg(derivative(inner, var)),
        Expr::Mul(factors) => Expr::Add(
            (0..factors.len())
                .map(|i| {
                    Expr::Mul(
                        factors
                            .iter()
                            .enumerate()
                            .map(|(j, f)| if i == j { derivative(f, var) } else { f.clone() })
                            .collect(),
                    )
                })
                .collect(),
        ),
        Expr::Pow(base, n) => Expr::Mul(vec![
            Expr::Const(*n as f64),
            Expr::pow((**base).clone(), n - 1),
            derivative(base, var),
        ]),
        Expr::Call(f, arg) => {
            let inner = derivative(arg, var);
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, (**arg).clone()),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, (**arg).clone())),
                Func::Exp => e.clone(),
            };
            Expr::Mul(vec![outer, inner])
        }
    }
}

pub(super) fn antiderivative_t(e: &Expr) -> Result<Expr> {
    let poly = to_poly(e);
    let mut terms = Vec::with_capacity(poly.terms.len());
    for (mono, c) in &poly.terms {
        let mut t_power = 0;
        let mut factors = Vec::with_capacity(mono.len() + 2);
        for (base, exp) in mono {
            if matches!(base, Expr::Sym(s) if s == T) {
                t_power = *exp;
            } else if base.depends_on(T) {
                return Err(Error::NonIntegrable(e.to_string()));
            } else {
                factors.push(Expr::pow(base.clone(), *exp));
            }
        }
        if t_power < 0 {
            return Err(Error::NonIntegrable(e.to_string()));
        }
        let raised = t_power + 1;
        factors.push(Expr::Const(c / raised as f64));
        factors.push(Expr::pow(Expr::sym(T), raised));
        terms.push(Expr::Mul(factors));
    }
    Ok(Expr::Add(terms).simplify())
}
