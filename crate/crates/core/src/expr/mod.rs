//! Symbolic expressions over the coordinates `x`, `t` and named constants.
//!
//! Expressions are small immutable trees. They are parsed from the infix
//! grammar documented in the repository README, differentiated exactly, brought
//! to a canonical form by [`Expr::simplify`] and evaluated pointwise in
//! IEEE double precision.

mod calculus;
mod parse;
mod render;
mod simplify;
mod zero;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use zero::{ProofMode, ZeroTest, ZERO_SAMPLE_COUNT, ZERO_SAMPLE_SEED, ZERO_TOLERANCE};

/// Name of the spatial coordinate.
pub const X: &str = "x";
/// Name of the time coordinate.
pub const T: &str = "t";

/// A coordinate an expression can be differentiated with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    T,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => X,
            Var::T => T,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
        }
    }
}

/// Expression tree.
///
/// Subtraction is `Add` with a `Neg` term and division is `Mul` with a
/// `Pow(_, -1)` factor, so the node set stays small. Structural equality
/// compares constants bitwise (`0.0 != -0.0`).
#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    Sym(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Values for named constants (and optionally `x`/`t`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bindings(BTreeMap<String, f64>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.0.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries of `other` override entries of `self`.
    pub fn merged(&self, other: &Bindings) -> Bindings {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.insert(k, v);
        }
        out
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Bindings(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

struct Env<'a> {
    x: Option<f64>,
    t: Option<f64>,
    constants: &'a Bindings,
}

impl Env<'_> {
    fn lookup(&self, name: &str) -> Result<f64> {
        let coord = match name {
            X => self.x,
            T => self.t,
            _ => None,
        };
        coord
            .or_else(|| self.constants.get(name))
            .ok_or_else(|| Error::UnboundSymbol(name.to_string()))
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr> {
        parse::parse(source)
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn sym(name: impl Into<String>) -> Expr {
        Expr::Sym(name.into())
    }

    pub fn var(v: Var) -> Expr {
        Expr::Sym(v.name().to_string())
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn add(terms: impl IntoIterator<Item = Expr>) -> Expr {
        Expr::Add(terms.into_iter().collect())
    }

    pub fn mul(factors: impl IntoIterator<Item = Expr>) -> Expr {
        Expr::Mul(factors.into_iter().collect())
    }

    pub fn pow(base: Expr, exponent: i32) -> Expr {
        Expr::Pow(Box::new(base), exponent)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Box::new(arg))
    }

    /// `a - b`, unsimplified.
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Add(vec![a, Expr::neg(b)])
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Sym(s) => {
                out.insert(s.clone());
            }
            Expr::Add(v) | Expr::Mul(v) => v.iter().for_each(|e| e.collect_symbols(out)),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Call(_, b) => b.collect_symbols(out),
        }
    }

    /// Named constants: free symbols other than `x` and `t`.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut s = self.free_symbols();
        s.remove(X);
        s.remove(T);
        s
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Sym(s) => s == name,
            Expr::Add(v) | Expr::Mul(v) => v.iter().any(|e| e.depends_on(name)),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Call(_, b) => b.depends_on(name),
        }
    }

    /// Replace every occurrence of symbol `name` by `with`. Not simplified.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Expr::Sym(s) if s == name => with.clone(),
            Expr::Const(_) | Expr::Sym(_) => self.clone(),
            Expr::Add(v) => Expr::Add(v.iter().map(|e| e.substitute(name, with)).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(|e| e.substitute(name, with)).collect()),
            Expr::Pow(b, n) => Expr::pow(b.substitute(name, with), *n),
            Expr::Neg(b) => Expr::neg(b.substitute(name, with)),
            Expr::Call(f, b) => Expr::call(*f, b.substitute(name, with)),
        }
    }

    /// Evaluate with every free symbol (including `x` and `t`) taken from
    /// `bindings`.
    pub fn evaluate(&self, bindings: &Bindings) -> Result<f64> {
        self.eval(&Env {
            x: None,
            t: None,
            constants: bindings,
        })
    }

    /// Evaluate at a point `(x, t)`; named constants come from `constants`.
    pub fn evaluate_at(&self, x: f64, t: f64, constants: &Bindings) -> Result<f64> {
        self.eval(&Env {
            x: Some(x),
            t: Some(t),
            constants,
        })
    }

    /// One value per node of `xs` at time `t`.
    pub fn evaluate_on_nodes(&self, xs: &[f64], t: f64, constants: &Bindings) -> Result<Vec<f64>> {
        xs.iter()
            .map(|&x| self.evaluate_at(x, t, constants))
            .collect()
    }

    fn eval(&self, env: &Env<'_>) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Sym(s) => env.lookup(s)?,
            Expr::Add(v) => {
                let mut acc = 0.0;
                for e in v {
                    acc += e.eval(env)?;
                }
                acc
            }
            Expr::Mul(v) => {
                let mut acc = 1.0;
                for e in v {
                    acc *= e.eval(env)?;
                }
                acc
            }
            Expr::Pow(b, n) => b.eval(env)?.powi(*n),
            Expr::Neg(b) => -b.eval(env)?,
            Expr::Call(f, b) => f.apply(b.eval(env)?),
        })
    }

    /// Canonical form: like terms collected, products distributed over sums,
    /// small positive powers of sums expanded, constant subtrees folded.
    /// Idempotent.
    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// Exact partial derivative, simplified.
    pub fn differentiate(&self, var: Var) -> Expr {
        calculus::derivative(self, var.name()).simplify()
    }

    /// An antiderivative in `t` (zero at `t = 0`), for expressions that are
    /// polynomial in `t` with `t`-free coefficients.
    pub fn antiderivative_t(&self) -> Result<Expr> {
        calculus::antiderivative_t(self)
    }

    /// `∫_{from}^{t} self dt'`, simplified.
    pub fn integrate_t_from(&self, from: f64) -> Result<Expr> {
        let big = self.antiderivative_t()?;
        let at_from = big.substitute(T, &Expr::Const(from));
        Ok(Expr::sub(big, at_from).simplify())
    }

    /// Decide whether the expression vanishes identically. See [`ZeroTest`].
    pub fn is_identically_zero(&self, constants: &Bindings) -> Result<ZeroTest> {
        zero::is_identically_zero(self, constants)
    }

    fn rank(&self) -> u8 {
        match self {
            Expr::Const(_) => 0,
            Expr::Sym(_) => 1,
            Expr::Call(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Mul(_) => 4,
            Expr::Add(_) => 5,
            Expr::Neg(_) => 6,
        }
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => a.total_cmp(b),
            (Expr::Sym(a), Expr::Sym(b)) => a.cmp(b),
            (Expr::Call(fa, a), Expr::Call(fb, b)) => fa.cmp(fb).then_with(|| a.cmp(b)),
            (Expr::Pow(a, na), Expr::Pow(b, nb)) => a.cmp(b).then(na.cmp(nb)),
            (Expr::Mul(a), Expr::Mul(b)) | (Expr::Add(a), Expr::Add(b)) => a.cmp(b),
            (Expr::Neg(a), Expr::Neg(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render::render(self))
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn evaluate_substitutes_bindings() {
        let b = Bindings::new().with("x", 3.0);
        assert_eq!(p("x^2").evaluate(&b).unwrap(), 9.0);
        let b = Bindings::new().with("k", 2.0).with("t", 1.5);
        assert_eq!(p("k*t^2").evaluate(&b).unwrap(), 4.5);
    }

    #[test]
    fn unbound_symbol_is_an_error() {
        let b = Bindings::new().with("t", 1.0);
        match p("k*t^2").evaluate(&b) {
            Err(Error::UnboundSymbol(name)) => assert_eq!(name, "k"),
            other => panic!("expected UnboundSymbol, got {other:?}"),
        }
    }

    #[test]
    fn evaluate_on_nodes_binds_x_per_node() {
        let v = p("x^2")
            .evaluate_on_nodes(&[-1.0, 0.0, 1.0], 0.0, &Bindings::new())
            .unwrap();
        assert_eq!(v, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn constants_excludes_coordinates() {
        let e = p("0.5*m*w^2*x^2 + k*t");
        let c: Vec<_> = e.constants().into_iter().collect();
        assert_eq!(c, vec!["k", "m", "w"]);
    }

    #[test]
    fn definite_time_integral() {
        let e = p("m*w^2*x");
        let a = e.integrate_t_from(0.0).unwrap();
        assert_eq!(a, p("m*w^2*x*t").simplify());
        let shifted = p("2*t").integrate_t_from(1.0).unwrap();
        assert_eq!(shifted, p("t^2 - 1").simplify());
    }
}
