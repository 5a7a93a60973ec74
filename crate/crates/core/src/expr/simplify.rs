//! Canonical polynomial form.
//!
//! An expression is flattened into a sum of terms `coeff * Π base^exp`,
//! where every base is an atom: a symbol, a function call with a simplified
//! argument, or a sum that could not be expanded (negative or large power).
//! Products distribute over sums, so two polynomials in `x`, `t` and named
//! constants are equal as functions iff their canonical forms are equal.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use super::Expr;

/// Largest positive power of a sum that is expanded.
const MAX_EXPAND: i32 = 12;

pub(super) type Monomial = Vec<(Expr, i32)>;

#[derive(Debug, Clone, Default)]
pub(super) struct Poly {
    pub(super) terms: BTreeMap<Monomial, f64>,
}

impl Poly {
    fn constant(c: f64) -> Poly {
        let mut p = Poly::default();
        if c != 0.0 {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    fn atom(base: Expr, exp: i32) -> Poly {
        let mut p = Poly::default();
        p.terms.insert(vec![(base, exp)], 1.0);
        p
    }

    fn add_term(&mut self, mono: Monomial, c: f64) {
        match self.terms.entry(mono) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == 0.0 {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                if c != 0.0 {
                    slot.insert(c);
                }
            }
        }
    }

    fn add(mut self, other: Poly) -> Poly {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
        self
    }

    fn scale(mut self, s: f64) -> Poly {
        if s == 0.0 {
            return Poly::default();
        }
        for c in self.terms.values_mut() {
            *c *= s;
        }
        self.terms.retain(|_, v| *v != 0.0);
        self
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out = out.add(expand_term(ca * cb, merge(ma, mb)));
            }
        }
        out
    }

    fn powi(&self, n: i32) -> Poly {
        if n == 0 {
            return Poly::constant(1.0);
        }
        if self.terms.len() == 1 {
            let (mono, c) = self.terms.iter().next().unwrap();
            let scaled: Option<Monomial> = mono
                .iter()
                .map(|(b, e)| e.checked_mul(n).map(|e| (b.clone(), e)))
                .collect();
            if let Some(scaled) = scaled {
                return expand_term(c.powi(n), scaled);
            }
        }
        if self.terms.is_empty() {
            return Poly::constant(0f64.powi(n));
        }
        if (1..=MAX_EXPAND).contains(&n) {
            let mut acc = self.clone();
            for _ in 1..n {
                acc = acc.mul(self);
            }
            return acc;
        }
        Poly::atom(self.to_expr(), n)
    }

    pub(super) fn to_expr(&self) -> Expr {
        let mut terms: Vec<(&Monomial, f64)> = self.terms.iter().map(|(m, c)| (m, *c)).collect();
        terms.sort_by(|(ma, _), (mb, _)| {
            let key = |m: &Monomial| (m.is_empty(), -(m.iter().map(|(_, e)| *e as i64).sum::<i64>()));
            key(ma).cmp(&key(mb)).then_with(|| ma.cmp(mb))
        });
        let mut out: Vec<Expr> = terms.into_iter().map(|(m, c)| build_term(m, c)).collect();
        match out.len() {
            0 => Expr::Const(0.0),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }
}

fn merge(a: &Monomial, b: &Monomial) -> Monomial {
    let mut map: BTreeMap<Expr, i32> = BTreeMap::new();
    for (base, e) in a.iter().chain(b.iter()) {
        *map.entry(base.clone()).or_insert(0) += e;
    }
    map.into_iter().filter(|(_, e)| *e != 0).collect()
}

/// A single term, expanding any sum-atoms whose exponent became small and
/// positive after merging.
fn expand_term(c: f64, mono: Monomial) -> Poly {
    if c == 0.0 {
        return Poly::default();
    }
    let (expand, keep): (Vec<_>, Vec<_>) = mono
        .into_iter()
        .partition(|(b, e)| matches!(b, Expr::Add(_)) && (1..=MAX_EXPAND).contains(e));
    let mut p = Poly::default();
    p.terms.insert(keep, c);
    for (base, e) in expand {
        p = p.mul(&to_poly(&base).powi(e));
    }
    p
}

fn build_term(mono: &Monomial, c: f64) -> Expr {
    if mono.is_empty() {
        return Expr::Const(c);
    }
    let factors: Vec<Expr> = mono
        .iter()
        .map(|(b, e)| if *e == 1 { b.clone() } else { Expr::pow(b.clone(), *e) })
        .collect();
    let product = |mut fs: Vec<Expr>| {
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Expr::Mul(fs)
        }
    };
    if c == 1.0 {
        product(factors)
    } else if c == -1.0 {
        Expr::neg(product(factors))
    } else if c < 0.0 {
        let mut fs = vec![Expr::Const(-c)];
        fs.extend(factors);
        Expr::neg(Expr::Mul(fs))
    } else {
        let mut fs = vec![Expr::Const(c)];
        fs.extend(factors);
        Expr::Mul(fs)
    }
}

pub(super) fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Const(c) => Poly::constant(*c),
        Expr::Sym(_) => Poly::atom(e.clone(), 1),
        Expr::Add(terms) => terms
            .iter()
            .fold(Poly::default(), |acc, t| acc.add(to_poly(t))),
        Expr::Mul(factors) => factors
            .iter()
            .fold(Poly::constant(1.0), |acc, f| acc.mul(&to_poly(f))),
        Expr::Neg(inner) => to_poly(inner).scale(-1.0),
        Expr::Pow(base, n) => to_poly(base).powi(*n),
        Expr::Call(f, arg) => {
            let arg = simplify(arg);
            match arg {
                Expr::Const(c) => Poly::constant(f.apply(c)),
                arg => Poly::atom(Expr::call(*f, arg), 1),
            }
        }
    }
}

pub(super) fn simplify(e: &Expr) -> Expr {
    to_poly(e).to_expr()
}

/// True when every atom of the canonical form is a symbol raised to a
/// non-negative power.
pub(super) fn is_polynomial(p: &Poly) -> bool {
    p.terms
        .keys()
        .all(|m| m.iter().all(|(b, e)| matches!(b, Expr::Sym(_)) && *e > 0))
}
