use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{Expr, Func, Shape, SymbolExpr, Var};
use crate::error::{Error, Result};
use crate::linalg::C64;

fn zero() -> Expr {
    Expr::num(0.0)
}

fn one() -> Expr {
    Expr::num(1.0)
}

impl Expr {
    /// Exact symbolic derivative with respect to a real variable.
    pub fn diff(&self, var: Var) -> Result<Expr> {
        Ok(self.diff_raw(var)?.simplify())
    }

    fn diff_raw(&self, var: Var) -> Result<Expr> {
        Ok(match self {
            Expr::Num(_) => zero(),
            Expr::Var(v) => {
                if *v == var {
                    one()
                } else {
                    zero()
                }
            }
            Expr::Neg(a) => Expr::neg(a.diff_raw(var)?),
            Expr::Add(a, b) => Expr::add(a.diff_raw(var)?, b.diff_raw(var)?),
            Expr::Sub(a, b) => Expr::sub(a.diff_raw(var)?, b.diff_raw(var)?),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff_raw(var)?, (**b).clone()),
                Expr::mul((**a).clone(), b.diff_raw(var)?),
            ),
            Expr::Div(a, b) => {
                // (a b^{-1})' = a' b^{-1} - a b^{-1} b' b^{-1}
                let first = Expr::div(a.diff_raw(var)?, (**b).clone());
                let second = Expr::div(Expr::mul(Expr::div((**a).clone(), (**b).clone()), b.diff_raw(var)?), (**b).clone());
                Expr::sub(first, second)
            }
            Expr::Pow(a, n) => pow_derivative(a, *n, var)?,
            Expr::Call(f, a) => {
                let u = (**a).clone();
                let du = a.diff_raw(var)?;
                match f {
                    Func::Exp => Expr::mul(self.clone(), du),
                    Func::Log => Expr::div(du, u),
                    Func::Sin => Expr::mul(Expr::call(Func::Cos, u), du),
                    Func::Cos => Expr::neg(Expr::mul(Expr::call(Func::Sin, u), du)),
                    Func::Sqrt => Expr::div(du, Expr::mul(Expr::num(2.0), self.clone())),
                    Func::Chi => {
                        let s = Expr::add(one(), Expr::pow(u, 2));
                        Expr::div(du, Expr::mul(s.clone(), Expr::call(Func::Sqrt, s)))
                    }
                    Func::Conj | Func::Re | Func::Im => Expr::call(*f, du),
                    Func::Abs => return Err(Error::DiffAbs),
                }
            }
            Expr::Matrix(rows) => {
                let mut out = Vec::with_capacity(rows.len());
                for row in rows {
                    let mut r = Vec::with_capacity(row.len());
                    for e in row {
                        r.push(e.diff_raw(var)?);
                    }
                    out.push(r);
                }
                Expr::Matrix(out)
            }
        })
    }

    /// Constant folding of zeros, ones and numeric subexpressions.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => match a.simplify() {
                Expr::Num(z) => Expr::Num(-z),
                Expr::Neg(b) => *b,
                s => Expr::neg(s),
            },
            Expr::Add(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
                (x, y) if is_zero(&x) => y,
                (x, y) if is_zero(&y) => x,
                (x, y) => Expr::add(x, y),
            },
            Expr::Sub(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
                (x, y) if is_zero(&y) => x,
                (x, y) if is_zero(&x) => Expr::neg(y).simplify(),
                (x, y) => Expr::sub(x, y),
            },
            Expr::Mul(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
                (x, y) if is_zero(&x) || is_zero(&y) => zero(),
                (x, y) if is_one(&x) => y,
                (x, y) if is_one(&y) => x,
                (x, y) => Expr::mul(x, y),
            },
            Expr::Div(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Num(x), Expr::Num(y)) if y != C64::new(0.0, 0.0) => Expr::Num(x / y),
                (x, _) if is_zero(&x) => zero(),
                (x, y) if is_one(&y) => x,
                (x, y) => Expr::div(x, y),
            },
            Expr::Pow(a, n) => match (a.simplify(), *n) {
                (_, 0) => one(),
                (x, 1) => x,
                (Expr::Num(z), n) if n > 0 || z != C64::new(0.0, 0.0) => Expr::Num(z.powi(n)),
                (x, n) => Expr::pow(x, n),
            },
            Expr::Call(f, a) => {
                let s = a.simplify();
                match (f, &s) {
                    (Func::Conj | Func::Re | Func::Im, e) if is_zero(e) => zero(),
                    _ => Expr::Call(*f, Box::new(s)),
                }
            }
            Expr::Matrix(rows) => {
                Expr::Matrix(rows.iter().map(|r| r.iter().map(|e| e.simplify()).collect()).collect())
            }
        }
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(z) if *z == C64::new(0.0, 0.0))
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(z) if *z == C64::new(1.0, 0.0))
}

fn pow_derivative(a: &Expr, n: i32, var: Var) -> Result<Expr> {
    if n == 0 {
        return Ok(zero());
    }
    let da = a.diff_raw(var)?;
    if a.shape() == Shape::Scalar {
        return Ok(Expr::mul(Expr::mul(Expr::num(n as f64), Expr::pow(a.clone(), n - 1)), da));
    }
    // Non-commuting base: sum_{i} B^i B' B^{m-1-i} with B = a or a^{-1}.
    let (b, db, m) = if n > 0 {
        (a.clone(), da, n)
    } else {
        let inv = Expr::pow(a.clone(), -1);
        let dinv = Expr::neg(Expr::mul(Expr::mul(inv.clone(), da), inv.clone()));
        (inv, dinv, -n)
    };
    let mut sum: Option<Expr> = None;
    for i in 0..m {
        let term = Expr::mul(Expr::mul(Expr::pow(b.clone(), i), db.clone()), Expr::pow(b.clone(), m - 1 - i));
        sum = Some(match sum {
            None => term,
            Some(s) => Expr::add(s, term),
        });
    }
    Ok(sum.unwrap_or_else(zero))
}

impl SymbolExpr {
    pub fn diff(&self, var: Var) -> Result<SymbolExpr> {
        Ok(SymbolExpr { expr: self.expr.diff(var)?, q: self.q })
    }

    /// `n`-th derivative.
    pub fn diff_n(&self, var: Var, n: usize) -> Result<SymbolExpr> {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.diff(var)?;
        }
        Ok(e)
    }

    pub fn substitute(&self, var: Var, by: &Expr) -> SymbolExpr {
        SymbolExpr { expr: self.expr.substitute(var, by).simplify(), q: self.q }
    }
}
