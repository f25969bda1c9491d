#[allow(unused_imports)]
use num_traits::Float;

use super::{Expr, Func, SymbolExpr, Var};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// Fixed-slot variable bindings.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    slots: [Option<C64>; 8],
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: Var, z: C64) -> &mut Self {
        self.slots[v.slot()] = Some(z);
        self
    }

    pub fn set_re(&mut self, v: Var, x: f64) -> &mut Self {
        self.set(v, C64::new(x, 0.0))
    }

    pub fn with(mut self, v: Var, x: f64) -> Self {
        self.set_re(v, x);
        self
    }

    pub fn with_c(mut self, v: Var, z: C64) -> Self {
        self.set(v, z);
        self
    }

    pub fn get(&self, v: Var) -> Option<C64> {
        self.slots[v.slot()]
    }

    pub fn unset(&mut self, v: Var) -> &mut Self {
        self.slots[v.slot()] = None;
        self
    }
}

/// Evaluation result: a scalar stands for `c * I`.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    S(C64),
    M(CMat),
}

impl Value {
    pub fn into_matrix(self, q: usize) -> CMat {
        match self {
            Value::S(z) => CMat::identity(q, q) * z,
            Value::M(m) => m,
        }
    }

    fn add(self, o: Value, sign: f64) -> Value {
        match (self, o) {
            (Value::S(a), Value::S(b)) => Value::S(a + b * sign),
            (Value::S(a), Value::M(b)) => {
                let n = b.nrows();
                Value::M(CMat::identity(n, n) * a + b * C64::from(sign))
            }
            (Value::M(a), Value::S(b)) => {
                let n = a.nrows();
                Value::M(a + CMat::identity(n, n) * (b * sign))
            }
            (Value::M(a), Value::M(b)) => Value::M(a + b * C64::from(sign)),
        }
    }

    fn mul(self, o: Value) -> Value {
        match (self, o) {
            (Value::S(a), Value::S(b)) => Value::S(a * b),
            (Value::S(a), Value::M(b)) => Value::M(b * a),
            (Value::M(a), Value::S(b)) => Value::M(a * b),
            (Value::M(a), Value::M(b)) => Value::M(a * b),
        }
    }

    fn inverse(self) -> Result<Value> {
        match self {
            Value::S(z) => {
                if z == C64::new(0.0, 0.0) {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(Value::S(z.inv()))
                }
            }
            Value::M(m) => m.try_inverse().map(Value::M).ok_or(Error::DivisionByZero),
        }
    }

    fn pow(self, n: i32) -> Result<Value> {
        let (base, mut e) = if n < 0 { (self.inverse()?, -(n as i64)) } else { (self, n as i64) };
        if let Value::S(z) = base {
            return Ok(Value::S(z.powi(e as i32)));
        }
        let mut acc = Value::S(C64::new(1.0, 0.0));
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(b.clone());
            }
            e >>= 1;
            if e > 0 {
                b = b.clone().mul(b);
            }
        }
        Ok(acc)
    }

    fn map(self, f: impl Fn(C64) -> C64) -> Value {
        match self {
            Value::S(z) => Value::S(f(z)),
            Value::M(m) => Value::M(m.map(f)),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Value::S(z) => z.re.is_finite() && z.im.is_finite(),
            Value::M(m) => m.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }
}

pub fn chi(s: C64) -> C64 {
    s / (C64::new(1.0, 0.0) + s * s).sqrt()
}

fn apply(f: Func, v: Value) -> Result<Value> {
    let scalar = |v: Value| match v {
        Value::S(z) => Ok(z),
        Value::M(_) => Err(Error::Shape(alloc::format!("`{}` takes a scalar argument", f.name()))),
    };
    Ok(match f {
        Func::Exp => Value::S(scalar(v)?.exp()),
        Func::Log => {
            let z = scalar(v)?;
            if z == C64::new(0.0, 0.0) {
                return Err(Error::LogBranch);
            }
            Value::S(z.ln())
        }
        Func::Sin => Value::S(scalar(v)?.sin()),
        Func::Cos => Value::S(scalar(v)?.cos()),
        Func::Sqrt => Value::S(scalar(v)?.sqrt()),
        Func::Chi => Value::S(chi(scalar(v)?)),
        Func::Conj => v.map(|z| z.conj()),
        Func::Re => v.map(|z| C64::new(z.re, 0.0)),
        Func::Im => v.map(|z| C64::new(z.im, 0.0)),
        Func::Abs => v.map(|z| C64::new(Float::hypot(z.re, z.im), 0.0)),
    })
}

impl Expr {
    pub fn eval_value(&self, b: &Bindings, q: usize) -> Result<Value> {
        let v = match self {
            Expr::Num(z) => Value::S(*z),
            Expr::Var(v) => Value::S(b.get(*v).ok_or(Error::Unbound(v.name()))?),
            Expr::Neg(a) => a.eval_value(b, q)?.map(|z| -z),
            Expr::Add(x, y) => x.eval_value(b, q)?.add(y.eval_value(b, q)?, 1.0),
            Expr::Sub(x, y) => x.eval_value(b, q)?.add(y.eval_value(b, q)?, -1.0),
            Expr::Mul(x, y) => x.eval_value(b, q)?.mul(y.eval_value(b, q)?),
            Expr::Div(x, y) => x.eval_value(b, q)?.mul(y.eval_value(b, q)?.inverse()?),
            Expr::Pow(x, n) => x.eval_value(b, q)?.pow(*n)?,
            Expr::Call(f, x) => apply(*f, x.eval_value(b, q)?)?,
            Expr::Matrix(rows) => {
                if rows.len() != q || rows.iter().any(|r| r.len() != q) {
                    return Err(Error::Shape(alloc::format!("matrix literal is not {q}x{q}")));
                }
                let mut m = CMat::zeros(q, q);
                for (i, row) in rows.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        m[(i, j)] = match e.eval_value(b, q)? {
                            Value::S(z) => z,
                            Value::M(_) => return Err(Error::Shape("matrix entries must be scalar".into())),
                        };
                    }
                }
                Value::M(m)
            }
        };
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(v)
    }
}

impl SymbolExpr {
    /// Evaluate to a `q x q` matrix.
    pub fn eval(&self, b: &Bindings) -> Result<CMat> {
        Ok(self.expr.eval_value(b, self.q)?.into_matrix(self.q))
    }

    /// Evaluate a scalar-shaped expression (or the (0,0) entry for q = 1).
    pub fn eval_scalar(&self, b: &Bindings) -> Result<C64> {
        match self.expr.eval_value(b, self.q)? {
            Value::S(z) => Ok(z),
            Value::M(m) if self.q == 1 => Ok(m[(0, 0)]),
            Value::M(_) => Err(Error::Shape("expected a scalar symbol".into())),
        }
    }
}
