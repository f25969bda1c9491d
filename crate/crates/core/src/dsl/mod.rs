//! Symbol definition language: matrix-valued expressions in the variables
//! `x, xi, r, t, p, v, w, eta` with complex literals `(re, im)`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::C64;

mod diff;
mod eval;
mod parse;

pub use eval::{Bindings, Value};
pub use parse::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Xi,
    R,
    T,
    P,
    V,
    W,
    Eta,
}

impl Var {
    pub const ALL: [Var; 8] = [Var::X, Var::Xi, Var::R, Var::T, Var::P, Var::V, Var::W, Var::Eta];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Xi => "xi",
            Var::R => "r",
            Var::T => "t",
            Var::P => "p",
            Var::V => "v",
            Var::W => "w",
            Var::Eta => "eta",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Var::ALL.iter().copied().find(|v| v.name() == s)
    }

    pub fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Conj,
    Re,
    Im,
    Abs,
    Chi,
}

impl Func {
    const ALL: [Func; 10] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sqrt,
        Func::Conj,
        Func::Re,
        Func::Im,
        Func::Abs,
        Func::Chi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs => "abs",
            Func::Chi => "chi",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }

    /// Functions that only accept scalar arguments.
    pub fn scalar_only(self) -> bool {
        !matches!(self, Func::Conj | Func::Re | Func::Im | Func::Abs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(C64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
    Matrix(Vec<Vec<Expr>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Square,
}

impl Expr {
    pub fn num(re: f64) -> Expr {
        Expr::Num(C64::new(re, 0.0))
    }

    pub fn cnum(z: C64) -> Expr {
        Expr::Num(z)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn call(f: Func, e: Expr) -> Expr {
        Expr::Call(f, Box::new(e))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        Expr::Pow(Box::new(a), n)
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn shape(&self) -> Shape {
        match self {
            Expr::Num(_) | Expr::Var(_) => Shape::Scalar,
            Expr::Matrix(_) => Shape::Square,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.shape(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                if a.shape() == Shape::Square || b.shape() == Shape::Square {
                    Shape::Square
                } else {
                    Shape::Scalar
                }
            }
        }
    }

    /// Free variables, sorted and deduplicated.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Matrix(rows) => rows.iter().flatten().for_each(|e| e.collect_vars(out)),
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.variables().contains(&v)
    }

    /// Replace every occurrence of variable `v` by `by`.
    pub fn substitute(&self, v: Var, by: &Expr) -> Expr {
        self.map_vars(&|u| if u == v { Some(by.clone()) } else { None })
    }

    /// Replace variables according to `f` (returning `None` keeps the variable).
    pub fn map_vars(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        let b = |e: &Expr| Box::new(e.map_vars(f));
        match self {
            Expr::Num(z) => Expr::Num(*z),
            Expr::Var(v) => f(*v).unwrap_or(Expr::Var(*v)),
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Pow(x, n) => Expr::Pow(b(x), *n),
            Expr::Call(g, x) => Expr::Call(*g, b(x)),
            Expr::Matrix(rows) => {
                Expr::Matrix(rows.iter().map(|r| r.iter().map(|e| e.map_vars(f)).collect()).collect())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, z: C64) -> fmt::Result {
    if z.im == 0.0 && z.re >= 0.0 && !(z.re == 0.0 && z.re.is_sign_negative()) {
        write!(f, "{:?}", z.re)
    } else {
        write!(f, "({:?},{:?})", z.re, z.im)
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(z) => write_num(f, *z),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_wrapped(f, a, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                write_wrapped(f, a, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                write_wrapped(f, b, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                write_wrapped(f, a, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                write_wrapped(f, b, 3)
            }
            Expr::Pow(a, n) => {
                write_wrapped(f, a, 5)?;
                write!(f, "^{n}")
            }
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
            Expr::Matrix(rows) => {
                f.write_str("[")?;
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str("[")?;
                    for (j, e) in row.iter().enumerate() {
                        if j > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{e}")?;
                    }
                    f.write_str("]")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// A parsed expression together with its declared fiber dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolExpr {
    pub expr: Expr,
    pub q: usize,
}

impl SymbolExpr {
    pub fn parse(src: &str, q: usize) -> Result<Self, ParseError> {
        parse(src, q)
    }

    pub fn from_expr(expr: Expr, q: usize) -> Self {
        SymbolExpr { expr, q }
    }

    pub fn constant(z: C64, q: usize) -> Self {
        SymbolExpr { expr: Expr::Num(z), q }
    }

    pub fn source(&self) -> String {
        alloc::format!("{}", self.expr)
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

/// Parse failure with byte offset and 1-based line/column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.expected)
    }
}

impl core::error::Error for ParseError {}
