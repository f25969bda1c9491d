//! Symbol hierarchy: interior symbols, cone symbol families with their edge
//! and conormal symbols, homogeneity and compatibility checks, pushforwards.
//!
//! Interior symbols of cone and edge strata are written in compressed
//! covariables: `xi` for `r xi_x`, `p` for the Mellin covariable and `v` for
//! `r v`, so that the main-stratum symbol stays bounded up to `r = 0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dsl::{Bindings, Expr, SymbolExpr, Var};
use crate::error::{Error, Result};
use crate::geometry::{Base, BoundaryMode, Geometry};
use crate::linalg::{self, CMat, C64};
use crate::quantize;

/// Scale used to read off the principal part of a family at infinity.
pub const PRINCIPAL_SCALE: f64 = 1e12;

/// A circle diffeomorphism `f` of degree one with derivative `df`, both
/// written in the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diffeo {
    pub f: SymbolExpr,
    pub df: SymbolExpr,
    pub inverse: bool,
}

impl Diffeo {
    pub fn new(f: &str, df: &str) -> Result<Self> {
        Ok(Diffeo { f: SymbolExpr::parse(f, 1)?, df: SymbolExpr::parse(df, 1)?, inverse: false })
    }

    pub fn inverted(&self) -> Self {
        Diffeo { inverse: !self.inverse, ..self.clone() }
    }

    fn f_raw(&self, x: f64) -> Result<f64> {
        Ok(self.f.eval_scalar(&Bindings::new().with(Var::X, x))?.re)
    }

    fn df_raw(&self, x: f64) -> Result<f64> {
        Ok(self.df.eval_scalar(&Bindings::new().with(Var::X, x))?.re)
    }

    /// Solve `f(y) = x` by Newton iteration on the lift.
    fn f_raw_inverse(&self, x: f64) -> Result<f64> {
        let mut y = x;
        for _ in 0..100 {
            let d = self.df_raw(y)?;
            if d.abs() < 1e-14 {
                return Err(Error::DegenerateDiffeo(y));
            }
            let step = (self.f_raw(y)? - x) / d;
            y -= step;
            if step.abs() < 1e-15 * (1.0 + y.abs()) {
                break;
            }
        }
        Ok(y)
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        if self.inverse {
            self.f_raw_inverse(x)
        } else {
            self.f_raw(x)
        }
    }

    pub fn apply_inverse(&self, y: f64) -> Result<f64> {
        if self.inverse {
            self.f_raw(y)
        } else {
            self.f_raw_inverse(y)
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        if self.inverse {
            let y = self.f_raw_inverse(x)?;
            Ok(1.0 / self.df_raw(y)?)
        } else {
            self.df_raw(x)
        }
    }

    /// Rejects derivatives that vanish or change sign on `n` sample nodes.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut sign = 0.0;
        for j in 0..n {
            let x = 2.0 * PI * j as f64 / n as f64;
            let d = self.df_raw(x)?;
            if d.abs() < 1e-12 || (sign != 0.0 && d.signum() != sign) {
                return Err(Error::DegenerateDiffeo(x));
            }
            sign = d.signum();
        }
        Ok(())
    }
}

/// Degree-zero classical symbol on the main stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorSymbol {
    pub expr: SymbolExpr,
    pub r0: f64,
    /// Covariables forming the homogeneity sphere, e.g. `[xi, v]`.
    pub covars: Vec<Var>,
    /// Pushforward charts, applied in order.
    pub charts: Vec<Diffeo>,
}

impl InteriorSymbol {
    pub fn new(expr: SymbolExpr, r0: f64, covars: Vec<Var>) -> Self {
        InteriorSymbol { expr, r0, covars, charts: Vec::new() }
    }

    /// Circle symbol `a(x, xi, v)`.
    pub fn circle(src: &str, q: usize, r0: f64) -> Result<Self> {
        Ok(Self::new(SymbolExpr::parse(src, q)?, r0, vec![Var::Xi, Var::V]))
    }

    /// Main-stratum symbol of a cone or edge in compressed covariables.
    pub fn cone(src: &str, q: usize, r0: f64) -> Result<Self> {
        Ok(Self::new(SymbolExpr::parse(src, q)?, r0, vec![Var::Xi, Var::P, Var::V]))
    }

    pub fn q(&self) -> usize {
        self.expr.q
    }

    /// Covectors of length `radius` spread over the covariables the symbol
    /// depends on; the others stay zero.
    pub fn sphere(&self, n: usize, radius: f64) -> Vec<Vec<f64>> {
        let active: Vec<usize> = (0..self.covars.len())
            .filter(|&i| self.expr.expr.depends_on(self.covars[i]) || !self.charts.is_empty())
            .collect();
        if active.is_empty() {
            return vec![vec![0.0; self.covars.len()]];
        }
        sphere_points(active.len(), n)
            .into_iter()
            .map(|d| {
                let mut c = vec![0.0; self.covars.len()];
                for (slot, u) in active.iter().zip(&d) {
                    c[*slot] = u * radius;
                }
                c
            })
            .collect()
    }

    /// Evaluate at position `(x, r)` and covariables `cov` (ordered as `covars`).
    pub fn eval(&self, x: f64, r: f64, cov: &[f64]) -> Result<CMat> {
        let mut x = x;
        let mut cov = cov.to_vec();
        let xi_slot = self.covars.iter().position(|v| *v == Var::Xi);
        for chart in self.charts.iter().rev() {
            let x0 = chart.apply_inverse(x)?;
            if let Some(s) = xi_slot {
                cov[s] *= chart.derivative(x0)?;
            }
            x = x0;
        }
        let mut b = Bindings::new().with(Var::X, x).with(Var::R, r);
        if r > 0.0 {
            b.set_re(Var::T, -r.ln());
        }
        for (v, c) in self.covars.iter().zip(&cov) {
            b.set_re(*v, *c);
        }
        self.expr.eval(&b)
    }

    /// Circle evaluation `a(x, xi, v)`.
    pub fn eval_circle(&self, x: f64, xi: f64, v: f64) -> Result<CMat> {
        let mut cov = vec![0.0; self.covars.len()];
        for (slot, var) in self.covars.iter().enumerate() {
            cov[slot] = match var {
                Var::Xi => xi,
                Var::V => v,
                _ => 0.0,
            };
        }
        self.eval(x, 0.0, &cov)
    }

    /// Symbol with `x` frozen at `z` (and `r` at `r_z`).
    pub fn frozen(&self, z: f64, r_z: Option<f64>) -> Result<InteriorSymbol> {
        let x0 = self.charts.iter().rev().try_fold(z, |x, c| c.apply_inverse(x))?;
        let mut e = self.expr.substitute(Var::X, &Expr::num(x0));
        if let Some(r) = r_z {
            e = e.substitute(Var::R, &Expr::num(r));
        }
        if !self.charts.is_empty() {
            // The covector rescaling of a chart is constant once x is frozen.
            let mut scale = 1.0;
            let mut x = z;
            for chart in self.charts.iter().rev() {
                let x0 = chart.apply_inverse(x)?;
                scale *= chart.derivative(x0)?;
                x = x0;
            }
            e = e.substitute(Var::Xi, &Expr::mul(Expr::num(scale), Expr::var(Var::Xi)));
        }
        Ok(InteriorSymbol { expr: e, r0: self.r0, covars: self.covars.clone(), charts: Vec::new() })
    }
}

/// Deterministic, roughly uniform points on the unit sphere of dimension `d - 1`.
pub fn sphere_points(d: usize, n: usize) -> Vec<Vec<f64>> {
    match d {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n)
            .map(|k| {
                let a = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - 5.0.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    let mut p = vec![rho * a.cos(), rho * a.sin(), z];
                    p.resize(d, 0.0);
                    p
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport {
    pub max_violation: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Relative violation of `a(x, lambda c) = a(x, c)` for `|c|` in `[R0, 4 R0]`
/// and `lambda` in `{2, 4}`.
pub fn check_homogeneity(a: &InteriorSymbol, x_samples: &[f64], r_samples: &[f64]) -> Result<HomogeneityReport> {
    let dirs = a.sphere(24, 1.0);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &x in x_samples {
        for &r in r_samples {
            for d in &dirs {
                for rad in [a.r0, 2.0 * a.r0, 4.0 * a.r0] {
                    let c: Vec<f64> = d.iter().map(|u| u * rad).collect();
                    let base = a.eval(x, r, &c)?;
                    let scale = linalg::max_abs(&base).max(1e-300);
                    for lambda in [2.0, 4.0] {
                        let cl: Vec<f64> = c.iter().map(|u| u * lambda).collect();
                        let other = a.eval(x, r, &cl)?;
                        worst = worst.max(linalg::max_abs(&(other - &base)) / scale);
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(HomogeneityReport { max_violation: worst, samples: count, pass: worst <= 1e-9 })
}

/// Pullback data on the base circle: `G u = (u o g) sqrt(g')` and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseConjugation {
    pub g: CMat,
    pub g_inv: CMat,
}

/// Operator-valued family `P(x, r, w, eta, p)` on the base `Omega`. For a
/// circle base, `xi` carries the integer Fourier mode of `Omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSymbolFamily {
    pub expr: SymbolExpr,
    pub base: Base,
    pub conjugation: Option<BaseConjugation>,
}

/// Arguments of a cone family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FamilyArgs {
    pub x: f64,
    pub r: f64,
    pub w: f64,
    pub eta: f64,
    pub p: f64,
}

impl ConeSymbolFamily {
    pub fn new(expr: SymbolExpr, base: Base) -> Self {
        ConeSymbolFamily { expr, base, conjugation: None }
    }

    pub fn parse(src: &str, q: usize, base: Base) -> Result<Self> {
        Ok(Self::new(SymbolExpr::parse(src, q)?, base))
    }

    pub fn q(&self) -> usize {
        self.expr.q
    }

    /// Dimension of the fiber matrix: `q` times the base node count.
    pub fn fiber_dim(&self) -> usize {
        match self.base {
            Base::Point => self.q(),
            Base::Circle(n) => n * self.q(),
        }
    }

    fn bindings(&self, a: &FamilyArgs) -> Bindings {
        let mut b = Bindings::new()
            .with(Var::X, a.x)
            .with(Var::R, a.r)
            .with(Var::W, a.w)
            .with(Var::Eta, a.eta)
            .with(Var::P, a.p);
        if a.r > 0.0 {
            b.set_re(Var::T, -a.r.ln());
        }
        b
    }

    /// Fiber operator at the given arguments, in physical base coordinates.
    pub fn fiber(&self, a: &FamilyArgs) -> Result<CMat> {
        let q = self.q();
        let b = self.bindings(a);
        let m = match self.base {
            Base::Point => self.expr.eval(&b)?,
            Base::Circle(n) => {
                let mut d = CMat::zeros(n * q, n * q);
                for i in 0..n {
                    let mut bm = b;
                    bm.set_re(Var::Xi, linalg::mode(i, n) as f64);
                    let blk = self.expr.eval(&bm)?;
                    d.view_mut((i * q, i * q), (q, q)).copy_from(&blk);
                }
                let f = linalg::kron(&linalg::unitary_dft(n), &linalg::eye(q));
                f.adjoint() * d * f
            }
        };
        Ok(match &self.conjugation {
            Some(c) => &c.g_inv * m * &c.g,
            None => m,
        })
    }

    /// Principal interior symbol in compressed covariables `[xi, p, v]`.
    pub fn principal_symbol(&self) -> InteriorSymbol {
        let s = Expr::num(PRINCIPAL_SCALE);
        let e = self.expr.expr.map_vars(&|v| match v {
            Var::W => Some(Expr::mul(s.clone(), Expr::var(Var::V))),
            Var::Eta => Some(Expr::mul(s.clone(), Expr::var(Var::Xi))),
            Var::P => Some(Expr::mul(s.clone(), Expr::var(Var::P))),
            _ => None,
        });
        InteriorSymbol::new(SymbolExpr::from_expr(e.simplify(), self.q()), 1.0, vec![Var::Xi, Var::P, Var::V])
    }

    /// Family frozen at `(x, r) = (z, 0)`.
    pub fn frozen_at_edge(&self, z: f64) -> ConeSymbolFamily {
        let e = self.expr.substitute(Var::X, &Expr::num(z)).substitute(Var::R, &Expr::num(0.0));
        ConeSymbolFamily { expr: e, base: self.base, conjugation: self.conjugation.clone() }
    }
}

/// Conormal symbol `p -> P(0, 0, 0, 0, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConormalSymbol {
    pub family: ConeSymbolFamily,
}

pub fn conormal(p: &ConeSymbolFamily) -> ConormalSymbol {
    let zero = Expr::num(0.0);
    let e = p.expr.expr.map_vars(&|v| match v {
        Var::X | Var::R | Var::W | Var::Eta => Some(zero.clone()),
        _ => None,
    });
    ConormalSymbol {
        family: ConeSymbolFamily {
            expr: SymbolExpr::from_expr(e.simplify(), p.q()),
            base: p.base,
            conjugation: p.conjugation.clone(),
        },
    }
}

impl ConormalSymbol {
    pub fn at(&self, p: f64) -> Result<CMat> {
        self.family.fiber(&FamilyArgs { p, ..Default::default() })
    }

    /// Scalar value for one-dimensional fibers.
    pub fn scalar(&self, p: f64) -> Result<C64> {
        let m = self.at(p)?;
        if m.nrows() != 1 {
            return Err(Error::Shape("conormal symbol is not scalar".into()));
        }
        Ok(m[(0, 0)])
    }

    pub fn smin(&self, p: f64) -> Result<f64> {
        Ok(linalg::smin(&self.at(p)?))
    }
}

/// Wrapped log-product coordinates used for exact twisted homogeneity on
/// periodic grids: node `j` sees the scaled covariables
/// `(w, eta) = e^{-s_j} (v, xi) / rho` where `s_j` is `t_j - log rho` wrapped
/// into `[-T, T)` and `rho = |(xi, v)|`.
pub fn wrapped_covariables(g: &Geometry, xi: f64, v: f64) -> Vec<(f64, f64)> {
    let c = g.cone_spec().expect("cone geometry");
    let n = c.n_t;
    let h = c.h_t();
    let rho = (xi * xi + v * v).sqrt();
    if rho == 0.0 {
        return vec![(0.0, 0.0); n];
    }
    let l = rho.ln() / h;
    let mut m = l.floor();
    let mut phi = l - m;
    if phi > 1.0 - 1e-9 {
        m += 1.0;
        phi -= 1.0;
    }
    let m = m as i64;
    (0..n)
        .map(|j| {
            let idx = (j as i64 - m).rem_euclid(n as i64);
            let s = -c.t_half + idx as f64 * h - phi * h;
            let e = (-s).exp() / rho;
            (e * v, e * xi)
        })
        .collect()
}

/// Edge symbol `sigma(x, xi, v)`: the Mellin quantization of
/// `P(x, 0, r v, r xi, p)` on a periodic cone grid.
pub fn edge_symbol(p: &ConeSymbolFamily, x: f64, xi: f64, v: f64, g: &Geometry) -> Result<CMat> {
    let c = *g
        .cone_spec()
        .ok_or_else(|| Error::Geometry("edge symbols live on a cone grid".into()))?;
    if c.mode != BoundaryMode::Periodic {
        return Err(Error::Precondition("edge symbols need a periodic cone grid".into()));
    }
    if c.base != p.base {
        return Err(Error::Shape("cone base of family and grid differ".into()));
    }
    let cov = wrapped_covariables(g, xi, v);
    let t = g.t_nodes();
    let pk = g.frequencies(crate::geometry::Axis::T)?;
    quantize::kn_assemble(&t, &pk, p.fiber_dim(), |j, k| {
        p.fiber(&FamilyArgs { x, r: 0.0, w: cov[j].0, eta: cov[j].1, p: pk[k] })
    })
}

/// Max relative violation of `sigma(lambda xi, lambda v) = kappa_lambda sigma(xi, v) kappa_lambda^-1`
/// over `lambda = e^{k h_t}`, `k` in `ks`.
pub fn twisted_violation(p: &ConeSymbolFamily, x: f64, xi: f64, v: f64, g: &Geometry, ks: &[i64]) -> Result<f64> {
    let base = edge_symbol(p, x, xi, v, g)?;
    let scale = linalg::max_abs(&base).max(1e-300);
    let mut worst: f64 = 0.0;
    for &k in ks {
        let lam = (k as f64 * g.h_t()).exp();
        let kap = g.kappa(lam)?;
        let lhs = edge_symbol(p, x, lam * xi, lam * v, g)?;
        worst = worst.max(linalg::max_abs(&(lhs - &kap * &base * kap.adjoint())) / scale);
    }
    Ok(worst)
}

/// Symbol tuple `(sigma_0, sigma_1)` on a cone or edge with point base.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTuple {
    pub sigma0: InteriorSymbol,
    pub sigma1: ConeSymbolFamily,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatReport {
    pub max_mismatch: f64,
    pub tol: f64,
    pub pass: bool,
}

impl SymbolTuple {
    /// Tuple read off from a single family: the principal part and the family.
    pub fn from_family(p: &ConeSymbolFamily) -> Self {
        SymbolTuple { sigma0: p.principal_symbol(), sigma1: p.clone(), tol: 1e-8 }
    }
}

/// Compares `sigma_0` over the edge with the principal part of the
/// generating family on the unit sphere of `(xi, p, v)`.
pub fn compat_check(t: &SymbolTuple) -> Result<CompatReport> {
    if t.sigma0.q() != t.sigma1.q() {
        return Err(Error::Shape(format!("q = {} vs q = {}", t.sigma0.q(), t.sigma1.q())));
    }
    if t.sigma1.base != Base::Point {
        return Err(Error::Shape("symbol tuples need a point base".into()));
    }
    let xs: Vec<f64> = if t.sigma1.expr.expr.depends_on(Var::X) || t.sigma0.expr.expr.depends_on(Var::X) {
        (0..8).map(|i| 2.0 * PI * i as f64 / 8.0).collect()
    } else {
        vec![0.0]
    };
    let dirs = sphere_points(3, 48);
    let lam = PRINCIPAL_SCALE;
    let mut worst: f64 = 0.0;
    for &x in &xs {
        for d in &dirs {
            let (xi, p, v) = (d[0], d[1], d[2]);
            let r0 = t.sigma0.r0.max(1.0);
            let cov: Vec<f64> = t
                .sigma0
                .covars
                .iter()
                .map(|c| match c {
                    Var::Xi => xi * r0,
                    Var::P => p * r0,
                    Var::V => v * r0,
                    _ => 0.0,
                })
                .collect();
            let s0 = t.sigma0.eval(x, 0.0, &cov)?;
            let fam = t.sigma1.fiber(&FamilyArgs { x, r: 0.0, w: lam * v, eta: lam * xi, p: lam * p })?;
            worst = worst.max(linalg::max_abs(&(s0 - fam)));
        }
    }
    Ok(CompatReport { max_mismatch: worst, tol: t.tol, pass: worst <= t.tol })
}

/// Pushforward of a circle symbol under `f`: `a'(f(x), xi / f'(x), v) = a(x, xi, v)`.
pub fn pushforward_interior(a: &InteriorSymbol, f: &Diffeo) -> Result<InteriorSymbol> {
    f.validate(256)?;
    let mut out = a.clone();
    out.charts.push(f.clone());
    Ok(out)
}

/// Band-limited pullback `(G u)(omega_l) = u(g(omega_l)) sqrt(g'(omega_l))`.
pub fn pullback_matrix(g: &Diffeo, n: usize) -> Result<CMat> {
    let f = linalg::dft_matrix(n);
    let mut out = CMat::zeros(n, n);
    for l in 0..n {
        let w = 2.0 * PI * l as f64 / n as f64;
        let y = g.apply(w)?;
        let jac = g.derivative(w)?;
        if jac <= 0.0 {
            return Err(Error::DegenerateDiffeo(w));
        }
        let s = jac.sqrt();
        for i in 0..n {
            let k = linalg::mode(i, n);
            let basis = if 2 * k.unsigned_abs() as usize == n {
                C64::from((k as f64 * y).cos())
            } else {
                C64::from_polar(1.0, k as f64 * y)
            };
            for j in 0..n {
                out[(l, j)] += basis * f[(i, j)] * s;
            }
        }
    }
    Ok(out)
}

/// `P' = (g^*)^{-1} P g^*` at the edge, for a base-circle diffeomorphism `g`.
pub fn pushforward_edge(p: &ConeSymbolFamily, g: &Diffeo) -> Result<ConeSymbolFamily> {
    let n = match p.base {
        Base::Circle(n) => n,
        Base::Point => return Err(Error::Precondition("pushforward_edge needs a circle base".into())),
    };
    g.validate(4 * n)?;
    let q = p.q();
    let gm = linalg::kron(&pullback_matrix(g, n)?, &linalg::eye(q));
    let gi = linalg::inverse(&gm).ok_or(Error::DegenerateDiffeo(0.0))?;
    let (g_new, gi_new) = match &p.conjugation {
        Some(c) => (&c.g * &gm, &gi * &c.g_inv),
        None => (gm, gi),
    };
    let mut out = p.clone();
    out.expr = p.expr.substitute(Var::R, &Expr::num(0.0));
    out.conjugation = Some(BaseConjugation { g: g_new, g_inv: gi_new });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeSpec;

    fn periodic_cone(n_t: usize) -> Geometry {
        Geometry::cone(ConeSpec::new(Base::Point, 4.0, n_t, BoundaryMode::Periodic), 1).unwrap()
    }

    #[test]
    fn homogeneity_examples() {
        let one = InteriorSymbol::circle("1", 1, 1.0).unwrap();
        assert_eq!(check_homogeneity(&one, &[0.0], &[0.0]).unwrap().max_violation, 0.0);
        let chi = InteriorSymbol::circle("chi(xi)", 1, 1e3).unwrap();
        let r = check_homogeneity(&chi, &[0.0], &[0.0]).unwrap();
        assert!(r.max_violation <= 1e-6);
        let lin = InteriorSymbol::circle("xi", 1, 1.0).unwrap();
        assert!(!check_homogeneity(&lin, &[0.0], &[0.0]).unwrap().pass);
    }

    #[test]
    fn conormal_examples() {
        let one = ConeSymbolFamily::parse("1", 1, Base::Point).unwrap();
        assert_eq!(conormal(&one).scalar(3.0).unwrap(), C64::new(1.0, 0.0));
        let g = ConeSymbolFamily::parse("(p - (0,1))/(p + (0,1))", 1, Base::Point).unwrap();
        let cn = conormal(&g);
        for p in [-3.0, 0.0, 2.5] {
            let direct = (C64::new(p, -1.0)) / C64::new(p, 1.0);
            assert!((cn.scalar(p).unwrap() - direct).norm() < 1e-15);
        }
        let pw = ConeSymbolFamily::parse("p + w", 1, Base::Point).unwrap();
        assert_eq!(conormal(&pw).scalar(1.5).unwrap(), C64::new(1.5, 0.0));
    }

    #[test]
    fn edge_symbol_examples() {
        let g = periodic_cone(32);
        let one = ConeSymbolFamily::parse("1", 1, Base::Point).unwrap();
        let m = edge_symbol(&one, 0.0, 1.0, 2.0, &g).unwrap();
        assert!(linalg::max_abs(&(m - linalg::eye(32))) < 1e-13);
        let pf = ConeSymbolFamily::parse("w/(w + (0,1))", 1, Base::Point).unwrap();
        let m = edge_symbol(&pf, 0.0, 0.0, 1.0, &g).unwrap();
        let cov = wrapped_covariables(&g, 0.0, 1.0);
        for j in 0..32 {
            let w = cov[j].0;
            let want = C64::new(w, 0.0) / C64::new(w, 1.0);
            assert!((m[(j, j)] - want).norm() < 1e-13);
            let r = (-g.t_nodes()[j]).exp();
            assert!((w - r).abs() < 1e-12 * r);
        }
    }

    #[test]
    fn twisted_homogeneity_is_exact() {
        let g = periodic_cone(32);
        let p = ConeSymbolFamily::parse("(p - (0,1))/(p + (0,1)) + w*eta/(1 + w^2 + eta^2)", 1, Base::Point).unwrap();
        let base = edge_symbol(&p, 0.0, 0.7, -0.4, &g).unwrap();
        for k in 1..=8 {
            let lam = (k as f64 * g.h_t()).exp();
            let kap = g.kappa(lam).unwrap();
            let lhs = edge_symbol(&p, 0.0, lam * 0.7, -lam * 0.4, &g).unwrap();
            let rhs = &kap * &base * kap.adjoint();
            assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn compat_examples() {
        let one = ConeSymbolFamily::parse("1", 1, Base::Point).unwrap();
        let t = SymbolTuple { sigma0: InteriorSymbol::cone("1", 1, 1.0).unwrap(), sigma1: one, tol: 1e-8 };
        assert_eq!(compat_check(&t).unwrap().max_mismatch, 0.0);
        let two = ConeSymbolFamily::parse("2", 1, Base::Point).unwrap();
        let t = SymbolTuple { sigma0: InteriorSymbol::cone("1", 1, 1.0).unwrap(), sigma1: two, tol: 1e-8 };
        assert!(!compat_check(&t).unwrap().pass);
        let f = ConeSymbolFamily::parse("1 + ((p - (0,1))/(p + (0,1)) - 1)/(1 + r^2) + 0.3*chi(w)", 1, Base::Point).unwrap();
        let t = SymbolTuple::from_family(&f);
        assert!(compat_check(&t).unwrap().max_mismatch <= 1e-8);
    }

    #[test]
    fn pushforward_rotation_and_identity() {
        let a = InteriorSymbol::circle("(2 + sin(x))*chi(xi)", 1, 1.0).unwrap();
        let id = Diffeo::new("x", "1").unwrap();
        let b = pushforward_interior(&a, &id).unwrap();
        let c = 0.4;
        let rot = Diffeo::new("x + 0.4", "1").unwrap();
        let d = pushforward_interior(&a, &rot).unwrap();
        for (x, xi) in [(0.3, 2.0), (1.7, -5.0)] {
            let want = a.eval_circle(x, xi, 0.0).unwrap();
            assert!(linalg::max_abs(&(b.eval_circle(x, xi, 0.0).unwrap() - &want)) < 1e-14);
            let shifted = d.eval_circle(x + c, xi, 0.0).unwrap();
            assert!(linalg::max_abs(&(shifted - want)) < 1e-14);
        }
    }

    #[test]
    fn pushforward_then_inverse_is_identity() {
        let a = InteriorSymbol::circle("(2 + sin(x))*chi(xi) + cos(x)*chi(v)", 1, 1.0).unwrap();
        let f = Diffeo::new("x + 0.3*sin(x)", "1 + 0.3*cos(x)").unwrap();
        let b = pushforward_interior(&pushforward_interior(&a, &f).unwrap(), &f.inverted()).unwrap();
        for (x, xi, v) in [(0.1, 3.0, 1.0), (2.9, -0.5, 0.0), (5.0, 7.0, -2.0)] {
            let d = b.eval_circle(x, xi, v).unwrap() - a.eval_circle(x, xi, v).unwrap();
            assert!(linalg::max_abs(&d) < 1e-10);
        }
    }

    #[test]
    fn degenerate_diffeo_rejected() {
        let a = InteriorSymbol::circle("1", 1, 1.0).unwrap();
        let f = Diffeo::new("x + 2*sin(x)", "1 + 2*cos(x)").unwrap();
        assert!(matches!(pushforward_interior(&a, &f), Err(Error::DegenerateDiffeo(_))));
    }
}
