//! Stock instances shared by the test suites and the command-line tools.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::geometry::{Axis, Base, BoundaryMode, Center, ConeSpec, Geometry};
use crate::linalg::{self, CMat, C64};
use crate::quantize::{op_circle, DiscretizedOperator, OperatorFamily, OperatorSpec};
use crate::symbols::{ConeSymbolFamily, InteriorSymbol, SymbolTuple};

/// Step of the interval-mode cone grids used for finite sections.
pub const CONE_STEP: f64 = 0.3;

/// Refinement ladder for cone finite sections.
pub const CONE_SIZES: [usize; 2] = [128, 256];

/// Interval-mode point-base cone with `n` nodes at step [`CONE_STEP`].
pub fn interval_cone(n: usize, q: usize) -> Result<Geometry> {
    Geometry::cone(ConeSpec::new(Base::Point, n as f64 * CONE_STEP / 2.0, n, BoundaryMode::Interval), q)
}

/// Family interpolating from the conormal symbol `g` at the vertex to `1` far out.
pub fn interpolated(g: &str) -> String {
    format!("1 + ({g} - 1)/(1 + r^2)")
}

pub const G_PLUS: &str = "(p-(0,1))/(p+(0,1))";
pub const G_MINUS: &str = "(p+(0,1))/(p-(0,1))";

#[derive(Debug, Clone, PartialEq)]
pub struct StockTuple {
    pub name: &'static str,
    pub conormal: &'static str,
    pub tuple: SymbolTuple,
}

impl StockTuple {
    fn new(name: &'static str, conormal: &'static str, q: usize) -> Result<Self> {
        let fam = ConeSymbolFamily::parse(&interpolated(conormal), q, Base::Point)?;
        Ok(StockTuple { name, conormal, tuple: SymbolTuple::from_family(&fam) })
    }

    pub fn family(&self) -> &ConeSymbolFamily {
        &self.tuple.sigma1
    }
}

pub fn elliptic_tuples() -> Result<Vec<StockTuple>> {
    Ok(vec![
        StockTuple::new("blaschke", G_PLUS, 1)?,
        StockTuple::new("blaschke-squared", "((p-(0,1))/(p+(0,1)))^2", 1)?,
        StockTuple::new("blaschke-inverse", G_MINUS, 1)?,
        StockTuple::new("shifted-ratio", "(p+(0,2))/(p+(0,1))", 1)?,
        StockTuple::new("block-triangular", "[[(p-(0,1))/(p+(0,1)),0.3],[0,(p-(0,1))/(p+(0,1))]]", 2)?,
    ])
}

/// Tuples whose conormal symbol vanishes at a real `p`.
pub fn degenerate_tuples() -> Result<Vec<StockTuple>> {
    Ok(vec![
        StockTuple::new("quartic-zero", "p^4/(p^4+1)", 1)?,
        StockTuple::new("cubic-zero-at-one", "((p-1)/(p+(0,1)))^3", 1)?,
        StockTuple::new("sextic-zero", "p^6/(p^6+1)", 1)?,
    ])
}

/// Scalar cone instances with windings of modulus one, one and two.
pub fn index_instances() -> Result<Vec<StockTuple>> {
    let all = elliptic_tuples()?;
    Ok(all.into_iter().filter(|t| t.tuple.sigma1.q() == 1 && t.name.starts_with("blaschke")).collect())
}

/// Families with nontrivial dependence on `(w, eta, p)` for twisted homogeneity.
pub fn edge_symbols() -> Result<Vec<(&'static str, ConeSymbolFamily)>> {
    let src: [(&'static str, &'static str, usize); 5] = [
        ("blaschke-plus-mixed", "(p - (0,1))/(p + (0,1)) + w*eta/(1 + w^2 + eta^2)", 1),
        ("parameter-weight", "1 + w^2/(1 + w^2 + eta^2)", 1),
        ("mellin-chi", "chi(p) + (0,1)*eta/(1 + w^2 + eta^2 + p^2)", 1),
        ("phase", "exp((0,1)*w*eta/(1 + eta^2))*(p + (0,2))/(p + (0,1))", 1),
        ("matrix", "[[1, w],[eta, (p-(0,1))/(p+(0,1))]]/(1 + w^2 + eta^2)", 2),
    ];
    src.iter()
        .map(|(name, s, q)| Ok((*name, ConeSymbolFamily::parse(s, *q, Base::Point)?)))
        .collect()
}

/// Periodic point-base cone for edge symbols.
pub fn periodic_cone(n: usize, q: usize) -> Result<Geometry> {
    Geometry::cone(ConeSpec::new(Base::Point, 6.0, n, BoundaryMode::Periodic), q)
}

/// `e^{ix}` on nonnegative modes and `1` on negative modes.
pub fn toeplitz(n: usize) -> Result<DiscretizedOperator> {
    let g = Geometry::circle(n, 1)?;
    let f = linalg::unitary_dft(n);
    let plus: Vec<f64> = (0..n).map(|i| if linalg::mode(i, n) >= 0 { 1.0 } else { 0.0 }).collect();
    let minus: Vec<f64> = plus.iter().map(|x| 1.0 - x).collect();
    let pp = f.adjoint() * linalg::diag_real(&plus) * &f;
    let pm = f.adjoint() * linalg::diag_real(&minus) * &f;
    let e = linalg::diag(&g.x_nodes().iter().map(|x| C64::new(0.0, *x).exp()).collect::<Vec<_>>());
    let m = g.along_matrix(Axis::X, &(e * pp + pm))?;
    Ok(DiscretizedOperator::new(g, 0.0, m))
}

/// Symbol of [`toeplitz`] traversed with `x` decreasing, matching the
/// orientation of the cone instances.
pub fn toeplitz_contour(n: usize) -> Vec<f64> {
    (0..=n).map(|i| 2.0 * core::f64::consts::PI * (1.0 - i as f64 / n as f64)).collect()
}

pub fn toeplitz_symbol(x: f64) -> Result<CMat> {
    Ok(CMat::from_element(1, 1, C64::new(0.0, x).exp()))
}

pub const LARGE_PARAMETER_SYMBOL: &str = "(xi^2+v^2+1)/(xi^2+v^2+2)";
pub const LARGE_PARAMETER_SAMPLES: [f64; 4] = [8.0, 16.0, 32.0, 64.0];

pub fn large_parameter_family(n: usize) -> Result<OperatorFamily> {
    let g = Geometry::circle(n, 1)?;
    let a = InteriorSymbol::circle(LARGE_PARAMETER_SYMBOL, 1, 1.0)?;
    OperatorFamily::build(&LARGE_PARAMETER_SAMPLES, |v| op_circle(&a, &g, v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfinitesimalCase {
    pub name: &'static str,
    pub spec: OperatorSpec,
    pub center: Center,
    pub scales: Vec<f64>,
    pub tol: f64,
}

/// Instances whose `x`-dependence sits in a multiplication part flat at the
/// center, with the center away from maximizers of the symbol modulus.
pub fn infinitesimal_cases() -> Result<Vec<InfinitesimalCase>> {
    let circle = Geometry::circle(256, 1)?;
    let a = InteriorSymbol::circle("2 + (1-cos(x))^2 + 0.5*chi(xi)", 1, 1.0)?;
    let b = InteriorSymbol::circle("1 + sin(x)^4 + 0.3*exp((0,1)*chi(xi))", 1, 1.0)?;
    let cone = Geometry::cone(ConeSpec::new(Base::Point, 16.0, 128, BoundaryMode::Interval), 1)?;
    let p = ConeSymbolFamily::parse("1 + r/(1+r)*p^2/(p^2+1)", 1, Base::Point)?;
    let circle_scales = vec![1.0, 0.5, 0.25, 0.125];
    Ok(vec![
        InfinitesimalCase {
            name: "circle-flat-modulus",
            spec: OperatorSpec::circle(a, circle.clone()),
            center: Center::circle(0.0),
            scales: circle_scales.clone(),
            tol: 1e-3,
        },
        InfinitesimalCase {
            name: "circle-phase-part",
            spec: OperatorSpec::circle(b, circle),
            center: Center::circle(0.0),
            scales: circle_scales,
            tol: 1e-3,
        },
        InfinitesimalCase {
            name: "cone-vertex",
            spec: OperatorSpec::family(p, cone),
            center: Center::vertex(),
            scales: (2..14).map(|k| 0.5f64.powi(k)).collect(),
            tol: 1e-3,
        },
    ])
}

pub const GLUING_SYMBOL: &str = "(1+0.2*cos(x))*(1+0.3*chi(xi))";

/// Infinitesimal operators of one circle operator at equally spaced centers.
pub fn gluing_family(n: usize, centers: usize) -> Result<crate::localization::LocalFamily> {
    let g = Geometry::circle(n, 1)?;
    let a = InteriorSymbol::circle(GLUING_SYMBOL, 1, 1.0)?;
    let spec = OperatorSpec::circle(a, g.clone());
    let cs: Vec<Center> =
        (0..centers).map(|i| Center::circle(2.0 * core::f64::consts::PI * i as f64 / centers as f64)).collect();
    let ops = cs
        .iter()
        .map(|c| crate::calculus::freeze(&spec, *c).and_then(|s| s.quantize(0.0)).map(|o| o.matrix))
        .collect::<Result<Vec<_>>>()?;
    crate::localization::LocalFamily::new(g, cs, ops)
}
