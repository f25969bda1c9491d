//! Kohn–Nirenberg quantization on the circle, Mellin quantization on the cone
//! (in the log coordinate `t = -ln r`, flat coordinates), edge quantization
//! with operator-valued symbols, and the negligible-family test.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{Axis, BoundaryMode, ConeSpec, Geometry, Kind};
use crate::linalg::{self, CMat, C64};
use crate::symbols::{ConeSymbolFamily, FamilyArgs, InteriorSymbol};

/// Dense operator on a geometry, in flat coordinates, at parameter `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub geometry: Geometry,
    pub v: f64,
    pub matrix: CMat,
}

impl DiscretizedOperator {
    pub fn new(geometry: Geometry, v: f64, matrix: CMat) -> Self {
        DiscretizedOperator { geometry, v, matrix }
    }

    pub fn identity(geometry: &Geometry) -> Self {
        let n = geometry.dim();
        DiscretizedOperator::new(geometry.clone(), 0.0, linalg::eye(n))
    }

    pub fn norm(&self) -> f64 {
        linalg::opnorm(&self.matrix)
    }

    /// Matrix acting on native (unweighted) samples: `W^{-1} M W`.
    pub fn native_matrix(&self) -> CMat {
        let f = self.geometry.per_coefficient(&self.geometry.w_factors());
        CMat::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| self.matrix[(i, j)] * (f[j] / f[i]))
    }
}

/// Samples of a parameter-dependent family.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFamily {
    pub samples: Vec<f64>,
    pub ops: Vec<DiscretizedOperator>,
}

impl OperatorFamily {
    pub fn build(samples: &[f64], mut f: impl FnMut(f64) -> Result<DiscretizedOperator>) -> Result<Self> {
        let mut ops = Vec::with_capacity(samples.len());
        for &v in samples {
            ops.push(f(v)?);
        }
        Ok(OperatorFamily { samples: samples.to_vec(), ops })
    }

    pub fn sup_norm(&self) -> f64 {
        self.ops.iter().map(|o| o.norm()).fold(0.0, f64::max)
    }
}

/// Dyadic ladder `{0, +-1, +-2, ..., +-2^k}` sorted by value.
pub fn dyadic_ladder(k: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * k as usize + 3);
    for e in (0..=k).rev() {
        out.push(-((1u64 << e) as f64));
    }
    out.push(0.0);
    for e in 0..=k {
        out.push((1u64 << e) as f64);
    }
    out
}

/// Kohn–Nirenberg assembly `A[(j,a),(l,b)] = (1/N) sum_k e^{i f_k (y_j - y_l)} M_{jk}[a,b]`
/// on a periodic grid with nodes `y` and frequencies `f`.
pub fn kn_assemble(
    nodes: &[f64],
    freqs: &[f64],
    m: usize,
    mut fiber: impl FnMut(usize, usize) -> Result<CMat>,
) -> Result<CMat> {
    let n = nodes.len();
    let mut fibers: Vec<CMat> = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let f = fiber(j, k)?;
            if f.nrows() != m || f.ncols() != m {
                return Err(Error::Shape(format!("fiber is {}x{}, expected {m}x{m}", f.nrows(), f.ncols())));
            }
            fibers.push(f);
        }
    }
    let e = CMat::from_fn(n, n, |l, k| C64::from_polar(1.0, freqs[k] * nodes[l]));
    let eh = e.adjoint() * C64::from(1.0 / n as f64);
    let mut out = CMat::zeros(n * m, n * m);
    for a in 0..m {
        for b in 0..m {
            let g = CMat::from_fn(n, n, |j, k| fibers[j * n + k][(a, b)] * e[(j, k)]);
            let blk = g * &eh;
            for j in 0..n {
                for l in 0..n {
                    out[(j * m + a, l * m + b)] = blk[(j, l)];
                }
            }
        }
    }
    Ok(out)
}

/// `(A u)(x_j) = sum_k e^{i k x_j} a(x_j, k, v) u_hat(k)`.
pub fn op_circle(a: &InteriorSymbol, g: &Geometry, v: f64) -> Result<DiscretizedOperator> {
    if !matches!(g.kind, Kind::Circle { .. }) {
        return Err(Error::Geometry("op_circle needs a circle geometry".into()));
    }
    if a.q() != g.q {
        return Err(Error::Shape(format!("symbol q = {} on geometry q = {}", a.q(), g.q)));
    }
    let x = g.x_nodes();
    let k = g.frequencies(Axis::X)?;
    let m = kn_assemble(&x, &k, g.q, |j, i| a.eval_circle(x[j], k[i], v))?;
    Ok(DiscretizedOperator::new(g.clone(), v, m))
}

/// Frozen context of a Mellin quantization: edge point `x0` and edge covector
/// `xi0`, entering as `eta = r xi0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MellinContext {
    pub x0: f64,
    pub xi0: f64,
}

/// Mellin quantization matrix on the cone axis of `spec`, with symbol
/// `F(t, p) = P(x0, e^{-t}, v e^{-t}, xi0 e^{-t}, p)`.
pub fn mellin_matrix(p: &ConeSymbolFamily, spec: &ConeSpec, v: f64, ctx: MellinContext) -> Result<CMat> {
    let fiber = |t: f64, pk: f64| {
        let r = (-t).exp();
        p.fiber(&FamilyArgs { x: ctx.x0, r, w: v * r, eta: ctx.xi0 * r, p: pk })
    };
    mellin_assemble(spec, p.fiber_dim(), &fiber)
}

/// Mellin quantization of an arbitrary `m x m` fiber function `F(t, p)`.
pub fn mellin_assemble(spec: &ConeSpec, m: usize, fiber: &dyn Fn(f64, f64) -> Result<CMat>) -> Result<CMat> {
    match spec.mode {
        BoundaryMode::Periodic => {
            let n = spec.n_t;
            let t: Vec<f64> = (0..n).map(|j| -spec.t_half + j as f64 * spec.h_t()).collect();
            let pk: Vec<f64> = (0..n).map(|i| linalg::mode(i, n) as f64 * core::f64::consts::PI / spec.t_half).collect();
            kn_assemble(&t, &pk, m, |j, k| fiber(t[j], pk[k]))
        }
        BoundaryMode::Interval => {
            let n = spec.n_t;
            let big = 2 * n;
            let h = spec.h_t();
            let t: Vec<f64> = (0..big).map(|j| -2.0 * spec.t_half + j as f64 * h).collect();
            let pk: Vec<f64> =
                (0..big).map(|i| linalg::mode(i, big) as f64 * core::f64::consts::PI / (2.0 * spec.t_half)).collect();
            check_support_policy(fiber, spec, &pk)?;
            let lo = n / 2;
            let mut fibers: Vec<CMat> = Vec::with_capacity(n * big);
            for j in lo..lo + n {
                for &p in &pk {
                    fibers.push(fiber(t[j], p)?);
                }
            }
            // Central rows of the periodic assembly on the doubled grid.
            let e = CMat::from_fn(n, big, |jj, k| C64::from_polar(1.0, pk[k] * t[lo + jj]));
            let eh = e.adjoint() * C64::from(1.0 / big as f64);
            let mut out = CMat::zeros(n * m, n * m);
            for a in 0..m {
                for b in 0..m {
                    let g = CMat::from_fn(n, big, |jj, k| fibers[jj * big + k][(a, b)] * e[(jj, k)]);
                    let blk = g * &eh;
                    for j in 0..n {
                        for l in 0..n {
                            out[(j * m + a, l * m + b)] = blk[(j, l)];
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

fn check_support_policy(
    fiber: &dyn Fn(f64, f64) -> Result<CMat>,
    spec: &ConeSpec,
    pk: &[f64],
) -> Result<()> {
    let h = spec.h_t();
    let mut varies = [false, false];
    for (side, t) in [(0, -spec.t_half), (1, spec.t_half - h)].iter().copied() {
        let step = if side == 0 { -h } else { h };
        for &p in pk.iter().step_by((pk.len() / 16).max(1)) {
            let a = fiber(t, p)?;
            let b = fiber(t + step, p)?;
            let scale = linalg::max_abs(&a).max(1.0);
            if linalg::max_abs(&(a - b)) > 1e-6 * scale {
                varies[side] = true;
            }
        }
    }
    if varies[0] && varies[1] {
        return Err(Error::Precondition(
            "symbol is not constant in r near either end of the interval".into(),
        ));
    }
    Ok(())
}

/// Mellin quantization on a cone geometry.
pub fn op_mellin(p: &ConeSymbolFamily, g: &Geometry, v: f64, ctx: MellinContext) -> Result<DiscretizedOperator> {
    let spec = match &g.kind {
        Kind::Cone(c) => *c,
        _ => return Err(Error::Geometry("op_mellin needs a cone geometry".into())),
    };
    check_family(p, &spec, g.q)?;
    let m = mellin_matrix(p, &spec, v, ctx)?;
    Ok(DiscretizedOperator::new(g.clone(), v, m))
}

fn check_family(p: &ConeSymbolFamily, spec: &ConeSpec, q: usize) -> Result<()> {
    if p.base != spec.base {
        return Err(Error::Shape("cone base of family and grid differ".into()));
    }
    if p.q() != q {
        return Err(Error::Shape(format!("symbol q = {} on geometry q = {q}", p.q())));
    }
    Ok(())
}

/// Edge quantization: Kohn–Nirenberg in `x` over fiber Mellin operators with
/// `eta = r xi_k` and `w = r v`.
pub fn op_edge(p: &ConeSymbolFamily, g: &Geometry, v: f64) -> Result<DiscretizedOperator> {
    let (n_x, spec) = match &g.kind {
        Kind::Edge { n_x, cone } => (*n_x, *cone),
        _ => return Err(Error::Geometry("op_edge needs an edge geometry".into())),
    };
    if spec.mode != BoundaryMode::Periodic {
        return Err(Error::Precondition("op_edge needs a periodic cone axis".into()));
    }
    check_family(p, &spec, g.q)?;
    let x = g.x_nodes();
    let xi = g.frequencies(Axis::X)?;
    let m = spec.n_t * p.fiber_dim();
    let x_dependent = p.expr.expr.depends_on(crate::dsl::Var::X);
    let mut cache: Vec<Option<CMat>> = (0..n_x).map(|_| None).collect();
    let mat = kn_assemble(&x, &xi, m, |i, k| {
        if x_dependent {
            return mellin_matrix(p, &spec, v, MellinContext { x0: x[i], xi0: xi[k] });
        }
        if cache[k].is_none() {
            cache[k] = Some(mellin_matrix(p, &spec, v, MellinContext { x0: 0.0, xi0: xi[k] })?);
        }
        Ok(cache[k].clone().unwrap_or_else(|| CMat::zeros(m, m)))
    })?;
    Ok(DiscretizedOperator::new(g.clone(), v, mat))
}

/// Symbol data of a quantizable operator.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolData {
    Interior(InteriorSymbol),
    Family(ConeSymbolFamily),
}

/// A symbol together with the grid it is quantized on.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub symbol: SymbolData,
    pub geometry: Geometry,
}

impl OperatorSpec {
    pub fn circle(a: InteriorSymbol, g: Geometry) -> Self {
        OperatorSpec { symbol: SymbolData::Interior(a), geometry: g }
    }

    pub fn family(p: ConeSymbolFamily, g: Geometry) -> Self {
        OperatorSpec { symbol: SymbolData::Family(p), geometry: g }
    }

    /// Quantize at parameter `v` with the quantization matching the geometry.
    pub fn quantize(&self, v: f64) -> Result<DiscretizedOperator> {
        match (&self.symbol, &self.geometry.kind) {
            (SymbolData::Interior(a), Kind::Circle { .. }) => op_circle(a, &self.geometry, v),
            (SymbolData::Family(p), Kind::Cone(_)) => op_mellin(p, &self.geometry, v, MellinContext::default()),
            (SymbolData::Family(p), Kind::Edge { .. }) => op_edge(p, &self.geometry, v),
            _ => Err(Error::Geometry("symbol type does not match the geometry".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegligibleVerdict {
    pub order: u32,
    pub tau: f64,
    /// `max_i ||D(v_i)|| (1 + |v_i|)^N`.
    pub constant: f64,
    /// Same bound for finite-difference derivatives between adjacent samples.
    pub derivative_constant: f64,
    pub norms: Vec<f64>,
    /// Per sample, the number of singular values above `1e-10 ||D||_sup`.
    pub sv_tail_index: Vec<usize>,
    pub tail_non_increasing: bool,
    pub negligible: bool,
}

/// Decay test `||d^b D / dv^b|| <= C (1 + |v|)^{-N}` on the sampled ladder.
pub fn negligible_test(f: &OperatorFamily, order: u32, tau: f64) -> Result<NegligibleVerdict> {
    if f.samples.len() < 3 {
        return Err(Error::TooFewSamples(3));
    }
    let mut idx: Vec<usize> = (0..f.samples.len()).collect();
    idx.sort_by(|&a, &b| f.samples[a].partial_cmp(&f.samples[b]).unwrap_or(core::cmp::Ordering::Equal));
    let sv: Vec<Vec<f64>> = f.ops.iter().map(|o| linalg::singular_values(&o.matrix)).collect();
    let norms: Vec<f64> = sv.iter().map(|s| s.first().copied().unwrap_or(0.0)).collect();
    let sup = norms.iter().copied().fold(0.0, f64::max);
    let weight = |v: f64| (1.0 + v.abs()).powi(order as i32);
    let constant = f.samples.iter().zip(&norms).map(|(v, n)| n * weight(*v)).fold(0.0, f64::max);
    let mut derivative_constant: f64 = 0.0;
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dv = f.samples[b] - f.samples[a];
        if dv == 0.0 {
            continue;
        }
        let d = linalg::opnorm(&(&f.ops[b].matrix - &f.ops[a].matrix)) / dv.abs();
        let vmin = f.samples[a].abs().min(f.samples[b].abs());
        derivative_constant = derivative_constant.max(d * weight(vmin));
    }
    // Tail: the three largest |v| on each side must not grow (10% jitter).
    let mut tail_ok = true;
    for side in [1.0, -1.0] {
        let mut pts: Vec<(f64, f64)> = f
            .samples
            .iter()
            .zip(&norms)
            .filter(|(v, _)| **v * side > 0.0)
            .map(|(v, n)| (v.abs(), n * weight(*v)))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
        let tail = &pts[pts.len().saturating_sub(3)..];
        for w in tail.windows(2) {
            if w[1].1 > 1.1 * w[0].1 + 1e-300 {
                tail_ok = false;
            }
        }
    }
    let sv_tail_index = sv.iter().map(|s| s.iter().filter(|x| **x > 1e-10 * sup.max(1e-300)).count()).collect();
    let negligible = constant <= tau && derivative_constant <= tau && tail_ok;
    Ok(NegligibleVerdict {
        order,
        tau,
        constant,
        derivative_constant,
        norms,
        sv_tail_index,
        tail_non_increasing: tail_ok,
        negligible,
    })
}

/// Norms of `X D(v)` for a first-order vector field `X` given as a matrix;
/// a smoke check that decay in `v` survives one differentiation.
pub fn vector_field_smoke(f: &OperatorFamily, field: &CMat) -> Vec<f64> {
    f.ops.iter().map(|o| linalg::opnorm(&(field * &o.matrix))).collect()
}

/// Spectral derivative `d/dx` on a circle geometry, or `r d/dr = -d/dt` on a
/// periodic cone axis.
pub fn derivative_matrix(g: &Geometry, axis: Axis) -> Result<CMat> {
    let n = match axis {
        Axis::X => g.dims().0,
        Axis::T => g.dims().1,
        Axis::Omega => g.dims().2,
    };
    let freqs = g.frequencies(axis)?;
    let sign = if axis == Axis::T { -1.0 } else { 1.0 };
    let d: Vec<C64> = freqs
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if 2 * linalg::mode(i, n).unsigned_abs() as usize == n {
                C64::from(0.0)
            } else {
                C64::new(0.0, sign * f)
            }
        })
        .collect();
    let m = linalg::idft_matrix(n) * linalg::diag(&d) * linalg::dft_matrix(n);
    g.along_matrix(axis, &m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Base;
    use crate::linalg::{c, max_abs};
    use core::f64::consts::PI;

    fn cone(n_t: usize, mode: BoundaryMode) -> Geometry {
        Geometry::cone(ConeSpec::new(Base::Point, 4.0, n_t, mode), 1).unwrap()
    }

    #[test]
    fn circle_identity_and_multiplier() {
        let g = Geometry::circle(16, 1).unwrap();
        let one = InteriorSymbol::circle("1", 1, 1.0).unwrap();
        assert!(max_abs(&(op_circle(&one, &g, 0.0).unwrap().matrix - linalg::eye(16))) < 1e-14);
        let f = InteriorSymbol::circle("2 + sin(x)", 1, 1.0).unwrap();
        let m = op_circle(&f, &g, 0.0).unwrap().matrix;
        let x = g.x_nodes();
        let want = linalg::diag_real(&x.iter().map(|x| 2.0 + x.sin()).collect::<Vec<_>>());
        assert!(max_abs(&(m - want)) < 1e-14);
    }

    #[test]
    fn circle_matches_double_loop() {
        let g = Geometry::circle(16, 1).unwrap();
        let a = InteriorSymbol::circle("exp((0,1)*x)*chi(xi)", 1, 1.0).unwrap();
        let m = op_circle(&a, &g, 0.0).unwrap().matrix;
        let n = 16;
        for j in 0..n {
            for l in 0..n {
                let xj = 2.0 * PI * j as f64 / n as f64;
                let xl = 2.0 * PI * l as f64 / n as f64;
                let mut acc = c(0.0, 0.0);
                for i in 0..n {
                    let k = linalg::mode(i, n) as f64;
                    let sym = C64::from_polar(1.0, xj) * (k / (1.0 + k * k).sqrt());
                    acc += C64::from_polar(1.0, k * (xj - xl)) * sym / n as f64;
                }
                assert!((m[(j, l)] - acc).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn mellin_identity_eigenvector_and_unitary() {
        let g = cone(32, BoundaryMode::Periodic);
        let one = ConeSymbolFamily::parse("1", 1, Base::Point).unwrap();
        let m = op_mellin(&one, &g, 0.0, MellinContext::default()).unwrap().matrix;
        assert!(max_abs(&(m - linalg::eye(32))) < 1e-13);
        let pp = ConeSymbolFamily::parse("p", 1, Base::Point).unwrap();
        let m = op_mellin(&pp, &g, 0.0, MellinContext::default()).unwrap().matrix;
        let t = g.t_nodes();
        let freqs = g.frequencies(Axis::T).unwrap();
        for (i, &pk) in freqs.iter().enumerate() {
            let e = crate::linalg::CVec::from_iterator(32, t.iter().map(|t| C64::from_polar(1.0, pk * t)));
            let out = &m * &e;
            let _ = i;
            assert!((out - &e * C64::from(pk)).norm() < 1e-11 * (1.0 + pk.abs()));
        }
        let cay = ConeSymbolFamily::parse("(p - (0,1))/(p + (0,1))", 1, Base::Point).unwrap();
        let m = op_mellin(&cay, &g, 0.0, MellinContext::default()).unwrap().matrix;
        for s in linalg::singular_values(&m) {
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn interval_mode_is_central_restriction() {
        let gi = Geometry::cone(ConeSpec::new(Base::Point, 8.0, 32, BoundaryMode::Interval), 1).unwrap();
        let f = ConeSymbolFamily::parse("1 + ((p - (0,1))/(p + (0,1)) - 1)/(1 + r^2)", 1, Base::Point).unwrap();
        let m = op_mellin(&f, &gi, 0.0, MellinContext::default()).unwrap().matrix;
        let big = Geometry::cone(ConeSpec::new(Base::Point, 16.0, 64, BoundaryMode::Periodic), 1).unwrap();
        let mb = op_mellin(&f, &big, 0.0, MellinContext::default()).unwrap().matrix;
        let sub = mb.view((16, 16), (32, 32)).into_owned();
        assert!(max_abs(&(m - sub)) < 1e-13);
    }

    #[test]
    fn edge_identity_and_block_structure() {
        let cs = ConeSpec::new(Base::Point, 4.0, 16, BoundaryMode::Periodic);
        let g = Geometry::edge(8, cs, 1).unwrap();
        let one = ConeSymbolFamily::parse("1", 1, Base::Point).unwrap();
        assert!(max_abs(&(op_edge(&one, &g, 0.0).unwrap().matrix - linalg::eye(128))) < 1e-13);
        let p = ConeSymbolFamily::parse("chi(eta) + (p - (0,1))/(p + (0,1))", 1, Base::Point).unwrap();
        let a = op_edge(&p, &g, 0.0).unwrap().matrix;
        let f = g.along_matrix(Axis::X, &linalg::unitary_dft(8)).unwrap();
        let b = &f * &a * f.adjoint();
        let xi = g.frequencies(Axis::X).unwrap();
        for k in 0..8 {
            for l in 0..8 {
                let blk = b.view((k * 16, l * 16), (16, 16)).into_owned();
                if k == l {
                    let want = mellin_matrix(&p, &cs, 0.0, MellinContext { x0: 0.0, xi0: xi[k] }).unwrap();
                    assert!(max_abs(&(blk - want)) < 1e-12);
                } else {
                    assert!(max_abs(&blk) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dyadic_ladder_shape() {
        assert_eq!(dyadic_ladder(2), [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn negligible_examples() {
        let g = Geometry::circle(8, 1).unwrap();
        let ladder = dyadic_ladder(6);
        let zero = OperatorFamily::build(&ladder, |v| Ok(DiscretizedOperator::new(g.clone(), v, CMat::zeros(8, 8)))).unwrap();
        let id = OperatorFamily::build(&ladder, |v| Ok(DiscretizedOperator::new(g.clone(), v, linalg::eye(8)))).unwrap();
        for n in [1, 2, 4] {
            assert!(negligible_test(&zero, n, 1e3).unwrap().negligible);
            assert!(!negligible_test(&id, n, 1e3).unwrap().negligible);
        }
        let few = OperatorFamily { samples: ladder[..2].to_vec(), ops: zero.ops[..2].to_vec() };
        assert_eq!(negligible_test(&few, 1, 1e3), Err(Error::TooFewSamples(3)));
    }
}
