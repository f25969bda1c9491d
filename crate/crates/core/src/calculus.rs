//! Symbol composition with remainder estimates, symbol extraction from
//! translation-invariant operators, infinitesimal operators and adjoints.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dsl::{Expr, SymbolExpr, Var};
use crate::error::{Error, Result};
use crate::geometry::{circle_distance, Axis, BoundaryMode, Center, Geometry, Kind};
use crate::linalg::{self, CMat, CVec, C64};
use crate::quantize::{op_circle, DiscretizedOperator, OperatorSpec, SymbolData};
use crate::symbols::InteriorSymbol;

/// Relative off-diagonal tolerance of [`extract_symbol`].
pub const EXTRACT_TOL: f64 = 1e-8;

/// Frequency-localized probes used to measure composition remainders.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub n_x: usize,
    pub xis: Vec<f64>,
    /// Gaussian width in frequency.
    pub sigma: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { n_x: 256, xis: vec![8.0, 16.0, 32.0, 64.0], sigma: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionResult {
    pub order: usize,
    pub expansion: SymbolExpr,
    pub xis: Vec<f64>,
    pub remainders: Vec<f64>,
    /// Log-log slope of the remainders; `None` when they are at rounding level.
    pub exponent: Option<f64>,
}

/// Truncated expansion `sum_{g < N} (-i)^g / g! d_xi^g h1 * d_x^g h2`.
pub fn composition_expansion(h1: &SymbolExpr, h2: &SymbolExpr, order: usize) -> Result<SymbolExpr> {
    if h1.q != h2.q {
        return Err(Error::Shape(format!("q = {} and q = {}", h1.q, h2.q)));
    }
    let mut sum: Option<Expr> = None;
    let mut coef = C64::new(1.0, 0.0);
    for g in 0..order {
        if g > 0 {
            coef *= C64::new(0.0, -1.0) / g as f64;
        }
        let a = h1.diff_n(Var::Xi, g)?;
        let b = h2.diff_n(Var::X, g)?;
        let term = Expr::mul(Expr::cnum(coef), Expr::mul(a.expr, b.expr));
        sum = Some(match sum {
            None => term,
            Some(s) => Expr::add(s, term),
        });
    }
    let e = sum.unwrap_or_else(|| Expr::num(0.0)).simplify();
    Ok(SymbolExpr::from_expr(e, h1.q))
}

/// Compose two circle symbols to order `order` and measure the remainder
/// `op(h1) op(h2) - op(h)` on Gaussian probes centered at each probe frequency.
pub fn compose_symbols(h1: &SymbolExpr, h2: &SymbolExpr, order: usize, probe: &ProbeConfig) -> Result<CompositionResult> {
    if order == 0 || order > 6 {
        return Err(Error::Precondition(format!("composition order {order} is outside 1..=6")));
    }
    let expansion = composition_expansion(h1, h2, order)?;
    let g = Geometry::circle(probe.n_x, h1.q)?;
    let op = |e: &SymbolExpr| -> Result<CMat> {
        let a = InteriorSymbol::new(e.clone(), 1.0, vec![Var::Xi, Var::V]);
        Ok(op_circle(&a, &g, 0.0)?.matrix)
    };
    let r = op(h1)? * op(h2)? - op(&expansion)?;
    let mut remainders = Vec::with_capacity(probe.xis.len());
    for &xi in &probe.xis {
        let mut worst: f64 = 0.0;
        for c in 0..h1.q {
            let u = frequency_probe(probe.n_x, h1.q, c, xi, probe.sigma);
            worst = worst.max((&r * &u).norm() / u.norm());
        }
        remainders.push(worst);
    }
    let floor = 1e-13;
    let exponent = if remainders.iter().all(|r| *r > floor) && probe.xis.len() > 1 {
        Some(linalg::loglog_slope(&probe.xis, &remainders))
    } else {
        None
    };
    Ok(CompositionResult { order, expansion, xis: probe.xis.clone(), remainders, exponent })
}

/// `u = sum_k exp(-(k - xi)^2 / (2 sigma^2)) e^{ikx}` in component `c`.
fn frequency_probe(n: usize, q: usize, c: usize, xi: f64, sigma: f64) -> CVec {
    let x: Vec<f64> = (0..n).map(|j| 2.0 * core::f64::consts::PI * j as f64 / n as f64).collect();
    let mut u = CVec::zeros(n * q);
    for i in 0..n {
        let k = linalg::mode(i, n) as f64;
        let a = (-(k - xi) * (k - xi) / (2.0 * sigma * sigma)).exp();
        if a < 1e-300 {
            continue;
        }
        for (j, xj) in x.iter().enumerate() {
            u[j * q + c] += C64::from_polar(a, k * xj);
        }
    }
    u
}

/// Diagonal blocks of an operator in the Fourier basis of a periodic axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedSymbol {
    pub axis: Axis,
    pub frequencies: Vec<f64>,
    pub blocks: Vec<CMat>,
    pub off_diagonal: f64,
    pub operator_norm: f64,
    /// `|sup_k ||B_k|| - ||A|||`.
    pub norm_identity_defect: f64,
}

fn axis_len(g: &Geometry, axis: Axis) -> usize {
    match axis {
        Axis::X => g.dims().0,
        Axis::T => g.dims().1,
        Axis::Omega => g.dims().2,
    }
}

fn check_periodic_axis(g: &Geometry, axis: Axis) -> Result<()> {
    let ok = match axis {
        Axis::X => g.has_x(),
        Axis::T => g.cone_spec().is_some_and(|c| c.mode == BoundaryMode::Periodic),
        Axis::Omega => g.dims().2 > 1,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!("no periodic {axis:?} axis to translate along")))
    }
}

/// Coefficient indices grouped by the node index along `axis`.
fn axis_groups(g: &Geometry, axis: Axis) -> Vec<Vec<usize>> {
    let n = axis_len(g, axis);
    let mut groups = vec![Vec::new(); n];
    for idx in 0..g.node_count() {
        let (i, j, l) = g.node_position(idx);
        let a = match axis {
            Axis::X => i,
            Axis::T => j,
            Axis::Omega => l,
        };
        for c in 0..g.q {
            groups[a].push(idx * g.q + c);
        }
    }
    groups
}

/// Conjugate by the unitary DFT along `axis` and return the diagonal blocks;
/// fails if any off-diagonal block exceeds `tol ||A||`.
pub fn extract_symbol(a: &DiscretizedOperator, axis: Axis, tol: f64) -> Result<ExtractedSymbol> {
    let g = &a.geometry;
    check_periodic_axis(g, axis)?;
    let n = axis_len(g, axis);
    let f = g.along_matrix(axis, &linalg::unitary_dft(n))?;
    let b = &f * &a.matrix * f.adjoint();
    let groups = axis_groups(g, axis);
    let norm = a.norm();
    let block = |k: usize, l: usize| CMat::from_fn(groups[k].len(), groups[l].len(), |i, j| b[(groups[k][i], groups[l][j])]);
    let mut off: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            let blk = block(k, l);
            // The Frobenius norm bounds the operator norm from above.
            if blk.norm() > off {
                off = off.max(linalg::opnorm(&blk));
            }
        }
    }
    if off > tol * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NotTranslationInvariant(off));
    }
    let blocks: Vec<CMat> = (0..n).map(|k| block(k, k)).collect();
    let sup = blocks.iter().map(linalg::opnorm).fold(0.0, f64::max);
    Ok(ExtractedSymbol {
        axis,
        frequencies: g.frequencies(axis)?,
        blocks,
        off_diagonal: off,
        operator_norm: norm,
        norm_identity_defect: (sup - norm).abs(),
    })
}

/// Full Kohn–Nirenberg symbol `a(x_j, k) = e^{-ikx_j} (A e^{ik.})(x_j)` of a
/// circle operator, as `q x q` blocks indexed `[j * N + i]` (`i` in FFT order).
pub fn kn_symbol(a: &DiscretizedOperator) -> Result<Vec<CMat>> {
    let n = match a.geometry.kind {
        Kind::Circle { n } => n,
        _ => return Err(Error::Geometry("kn_symbol needs a circle geometry".into())),
    };
    let q = a.geometry.q;
    let x = a.geometry.x_nodes();
    let e = linalg::idft_matrix(n);
    let big = linalg::kron(&e, &linalg::eye(q));
    let ae = &a.matrix * &big;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let k = linalg::mode(i, n) as f64;
            let phase = C64::from_polar(1.0, -k * x[j]);
            out.push(CMat::from_fn(q, q, |r, c| ae[(j * q + r, i * q + c)] * phase));
        }
    }
    Ok(out)
}

/// Coherent-state symbol `<psi, A psi> / <psi, psi>` with
/// `psi = exp(-d(x, x0)^2 / (2 sigma^2)) e^{i xi0 x}` per component.
pub fn coherent_symbol(a: &DiscretizedOperator, x0: f64, xi0: f64, sigma: f64) -> Result<CMat> {
    if !matches!(a.geometry.kind, Kind::Circle { .. }) {
        return Err(Error::Geometry("coherent_symbol needs a circle geometry".into()));
    }
    let q = a.geometry.q;
    let x = a.geometry.x_nodes();
    let psi: Vec<C64> = x
        .iter()
        .map(|&xj| {
            let d = circle_distance(xj, x0);
            C64::from_polar((-d * d / (2.0 * sigma * sigma)).exp(), xi0 * xj)
        })
        .collect();
    let nrm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let mut out = CMat::zeros(q, q);
    for c in 0..q {
        let mut u = CVec::zeros(x.len() * q);
        for (j, z) in psi.iter().enumerate() {
            u[j * q + c] = *z;
        }
        let au = &a.matrix * &u;
        for r in 0..q {
            let mut acc = C64::from(0.0);
            for (j, z) in psi.iter().enumerate() {
                acc += z.conj() * au[j * q + r];
            }
            out[(r, c)] = acc / nrm;
        }
    }
    Ok(out)
}

/// Frozen representative of an operator at a point, with convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct InfinitesimalOperator {
    pub center: Center,
    pub symbol: SymbolData,
    pub operator: DiscretizedOperator,
    pub scales: Vec<f64>,
    /// `||(A - A_z) phi_s||` along the ladder.
    pub diagnostics: Vec<f64>,
    /// `||phi_s (A - A_z)||`, recorded only.
    pub left_diagnostics: Vec<f64>,
    pub monotone: bool,
    pub converged: bool,
    pub tol: f64,
    pub norm: f64,
    pub source_norm: f64,
}

impl InfinitesimalOperator {
    /// Max commutator defect with grid translations along the stratum; zero
    /// when the stratum is a point.
    pub fn translation_defect(&self) -> Result<f64> {
        let g = &self.operator.geometry;
        if !g.has_x() {
            return Ok(0.0);
        }
        let n = g.dims().0;
        let mut worst: f64 = 0.0;
        for m in [1, 3, n / 4] {
            let t = g.translation(m as f64 * g.h_x())?;
            let a = &self.operator.matrix;
            worst = worst.max(linalg::max_abs(&(&t * a - a * &t)));
        }
        Ok(worst)
    }
}

/// Symbol frozen at `z`: `x -> z` on the circle, `(x, r) -> (z, 0)` on a cone
/// or edge.
pub fn freeze(spec: &OperatorSpec, z: Center) -> Result<OperatorSpec> {
    let symbol = match (&spec.symbol, &spec.geometry.kind) {
        (SymbolData::Interior(a), Kind::Circle { .. }) => SymbolData::Interior(a.frozen(z.x, None)?),
        (SymbolData::Family(p), Kind::Cone(_)) | (SymbolData::Family(p), Kind::Edge { .. }) => {
            if z.r != 0.0 {
                return Err(Error::Precondition("cone and edge freezing needs a point with r = 0".into()));
            }
            SymbolData::Family(p.frozen_at_edge(z.x))
        }
        _ => return Err(Error::Geometry("symbol type does not match the geometry".into())),
    };
    Ok(OperatorSpec { symbol, geometry: spec.geometry.clone() })
}

/// Infinitesimal operator at `z` with diagnostics over the cutoff ladder `scales`.
pub fn infinitesimal(spec: &OperatorSpec, z: Center, scales: &[f64], v: f64, tol: f64) -> Result<InfinitesimalOperator> {
    let a = spec.quantize(v)?;
    let frozen = freeze(spec, z)?;
    let az = frozen.quantize(v)?;
    let ladder = spec.geometry.cutoff_family(z, scales)?;
    let d = &a.matrix - &az.matrix;
    let mut diagnostics = Vec::with_capacity(scales.len());
    let mut left = Vec::with_capacity(scales.len());
    for i in 0..ladder.len() {
        let phi = ladder.matrix(&spec.geometry, i);
        diagnostics.push(linalg::opnorm(&(&d * &phi)));
        left.push(linalg::opnorm(&(&phi * &d)));
    }
    let monotone = non_increasing(&diagnostics, 0.1);
    let converged = diagnostics.last().is_some_and(|x| *x <= tol);
    Ok(InfinitesimalOperator {
        center: z,
        symbol: frozen.symbol,
        norm: az.norm(),
        source_norm: a.norm(),
        operator: az,
        scales: scales.to_vec(),
        diagnostics,
        left_diagnostics: left,
        monotone,
        converged,
        tol,
    })
}

/// `x_{i+1} <= (1 + jitter) x_i` up to an absolute floor.
pub fn non_increasing(x: &[f64], jitter: f64) -> bool {
    x.windows(2).all(|w| w[1] <= (1.0 + jitter) * w[0] + 1e-12)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub frozen_identical: bool,
    pub limits: (f64, f64),
    pub tol: f64,
    pub pass: bool,
}

/// Freeze with two cutoff ladders and compare frozen operators and limits.
pub fn consistency_check(spec: &OperatorSpec, z: Center, ladder_a: &[f64], ladder_b: &[f64], v: f64, tol: f64) -> Result<ConsistencyReport> {
    let a = infinitesimal(spec, z, ladder_a, v, tol)?;
    let b = infinitesimal(spec, z, ladder_b, v, tol)?;
    let frozen_identical = a.operator.matrix == b.operator.matrix;
    let la = a.diagnostics.last().copied().unwrap_or(0.0);
    let lb = b.diagnostics.last().copied().unwrap_or(0.0);
    let pass = frozen_identical && (la - lb).abs() <= 2.0 * tol;
    Ok(ConsistencyReport { frozen_identical, limits: (la, lb), tol, pass })
}

/// Adjoint in the weighted inner product. Flat coordinates carry a constant
/// weight, so this is the conjugate transpose.
pub fn adjoint(a: &DiscretizedOperator) -> DiscretizedOperator {
    DiscretizedOperator::new(a.geometry.clone(), a.v, a.matrix.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeSpec;
    use crate::linalg::max_abs;
    use crate::symbols::ConeSymbolFamily;
    use crate::geometry::Base;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(src: &str) -> SymbolExpr {
        SymbolExpr::parse(src, 1).unwrap()
    }

    #[test]
    fn multiplier_on_right_composes_exactly() {
        let probe = ProbeConfig { n_x: 64, xis: vec![4.0, 8.0], sigma: 2.0 };
        for n in 1..=3 {
            let r = compose_symbols(&sym("chi(xi)*(2+cos(x))"), &sym("1/(2+chi(xi))"), n, &probe).unwrap();
            assert!(r.remainders.iter().all(|x| *x < 1e-12), "{:?}", r.remainders);
            assert!(r.exponent.is_none());
        }
    }

    #[test]
    fn xi_independent_left_factor_is_exact_at_order_one() {
        let probe = ProbeConfig { n_x: 64, xis: vec![4.0, 8.0], sigma: 2.0 };
        let r = compose_symbols(&sym("exp((0,1)*x)"), &sym("chi(xi)*sin(x)"), 1, &probe).unwrap();
        assert!(r.remainders.iter().all(|x| *x < 1e-12));
    }

    #[test]
    fn expansion_is_a_taylor_shift() {
        // chi(xi) # e^{ix} = chi(xi + 1) e^{ix}; the expansion is its Taylor series.
        let e = composition_expansion(&sym("chi(xi)"), &sym("exp((0,1)*x)"), 3).unwrap();
        let b = crate::dsl::Bindings::new().with(Var::X, 0.0).with(Var::Xi, 5.0);
        let z = e.eval_scalar(&b).unwrap();
        let chi = |s: f64| s / (1.0 + s * s).sqrt();
        let d1 = (1.0f64 + 25.0).powf(-1.5);
        let d2 = -3.0 * 5.0 * (1.0f64 + 25.0).powf(-2.5);
        let want = chi(5.0) + d1 + d2 / 2.0;
        assert!((z.re - want).abs() < 1e-14 && z.im.abs() < 1e-14);
    }

    #[test]
    fn composition_order_is_checked() {
        assert!(compose_symbols(&sym("1"), &sym("1"), 7, &ProbeConfig::default()).is_err());
        assert!(compose_symbols(&sym("1"), &sym("1"), 0, &ProbeConfig::default()).is_err());
    }

    #[test]
    fn extract_identity_and_multiplier() {
        let g = Geometry::circle(16, 1).unwrap();
        let e = extract_symbol(&DiscretizedOperator::identity(&g), Axis::X, EXTRACT_TOL).unwrap();
        assert!(e.blocks.iter().all(|b| (b[(0, 0)] - C64::from(1.0)).norm() < 1e-14));
        let a = InteriorSymbol::circle("chi(xi) + (0,0.5)", 1, 1.0).unwrap();
        let op = op_circle(&a, &g, 0.0).unwrap();
        let e = extract_symbol(&op, Axis::X, EXTRACT_TOL).unwrap();
        for (b, k) in e.blocks.iter().zip(&e.frequencies) {
            let want = C64::new(k / (1.0 + k * k).sqrt(), 0.5);
            assert!((b[(0, 0)] - want).norm() < 1e-13);
        }
        assert!(e.norm_identity_defect < 1e-10);
    }

    #[test]
    fn extract_recovers_random_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = Geometry::circle(8, 2).unwrap();
        let blocks: Vec<CMat> = (0..8).map(|_| CMat::from_fn(2, 2, |_, _| C64::new(rng.gen(), rng.gen()))).collect();
        let mut d = CMat::zeros(16, 16);
        for (k, b) in blocks.iter().enumerate() {
            d.view_mut((2 * k, 2 * k), (2, 2)).copy_from(b);
        }
        let f = g.along_matrix(Axis::X, &linalg::unitary_dft(8)).unwrap();
        let a = DiscretizedOperator::new(g, 0.0, f.adjoint() * d * f);
        let e = extract_symbol(&a, Axis::X, EXTRACT_TOL).unwrap();
        for (b, want) in e.blocks.iter().zip(&blocks) {
            assert!(max_abs(&(b - want)) < 1e-12);
        }
        assert!(e.norm_identity_defect < 1e-10);
    }

    #[test]
    fn x_dependent_operator_is_rejected() {
        let g = Geometry::circle(16, 1).unwrap();
        let a = InteriorSymbol::circle("cos(x)*chi(xi)", 1, 1.0).unwrap();
        let op = op_circle(&a, &g, 0.0).unwrap();
        assert!(matches!(extract_symbol(&op, Axis::X, EXTRACT_TOL), Err(Error::NotTranslationInvariant(_))));
    }

    #[test]
    fn extract_along_periodic_cone_axis() {
        let spec = ConeSpec::new(Base::Point, 4.0, 16, BoundaryMode::Periodic);
        let g = Geometry::cone(spec, 1).unwrap();
        let p = ConeSymbolFamily::parse("(p-(0,1))/(p+(0,1))", 1, Base::Point).unwrap();
        let op = OperatorSpec::family(p, g).quantize(0.0).unwrap();
        let e = extract_symbol(&op, Axis::T, EXTRACT_TOL).unwrap();
        for (b, p) in e.blocks.iter().zip(&e.frequencies) {
            let want = C64::new(*p, -1.0) / C64::new(*p, 1.0);
            assert!((b[(0, 0)] - want).norm() < 1e-12);
        }
        let spec = ConeSpec::new(Base::Point, 4.0, 16, BoundaryMode::Interval);
        let g = Geometry::cone(spec, 1).unwrap();
        assert!(extract_symbol(&DiscretizedOperator::identity(&g), Axis::T, EXTRACT_TOL).is_err());
    }

    #[test]
    fn kn_symbol_inverts_quantization() {
        let g = Geometry::circle(16, 1).unwrap();
        let a = InteriorSymbol::circle("(2+cos(x))*chi(xi)", 1, 1.0).unwrap();
        let op = op_circle(&a, &g, 0.0).unwrap();
        let s = kn_symbol(&op).unwrap();
        let x = g.x_nodes();
        for j in 0..16 {
            for i in 0..16 {
                let k = linalg::mode(i, 16) as f64;
                let want = (2.0 + x[j].cos()) * k / (1.0 + k * k).sqrt();
                assert!((s[j * 16 + i][(0, 0)] - C64::from(want)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coherent_symbol_of_multiplier() {
        let g = Geometry::circle(64, 1).unwrap();
        let a = InteriorSymbol::circle("chi(xi)", 1, 1.0).unwrap();
        let op = op_circle(&a, &g, 0.0).unwrap();
        let s = coherent_symbol(&op, 1.0, 16.0, 0.5).unwrap()[(0, 0)];
        assert!((s.re - 16.0 / 257.0f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn frozen_circle_symbol() {
        let g = Geometry::circle(128, 1).unwrap();
        let a = InteriorSymbol::circle("(2+cos(x))*chi(xi)", 1, 1.0).unwrap();
        let spec = OperatorSpec::circle(a, g.clone());
        let inf = infinitesimal(&spec, Center::circle(0.0), &[1.0, 0.5], 0.0, 1e-3).unwrap();
        let want = op_circle(&InteriorSymbol::circle("3*chi(xi)", 1, 1.0).unwrap(), &g, 0.0).unwrap();
        assert!(max_abs(&(&inf.operator.matrix - &want.matrix)) < 1e-12);
        assert!(inf.translation_defect().unwrap() < 1e-10);
        assert!(inf.monotone);
    }

    #[test]
    fn frozen_input_is_a_fixed_point() {
        let g = Geometry::circle(128, 1).unwrap();
        let a = InteriorSymbol::circle("chi(xi)", 1, 1.0).unwrap();
        let spec = OperatorSpec::circle(a, g);
        let inf = infinitesimal(&spec, Center::circle(0.0), &[1.0, 0.5, 0.25], 0.0, 1e-3).unwrap();
        assert!(inf.diagnostics.iter().all(|d| *d <= 1e-10));
        let r = consistency_check(&spec, Center::circle(0.0), &[1.0, 0.5], &[0.8, 0.4], 0.0, 1e-3).unwrap();
        assert!(r.pass && r.frozen_identical);
    }

    #[test]
    fn vertex_diagnostics_halve() {
        let spec = ConeSpec::new(Base::Point, 16.0, 128, BoundaryMode::Interval);
        let g = Geometry::cone(spec, 1).unwrap();
        let p = ConeSymbolFamily::parse("1 + r/(1+r)*p^2/(p^2+1)", 1, Base::Point).unwrap();
        let spec = OperatorSpec::family(p, g);
        let scales: Vec<f64> = (2..10).map(|k| 0.5f64.powi(k)).collect();
        let inf = infinitesimal(&spec, Center::vertex(), &scales, 0.0, 1e-2).unwrap();
        assert!(inf.monotone, "{:?}", inf.diagnostics);
        for w in inf.diagnostics.windows(2) {
            let ratio = w[1] / w[0];
            assert!((ratio - 0.5).abs() <= 0.1, "{:?}", inf.diagnostics);
        }
        assert!(inf.norm <= inf.source_norm + 1e-12);
    }

    #[test]
    fn adjoint_examples() {
        let g = Geometry::circle(8, 1).unwrap();
        let id = DiscretizedOperator::identity(&g);
        assert_eq!(adjoint(&id).matrix, id.matrix);
        let f = [C64::new(1.0, 2.0), C64::new(0.0, -1.0)];
        let g2 = Geometry::circle(8, 2).unwrap();
        let m = linalg::diag(&(0..16).map(|i| f[i % 2]).collect::<Vec<_>>());
        let a = DiscretizedOperator::new(g2, 0.0, m);
        let s = adjoint(&a);
        for i in 0..16 {
            assert_eq!(s.matrix[(i, i)], f[i % 2].conj());
        }
        assert_eq!(adjoint(&s).matrix, a.matrix);
    }

    #[test]
    fn adjoint_satisfies_weighted_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let spec = ConeSpec::new(Base::Point, 3.0, 8, BoundaryMode::Interval);
        let g = Geometry::cone(spec, 1).unwrap();
        let n = g.dim();
        let m = CMat::from_fn(n, n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let a = DiscretizedOperator::new(g.clone(), 0.0, m);
        let s = adjoint(&a);
        let (an, sn) = (a.native_matrix(), s.native_matrix());
        for _ in 0..10 {
            let u = CVec::from_fn(n, |_, _| C64::new(rng.gen(), rng.gen()));
            let w = CVec::from_fn(n, |_, _| C64::new(rng.gen(), rng.gen()));
            let lhs = g.native_inner(&(&an * &u), &w);
            let rhs = g.native_inner(&u, &(&sn * &w));
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }
    }
}
