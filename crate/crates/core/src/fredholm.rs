//! Ellipticity checks, finite-section kernel/cokernel counting, the winding
//! oracle, quantization of symbol tuples and large-parameter scans.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dsl::Var;
use crate::error::{Error, Result};
use crate::geometry::{bump, Base, Geometry, Kind};
use crate::linalg::{self, CMat, C64};
use crate::quantize::{mellin_assemble, op_mellin, DiscretizedOperator, MellinContext, OperatorFamily};
use crate::symbols::{compat_check, conormal, CompatReport, InteriorSymbol, SymbolTuple, PRINCIPAL_SCALE};

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticConfig {
    pub n_x: usize,
    pub n_sphere: usize,
    pub r_samples: Vec<f64>,
    pub p_max: f64,
    pub n_p: usize,
    /// Minimum admissible smallest singular value.
    pub floor: f64,
    pub large_p_tol: f64,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        EllipticConfig {
            n_x: 64,
            n_sphere: 32,
            r_samples: vec![0.0, 0.1, 1.0, 10.0],
            p_max: 64.0,
            n_p: 513,
            floor: 1e-6,
            large_p_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityReport {
    pub compat: CompatReport,
    pub interior_min: f64,
    pub interior_pass: bool,
    pub conormal_min: f64,
    pub conormal_argmin: f64,
    /// `(p, s_min(conormal(p)))` on the uniform grid.
    pub conormal_profile: Vec<(f64, f64)>,
    pub conormal_pass: bool,
    /// `max ||conormal(+-L) - sigma_0(0, 0; +-e_p)||` for large `L`.
    pub large_p_mismatch: f64,
    pub large_p_pass: bool,
    pub elliptic: bool,
}

fn eval_sigma0(s: &InteriorSymbol, x: f64, r: f64, xi: f64, p: f64, v: f64) -> Result<CMat> {
    let cov: Vec<f64> = s
        .covars
        .iter()
        .map(|c| match c {
            Var::Xi => xi,
            Var::P => p,
            Var::V => v,
            _ => 0.0,
        })
        .collect();
    s.eval(x, r, &cov)
}

/// Interior and conormal ellipticity of a symbol tuple.
pub fn check_elliptic(t: &SymbolTuple, cfg: &EllipticConfig) -> Result<EllipticityReport> {
    let compat = compat_check(t)?;
    let s0 = &t.sigma0;
    let xs: Vec<f64> = if s0.expr.expr.depends_on(Var::X) {
        (0..cfg.n_x).map(|i| 2.0 * PI * i as f64 / cfg.n_x as f64).collect()
    } else {
        vec![0.0]
    };
    let uses_t = s0.expr.expr.depends_on(Var::T);
    let rs: Vec<f64> = cfg.r_samples.iter().copied().filter(|r| !(uses_t && *r == 0.0)).collect();
    let radius = s0.r0.max(1.0);
    let dirs = s0.sphere(cfg.n_sphere, radius);
    let mut interior_min = f64::INFINITY;
    for &x in &xs {
        for &r in &rs {
            for cov in &dirs {
                interior_min = interior_min.min(linalg::smin(&s0.eval(x, r, cov)?));
            }
        }
    }
    let cn = conormal(&t.sigma1);
    let mut profile = Vec::with_capacity(cfg.n_p);
    let (mut cmin, mut arg) = (f64::INFINITY, 0.0);
    for i in 0..cfg.n_p {
        let p = -cfg.p_max + 2.0 * cfg.p_max * i as f64 / (cfg.n_p - 1).max(1) as f64;
        let s = cn.smin(p)?;
        if s < cmin {
            cmin = s;
            arg = p;
        }
        profile.push((p, s));
    }
    let mut large: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let c = cn.at(sign * PRINCIPAL_SCALE)?;
        let s = eval_sigma0(s0, 0.0, 0.0, 0.0, sign * radius, 0.0)?;
        if c.shape() == s.shape() {
            large = large.max(linalg::max_abs(&(c - s)));
        } else {
            large = f64::INFINITY;
        }
    }
    let interior_pass = interior_min >= cfg.floor;
    let conormal_pass = cmin >= cfg.floor;
    Ok(EllipticityReport {
        compat,
        interior_min,
        interior_pass,
        conormal_min: cmin,
        conormal_argmin: arg,
        conormal_profile: profile,
        conormal_pass,
        large_p_mismatch: large,
        large_p_pass: large <= cfg.large_p_tol,
        elliptic: interior_pass && conormal_pass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FredholmConfig {
    /// Relative rank threshold `tau_rank`.
    pub rank_tol: f64,
    pub gap_ratio: f64,
    /// Fraction of the axis at each end forming the boundary layer.
    pub layer: f64,
    /// A near-null vector with at most this boundary mass is genuine.
    pub genuine_max: f64,
    /// A near-null vector with at least this boundary mass is a truncation artifact.
    pub spurious_min: f64,
    /// Smallest retained singular value may shrink by at most this factor per refinement.
    pub collapse_ratio: f64,
}

impl Default for FredholmConfig {
    fn default() -> Self {
        FredholmConfig { rank_tol: 1e-6, gap_ratio: 100.0, layer: 0.125, genuine_max: 0.25, spurious_min: 0.75, collapse_ratio: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionResult {
    pub n: usize,
    pub singular_values: Vec<f64>,
    /// Smallest singular value above the rank threshold.
    pub s_floor: f64,
    pub gap: f64,
    pub kernel: usize,
    pub cokernel: usize,
    /// Near-null vectors that are neither genuine nor boundary artifacts.
    pub ambiguous: usize,
}

impl SectionResult {
    pub fn index(&self) -> i64 {
        self.kernel as i64 - self.cokernel as i64
    }

    pub fn s_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FredholmReport {
    pub sections: Vec<SectionResult>,
    pub determinate: bool,
    pub reason: Option<String>,
    pub index: Option<i64>,
}

impl FredholmReport {
    pub fn kernel(&self) -> Option<usize> {
        self.determinate.then(|| self.sections[0].kernel)
    }

    pub fn cokernel(&self) -> Option<usize> {
        self.determinate.then(|| self.sections[0].cokernel)
    }
}

/// Orthogonal projector onto the boundary layer: the outer `layer` fraction of
/// Fourier modes on a circle, of the `t` range on a cone.
pub fn boundary_projector(g: &Geometry, layer: f64) -> Result<CMat> {
    match &g.kind {
        Kind::Circle { n } => {
            let cut = (0.5 - layer) * *n as f64;
            let mask: Vec<f64> = (0..*n).map(|i| if linalg::mode(i, *n).abs() as f64 > cut { 1.0 } else { 0.0 }).collect();
            let f = linalg::unitary_dft(*n);
            let p = f.adjoint() * linalg::diag_real(&mask) * f;
            Ok(linalg::kron(&p, &linalg::eye(g.q)))
        }
        Kind::Cone(spec) => {
            let cut = spec.t_half * (1.0 - 2.0 * layer);
            let mask: Vec<f64> = g.nodes().iter().map(|nd| if nd.t.abs() > cut { 1.0 } else { 0.0 }).collect();
            Ok(g.multiplier(&mask))
        }
        Kind::Edge { .. } => Err(Error::Precondition("finite sections need a circle or a cone grid".into())),
    }
}

/// Kernel and cokernel counts of one finite section.
pub fn section_at(a: &DiscretizedOperator, cfg: &FredholmConfig) -> Result<SectionResult> {
    let d = linalg::svd(&a.matrix);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let thr = cfg.rank_tol * smax;
    let small: Vec<usize> = (0..d.s.len()).filter(|&i| d.s[i] <= thr).collect();
    let kept = d.s.len() - small.len();
    let s_floor = if kept > 0 { d.s[kept - 1] } else { 0.0 };
    let gap = match small.first() {
        Some(&i) if d.s[i] > 0.0 => s_floor / d.s[i],
        Some(_) => f64::INFINITY,
        None => s_floor / thr.max(f64::MIN_POSITIVE),
    };
    let b = boundary_projector(&a.geometry, cfg.layer)?;
    let mut ambiguous = 0;
    let mut genuine = |q: CMat| -> usize {
        if q.ncols() == 0 {
            return 0;
        }
        let gram = q.adjoint() * &b * &q;
        let mut count = 0;
        for m in linalg::hermitian_eigenvalues(&gram) {
            if m <= cfg.genuine_max {
                count += 1;
            } else if m < cfg.spurious_min {
                ambiguous += 1;
            }
        }
        count
    };
    let cols = |m: &CMat| CMat::from_fn(m.nrows(), small.len(), |i, j| m[(i, small[j])]);
    let kernel = genuine(cols(&d.v));
    let cokernel = genuine(cols(&d.u));
    Ok(SectionResult { n: a.matrix.nrows(), singular_values: d.s, s_floor, gap, kernel, cokernel, ambiguous })
}

/// Finite-section index over a refinement ladder; `build(n)` returns the
/// operator on the size-`n` grid.
pub fn finite_section(
    build: &dyn Fn(usize) -> Result<DiscretizedOperator>,
    sizes: &[usize],
    cfg: &FredholmConfig,
) -> Result<FredholmReport> {
    let mut sections = Vec::with_capacity(sizes.len());
    for &n in sizes {
        sections.push(section_at(&build(n)?, cfg)?);
    }
    let mut reason = None;
    for s in &sections {
        if s.ambiguous > 0 {
            reason = Some(format!("{} near-null vectors straddle the boundary layer at n = {}", s.ambiguous, s.n));
        } else if s.gap < cfg.gap_ratio {
            reason = Some(format!("spectral gap {:.3e} below {} at n = {}", s.gap, cfg.gap_ratio, s.n));
        }
    }
    for w in sections.windows(2) {
        if (w[0].kernel, w[0].cokernel) != (w[1].kernel, w[1].cokernel) {
            reason = Some(format!("counts change between n = {} and n = {}", w[0].n, w[1].n));
        } else if w[1].s_floor < cfg.collapse_ratio * w[0].s_floor {
            reason = Some(format!(
                "smallest retained singular value collapses from {:.3e} to {:.3e}",
                w[0].s_floor, w[1].s_floor
            ));
        }
    }
    if sections.len() < 2 && reason.is_none() {
        reason = Some("stabilization needs at least two sizes".into());
    }
    let determinate = reason.is_none();
    let index = determinate.then(|| sections[0].index());
    Ok(FredholmReport { sections, determinate, reason, index })
}

/// Orientation used by [`winding_oracle`].
pub const ORIENTATION: &str = "argument of det g accumulated along the grid in the given order (p increasing for conormal symbols)";

#[derive(Debug, Clone, PartialEq)]
pub struct WindingReport {
    pub winding: i64,
    pub raw: f64,
    pub residual: f64,
    pub min_modulus: f64,
    pub orientation: &'static str,
}

/// `p = tan(theta)` on `n` uniform angles with endpoints `+-p_end`.
pub fn tangent_grid(n: usize, p_end: f64) -> Vec<f64> {
    let a = p_end.atan();
    (0..n).map(|i| (-a + 2.0 * a * i as f64 / (n - 1) as f64).tan()).collect()
}

fn det(m: &CMat) -> C64 {
    m.clone().determinant()
}

/// Winding number of `det g` along `grid`, refining steps whose argument
/// increment exceeds `pi / 4`.
pub fn winding_oracle(g: &dyn Fn(f64) -> Result<CMat>, grid: &[f64]) -> Result<WindingReport> {
    if grid.len() < 2 {
        return Err(Error::TooFewSamples(2));
    }
    let vals: Vec<C64> = grid.iter().map(|&p| g(p).map(|m| det(&m))).collect::<Result<_>>()?;
    let min_modulus = vals.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min_modulus < 1e-6 {
        return Err(Error::ZeroCrossing(min_modulus));
    }
    let first = vals[0];
    let last = vals[vals.len() - 1];
    if (first - last).norm() > 1e-3 {
        return Err(Error::NonClosing((first - last).norm()));
    }
    let mut total = 0.0;
    for i in 0..grid.len() - 1 {
        total += arg_increment(g, grid[i], grid[i + 1], vals[i], vals[i + 1], 0)?;
    }
    total += (first / last).arg();
    let raw = total / (2.0 * PI);
    let winding = raw.round();
    let residual = (raw - winding).abs();
    if residual > 0.1 {
        return Err(Error::WindingResidual(residual));
    }
    Ok(WindingReport { winding: winding as i64, raw, residual, min_modulus, orientation: ORIENTATION })
}

fn arg_increment(g: &dyn Fn(f64) -> Result<CMat>, a: f64, b: f64, za: C64, zb: C64, depth: u32) -> Result<f64> {
    let d = (zb / za).arg();
    if d.abs() <= PI / 4.0 || depth >= 24 {
        return Ok(d);
    }
    let m = 0.5 * (a + b);
    let zm = det(&g(m)?);
    if zm.norm() < 1e-6 {
        return Err(Error::ZeroCrossing(zm.norm()));
    }
    Ok(arg_increment(g, a, m, za, zm, depth + 1)? + arg_increment(g, m, b, zm, zb, depth + 1)?)
}

/// Evaluates `sigma_0` with covariables `(xi, p, v)` pushed out to radius
/// `r0` when shorter; the origin maps to `r0 e_p`.
fn excised(s: &InteriorSymbol, x: f64, r: f64, xi: f64, p: f64, v: f64) -> Result<CMat> {
    let rho = (xi * xi + p * p + v * v).sqrt();
    let (xi, p, v) = if rho >= s.r0 {
        (xi, p, v)
    } else if rho == 0.0 {
        (0.0, s.r0, 0.0)
    } else {
        let k = s.r0 / rho;
        (xi * k, p * k, v * k)
    };
    eval_sigma0(s, x, r, xi, p, v)
}

/// Cutoff `phi(r)`: 1 for `r <= 1/2`, 0 for `r >= 1`.
pub fn tuple_cutoff(r: f64) -> f64 {
    bump(r, 1.0)
}

fn tuple_geometry(t: &SymbolTuple, g: &Geometry) -> Result<crate::geometry::ConeSpec> {
    let spec = match &g.kind {
        Kind::Cone(c) if c.base == Base::Point => *c,
        _ => return Err(Error::Precondition("symbol tuples are quantized on point-base cones".into())),
    };
    if t.sigma1.base != Base::Point || t.sigma0.q() != g.q || t.sigma1.q() != g.q {
        return Err(Error::Shape("tuple and geometry disagree".into()));
    }
    Ok(spec)
}

/// Operator with symbol tuple `t`:
/// `A = phi op(P|_{r=0}) phi + op(sigma_0) - phi op(sigma_0|_{r=0}) phi`.
pub fn quantize_tuple(t: &SymbolTuple, g: &Geometry, v: f64) -> Result<DiscretizedOperator> {
    let rep = compat_check(t)?;
    if !rep.pass {
        return Err(Error::Compatibility(rep.max_mismatch, rep.tol));
    }
    let spec = tuple_geometry(t, g)?;
    let p0 = t.sigma1.frozen_at_edge(0.0);
    let conormal_part = op_mellin(&p0, g, v, MellinContext::default())?.matrix;
    let s0 = &t.sigma0;
    let full = |tt: f64, p: f64| {
        let r = (-tt).exp();
        excised(s0, 0.0, r, 0.0, p, v * r)
    };
    let edge = |_tt: f64, p: f64| excised(s0, 0.0, 0.0, 0.0, p, 0.0);
    let interior = mellin_assemble(&spec, g.q, &full)?;
    let interior_edge = mellin_assemble(&spec, g.q, &edge)?;
    let phi = g.multiplier(&g.nodes().iter().map(|nd| tuple_cutoff(nd.r)).collect::<Vec<_>>());
    let m = &phi * (conormal_part - interior_edge) * &phi + interior;
    Ok(DiscretizedOperator::new(g.clone(), v, m))
}

/// Symbol-level round trip of [`quantize_tuple`]: the construction's full
/// symbol `phi^2 P_0 + sigma_0 - phi^2 sigma_0|_{r=0}` is compared with the
/// tuple at the principal level and at `r = 0`.
pub fn tuple_symbol_mismatch(t: &SymbolTuple) -> Result<f64> {
    let p0 = t.sigma1.frozen_at_edge(0.0);
    let s0 = &t.sigma0;
    let fam = |p: f64| p0.fiber(&crate::symbols::FamilyArgs { p, ..Default::default() });
    let full = |r: f64, p: f64| -> Result<CMat> {
        let phi2 = tuple_cutoff(r).powi(2);
        Ok((fam(p)? - excised(s0, 0.0, 0.0, 0.0, p, 0.0)?) * C64::from(phi2) + excised(s0, 0.0, r, 0.0, p, 0.0)?)
    };
    let mut worst: f64 = 0.0;
    for i in 0..257 {
        let p = -64.0 + 0.5 * i as f64;
        worst = worst.max(linalg::max_abs(&(full(0.0, p)? - fam(p)?)));
    }
    for r in [0.0, 0.25, 0.75, 2.0] {
        for sign in [1.0, -1.0] {
            let p = sign * PRINCIPAL_SCALE;
            let want = excised(s0, 0.0, r, 0.0, sign * s0.r0.max(1.0), 0.0)?;
            worst = worst.max(linalg::max_abs(&(full(r, p)? - want)));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeParameterReport {
    pub samples: Vec<f64>,
    pub s_min: Vec<f64>,
    pub floor: f64,
    pub bounded: bool,
    pub non_decreasing: bool,
    pub pass: bool,
}

/// Smallest singular values of `A(v)` ordered by `|v|`.
pub fn large_parameter_scan(f: &OperatorFamily, floor: f64) -> LargeParameterReport {
    let mut idx: Vec<usize> = (0..f.samples.len()).collect();
    idx.sort_by(|&a, &b| f.samples[a].abs().partial_cmp(&f.samples[b].abs()).unwrap_or(core::cmp::Ordering::Equal));
    let samples: Vec<f64> = idx.iter().map(|&i| f.samples[i]).collect();
    let s_min: Vec<f64> = idx.iter().map(|&i| linalg::smin(&f.ops[i].matrix)).collect();
    let bounded = s_min.iter().all(|s| *s >= floor);
    let non_decreasing = s_min.windows(2).all(|w| w[1] >= 0.9 * w[0]);
    LargeParameterReport { samples, s_min, floor, bounded, non_decreasing, pass: bounded && non_decreasing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryMode, Center, ConeSpec};
    use crate::quantize::op_circle;
    use crate::symbols::ConeSymbolFamily;

    const G1: &str = "(p-(0,1))/(p+(0,1))";

    fn tuple(sigma0: &str, p: &str) -> SymbolTuple {
        SymbolTuple {
            sigma0: InteriorSymbol::cone(sigma0, 1, 1.0).unwrap(),
            sigma1: ConeSymbolFamily::parse(p, 1, Base::Point).unwrap(),
            tol: 1e-8,
        }
    }

    fn interpolated(g: &str) -> String {
        format!("1 + ({g} - 1)/(1 + r^2)")
    }

    fn cone(n: usize, h: f64) -> Geometry {
        Geometry::cone(ConeSpec::new(Base::Point, n as f64 * h / 2.0, n, BoundaryMode::Interval), 1).unwrap()
    }

    #[test]
    fn ellipticity_examples() {
        let cfg = EllipticConfig::default();
        let r = check_elliptic(&tuple("1", "1"), &cfg).unwrap();
        assert!(r.elliptic && r.compat.pass && r.large_p_pass);
        let r = check_elliptic(&tuple("1", G1), &cfg).unwrap();
        assert!(r.conormal_pass && (r.conormal_min - 1.0).abs() < 1e-12);
        let r = check_elliptic(&tuple("1", "p/(p+(0,1))"), &cfg).unwrap();
        assert!(!r.conormal_pass && !r.elliptic);
        assert!(r.conormal_argmin.abs() < 0.2);
    }

    #[test]
    fn winding_examples() {
        let grid = tangent_grid(2001, 1e5);
        let one = |_p: f64| Ok(linalg::eye(1));
        assert_eq!(winding_oracle(&one, &grid).unwrap().winding, 0);
        let g = |p: f64| Ok(CMat::from_element(1, 1, C64::new(p, -1.0) / C64::new(p, 1.0)));
        assert_eq!(winding_oracle(&g, &grid).unwrap().winding, 1);
        let g2 = |p: f64| Ok(CMat::from_element(1, 1, (C64::new(p, -1.0) / C64::new(p, 1.0)).powi(2)));
        assert_eq!(winding_oracle(&g2, &grid).unwrap().winding, 2);
        let z = |p: f64| Ok(CMat::from_element(1, 1, C64::new(p, 0.0) / C64::new(p, 1.0)));
        assert!(matches!(winding_oracle(&z, &grid), Err(Error::ZeroCrossing(_))));
        let open = |p: f64| Ok(CMat::from_element(1, 1, C64::new(2.0 + p.atan(), 0.0)));
        assert!(matches!(winding_oracle(&open, &grid), Err(Error::NonClosing(_))));
    }

    #[test]
    fn identity_has_index_zero() {
        let build = |n: usize| Ok(DiscretizedOperator::identity(&cone(n, 0.3)));
        let r = finite_section(&build, &[32, 64], &FredholmConfig::default()).unwrap();
        assert!(r.determinate);
        assert_eq!(r.index, Some(0));
        assert_eq!((r.kernel(), r.cokernel()), (Some(0), Some(0)));
    }

    #[test]
    fn cone_index_matches_winding() {
        let cases = [(G1, 1), ("((p-(0,1))/(p+(0,1)))^2", 2), ("(p+(0,1))/(p-(0,1))", -1)];
        for (g, want) in cases {
            let fam = ConeSymbolFamily::parse(&interpolated(g), 1, Base::Point).unwrap();
            let build = |n: usize| op_mellin(&fam, &cone(n, 0.3), 0.0, MellinContext::default());
            let r = finite_section(&build, &[128, 256], &FredholmConfig::default()).unwrap();
            assert!(r.determinate, "{g}: {:?}", r.reason);
            let cn = conormal(&fam);
            let w = winding_oracle(&|p| cn.at(p), &tangent_grid(4001, 1e5)).unwrap();
            assert_eq!(w.winding, want);
            assert_eq!(r.index, Some(w.winding), "{g}");
        }
    }

    #[test]
    fn degenerate_conormal_collapses() {
        let fam = ConeSymbolFamily::parse(&interpolated("p^4/(p^4+1)"), 1, Base::Point).unwrap();
        let build = |n: usize| op_mellin(&fam, &cone(n, 0.3), 0.0, MellinContext::default());
        let r = finite_section(&build, &[128, 256], &FredholmConfig::default()).unwrap();
        assert!(!r.determinate);
        assert!(r.sections[1].s_min() < 1e-3);
        assert!(r.sections[1].s_min() < r.sections[0].s_min());
    }

    #[test]
    fn tuple_one_one_is_identity() {
        let a = quantize_tuple(&tuple("1", "1"), &cone(64, 0.3), 0.0).unwrap();
        assert!(linalg::opnorm(&(a.matrix - linalg::eye(64))) <= 1e-8);
    }

    #[test]
    fn tuple_round_trip() {
        let fam = ConeSymbolFamily::parse(&interpolated(G1), 1, Base::Point).unwrap();
        let t = SymbolTuple::from_family(&fam);
        assert!(tuple_symbol_mismatch(&t).unwrap() <= 1e-6);
        let g = cone(256, 0.05);
        let a = op_mellin(&fam, &g, 0.0, MellinContext::default()).unwrap();
        let b = quantize_tuple(&t, &g, 0.0).unwrap();
        let diff = DiscretizedOperator::new(g.clone(), 0.0, &b.matrix - &a.matrix);
        let band = crate::localization::band_norm(&diff).unwrap();
        assert!(band <= 0.1 * a.norm(), "{band} vs {}", a.norm());
    }

    #[test]
    fn tuple_vanishing_at_edge_stays_away() {
        let g = Geometry::cone(ConeSpec::new(Base::Point, 12.0, 128, BoundaryMode::Interval), 1).unwrap();
        let a = quantize_tuple(&tuple("r^4/(1+r^4)", "0"), &g, 0.0).unwrap();
        let phi = g.cutoff_family(Center::vertex(), &[1e-3]).unwrap().matrix(&g, 0);
        assert!(linalg::opnorm(&(&phi * &a.matrix * &phi)) <= 1e-8);
    }

    #[test]
    fn incompatible_tuple_is_rejected() {
        let t = tuple("2", "1");
        assert!(matches!(quantize_tuple(&t, &cone(32, 0.3), 0.0), Err(Error::Compatibility(_, _))));
    }

    #[test]
    fn large_parameter_examples() {
        let g = Geometry::circle(32, 1).unwrap();
        let ladder = [-64.0, -8.0, 8.0, 16.0, 32.0, 64.0];
        let a = InteriorSymbol::circle("(xi^2+v^2+1)/(xi^2+v^2+2)", 1, 1.0).unwrap();
        let f = OperatorFamily::build(&ladder, |v| op_circle(&a, &g, v)).unwrap();
        let r = large_parameter_scan(&f, 0.5);
        assert!(r.pass);
        for (s, v) in r.s_min.iter().zip(&r.samples) {
            assert!((s - (v * v + 1.0) / (v * v + 2.0)).abs() < 1e-12);
        }
        let z = InteriorSymbol::circle("(xi^2+v^2)/(xi^2+v^2+1)", 1, 1.0).unwrap();
        let f = OperatorFamily::build(&[0.0, 8.0, 16.0], |v| op_circle(&z, &g, v)).unwrap();
        let r = large_parameter_scan(&f, 0.5);
        assert!(!r.pass && r.s_min[0] < 1e-12 && r.s_min[1] > 0.98);
    }
}
