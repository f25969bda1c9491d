//! Local norms, continuity of local families, gluing with partitions of unity
//! and the partition-of-unity norm bound.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::calculus::non_increasing;
use crate::error::{Error, Result};
use crate::fredholm::{finite_section, FredholmConfig, FredholmReport};
use crate::geometry::{bump, Axis, Base, BoundaryMode, Center, ConeSpec, CutoffFamily, Geometry, Kind};
use crate::linalg::{self, CMat};
use crate::quantize::{op_mellin, DiscretizedOperator, MellinContext};
use crate::symbols::{compat_check, FamilyArgs, SymbolTuple};

#[derive(Debug, Clone, PartialEq)]
pub struct LocalNorm {
    pub scales: Vec<f64>,
    /// `||A phi_s||`.
    pub right: Vec<f64>,
    /// `||phi_s A||`, recorded only.
    pub left: Vec<f64>,
    pub limit: f64,
    pub in_ideal: bool,
    pub monotone: bool,
    pub max_asymmetry: f64,
}

/// Norms `||A phi_s||` along a cutoff ladder; the limit is the final value.
pub fn local_norm(a: &DiscretizedOperator, ladder: &CutoffFamily, tol: f64) -> LocalNorm {
    let g = &a.geometry;
    let mut right = Vec::with_capacity(ladder.len());
    let mut left = Vec::with_capacity(ladder.len());
    for i in 0..ladder.len() {
        let phi = ladder.matrix(g, i);
        right.push(linalg::opnorm(&(&a.matrix * &phi)));
        left.push(linalg::opnorm(&(&phi * &a.matrix)));
    }
    let limit = right.last().copied().unwrap_or(0.0);
    let max_asymmetry = right.iter().zip(&left).map(|(r, l)| (r - l).abs()).fold(0.0, f64::max);
    LocalNorm {
        scales: ladder.scales.clone(),
        monotone: non_increasing(&right, 0.1),
        in_ideal: limit <= tol,
        right,
        left,
        limit,
        max_asymmetry,
    }
}

/// Norm of `B` on vectors supported in the node set `nodes`.
pub fn restricted_norm(g: &Geometry, b: &CMat, nodes: &[usize]) -> f64 {
    let cols = g.coefficients_of(nodes);
    if cols.is_empty() {
        return 0.0;
    }
    let m = CMat::from_fn(b.nrows(), cols.len(), |i, j| b[(i, cols[j])]);
    linalg::opnorm(&m)
}

/// Local representatives `A_i` at centers `x_i` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFamily {
    pub geometry: Geometry,
    pub centers: Vec<Center>,
    pub ops: Vec<CMat>,
}

impl LocalFamily {
    pub fn new(geometry: Geometry, centers: Vec<Center>, ops: Vec<CMat>) -> Result<Self> {
        let n = geometry.dim();
        if centers.len() != ops.len() || ops.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::Shape("centers and operators disagree with the grid".into()));
        }
        Ok(LocalFamily { geometry, centers, ops })
    }

    fn neighborhood(&self, i: usize, radius: f64) -> Vec<usize> {
        let c = self.centers[i];
        (0..self.geometry.node_count())
            .filter(|&k| c.distance(&self.geometry, &self.geometry.node(k)) <= radius)
            .collect()
    }

    /// Smallest radius whose balls around the centers cover every node.
    pub fn covering_radius(&self) -> f64 {
        let g = &self.geometry;
        (0..g.node_count())
            .map(|k| {
                let nd = g.node(k);
                self.centers.iter().map(|c| c.distance(g, &nd)).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// `max_{i,j} ||A_i - A_j||` restricted to `U_i cap U_j` for balls of the given radii.
    pub fn witness(&self, radii: &[f64]) -> f64 {
        let hoods: Vec<Vec<usize>> = (0..self.centers.len()).map(|i| self.neighborhood(i, radii[i])).collect();
        let mut worst: f64 = 0.0;
        for i in 0..self.centers.len() {
            for j in i + 1..self.centers.len() {
                let overlap: Vec<usize> = hoods[i].iter().copied().filter(|k| hoods[j].binary_search(k).is_ok()).collect();
                if overlap.is_empty() {
                    continue;
                }
                worst = worst.max(restricted_norm(&self.geometry, &(&self.ops[i] - &self.ops[j]), &overlap));
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonVerdict {
    pub eps: f64,
    /// Common neighborhood radius, when one satisfying the bound exists.
    pub radius: Option<f64>,
    pub witness: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub covering_radius: f64,
    pub verdicts: Vec<EpsilonVerdict>,
}

/// Continuity test over an epsilon ladder. With `given` radii the bound is
/// checked as is; otherwise the largest common radius (down to the covering
/// radius) satisfying it is searched.
pub fn continuity_check(f: &LocalFamily, eps: &[f64], given: Option<&[f64]>) -> ContinuityReport {
    let cover = f.covering_radius();
    let m = f.centers.len();
    let verdicts = match given {
        Some(r) => {
            let w = f.witness(r);
            eps.iter().map(|&e| EpsilonVerdict { eps: e, radius: r.first().copied(), witness: w, pass: w <= e }).collect()
        }
        None => {
            let mut cands = Vec::new();
            let mut r = f.geometry_diameter();
            while r > cover {
                cands.push(r);
                r *= 0.8;
            }
            cands.push(cover);
            cands.retain(|&r| f.overlaps_connected(r));
            let witnesses: Vec<f64> = cands.iter().map(|&r| f.witness(&vec![r; m])).collect();
            eps.iter()
                .map(|&e| {
                    let hit = cands.iter().zip(&witnesses).find(|(_, w)| **w <= e);
                    match hit {
                        Some((r, w)) => EpsilonVerdict { eps: e, radius: Some(*r), witness: *w, pass: true },
                        None => EpsilonVerdict {
                            eps: e,
                            radius: None,
                            witness: witnesses.last().copied().unwrap_or(0.0),
                            pass: false,
                        },
                    }
                })
                .collect()
        }
    };
    ContinuityReport { covering_radius: cover, verdicts }
}

impl LocalFamily {
    /// Whether balls of a common radius form a connected overlap graph.
    pub fn overlaps_connected(&self, radius: f64) -> bool {
        let m = self.centers.len();
        if m == 0 {
            return false;
        }
        let hoods: Vec<Vec<usize>> = (0..m).map(|i| self.neighborhood(i, radius)).collect();
        let mut seen = vec![false; m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..m {
                if !seen[j] && hoods[i].iter().any(|k| hoods[j].binary_search(k).is_ok()) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    fn geometry_diameter(&self) -> f64 {
        let g = &self.geometry;
        let mut d: f64 = 0.0;
        for c in &self.centers {
            for k in 0..g.node_count() {
                d = d.max(c.distance(g, &g.node(k)));
            }
        }
        d
    }
}

/// Nonnegative node functions summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    pub values: Vec<Vec<f64>>,
    pub radius: f64,
}

impl PartitionOfUnity {
    /// Normalized bumps of support `radius` around each center.
    pub fn around(g: &Geometry, centers: &[Center], radius: f64) -> Result<Self> {
        let nodes = g.nodes();
        let raw: Vec<Vec<f64>> = centers
            .iter()
            .map(|c| nodes.iter().map(|nd| bump(c.distance(g, nd), radius)).collect())
            .collect();
        let mut values = raw.clone();
        for k in 0..nodes.len() {
            let s: f64 = raw.iter().map(|v| v[k]).sum();
            if s <= 0.0 {
                return Err(Error::Precondition(format!("node {k} is not covered at radius {radius}")));
            }
            for v in values.iter_mut() {
                v[k] /= s;
            }
        }
        Ok(PartitionOfUnity { values, radius })
    }

    /// Max deviation of the pointwise sum from one.
    pub fn sum_defect(&self) -> f64 {
        let n = self.values.first().map(|v| v.len()).unwrap_or(0);
        (0..n)
            .map(|k| (self.values.iter().map(|v| v[k]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Whether each function vanishes outside the ball of its center.
    pub fn subordinate(&self, g: &Geometry, centers: &[Center]) -> bool {
        self.values.iter().zip(centers).all(|(v, c)| {
            v.iter().enumerate().all(|(k, x)| *x == 0.0 || c.distance(g, &g.node(k)) <= self.radius)
        })
    }
}

/// `sum_i phi_i A_i`.
pub fn glue(f: &LocalFamily, p: &PartitionOfUnity) -> Result<DiscretizedOperator> {
    if p.values.len() != f.ops.len() {
        return Err(Error::Precondition("partition and family have different sizes".into()));
    }
    let g = &f.geometry;
    let n = g.dim();
    let mut out = CMat::zeros(n, n);
    for (phi, a) in p.values.iter().zip(&f.ops) {
        out += g.multiplier(phi) * a;
    }
    Ok(DiscretizedOperator::new(g.clone(), 0.0, out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionBound {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub violated: bool,
}

/// `||sum_j sqrt(f_j) A_j sqrt(f_j)|| <= [max_x sum_j f_j(x)] max_j ||A_j||_{supp f_j}`.
pub fn partition_bound_check(g: &Geometry, f: &[Vec<f64>], a: &[CMat]) -> Result<PartitionBound> {
    if f.len() != a.len() || f.iter().any(|v| v.len() != g.node_count()) {
        return Err(Error::Shape("functions and operators disagree".into()));
    }
    for v in f {
        if let Some(x) = v.iter().find(|x| **x < 0.0) {
            return Err(Error::NegativeWeight(*x));
        }
    }
    let n = g.dim();
    let mut sum = CMat::zeros(n, n);
    let mut worst: f64 = 0.0;
    for (fj, aj) in f.iter().zip(a) {
        let s = g.multiplier(&fj.iter().map(|x| x.sqrt()).collect::<Vec<_>>());
        sum += &s * aj * &s;
        let supp: Vec<usize> = (0..fj.len()).filter(|&k| fj[k] > 0.0).collect();
        worst = worst.max(restricted_norm(g, aj, &supp));
    }
    let cover = (0..g.node_count()).map(|k| f.iter().map(|v| v[k]).sum::<f64>()).fold(0.0, f64::max);
    let lhs = linalg::opnorm(&sum);
    let rhs = cover * worst;
    Ok(PartitionBound { lhs, rhs, slack: rhs - lhs, violated: lhs > rhs + 1e-12 * rhs.max(1.0) })
}

/// Norm of `A` restricted to the frequency band `N/8 <= |k| <= N/4` of the
/// main axis: a computable surrogate for the norm modulo compact operators.
pub fn band_norm(a: &DiscretizedOperator) -> Result<f64> {
    let g = &a.geometry;
    let axis = match g.kind {
        Kind::Circle { .. } | Kind::Edge { .. } => Axis::X,
        Kind::Cone(_) => Axis::T,
    };
    let n = match axis {
        Axis::X => g.dims().0,
        _ => g.dims().1,
    };
    let mask: Vec<f64> = (0..n)
        .map(|i| {
            let k = linalg::mode(i, n).unsigned_abs() as usize;
            if 8 * k >= n && 4 * k <= n { 1.0 } else { 0.0 }
        })
        .collect();
    let f = linalg::unitary_dft(n);
    let pi = g.along_matrix(axis, &(f.adjoint() * linalg::diag_real(&mask) * f))?;
    Ok(linalg::opnorm(&(&a.matrix * pi)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalProxy {
    pub center: Center,
    pub s_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FredholmVsLocal {
    pub local: Vec<LocalProxy>,
    pub floor: f64,
    pub local_invertible: bool,
    pub global: FredholmReport,
    pub agree: bool,
}

/// Local invertibility proxies of a compatible point-base tuple against the
/// global finite-section verdict for `op_mellin(sigma_1)` on interval grids
/// of step `h`. The proxy at a center is the smallest singular value of the
/// operator frozen there: at the vertex the conormal symbol over the modes
/// `p_k` of the periodic grid of the largest size, at `r > 0` the interior
/// symbol over the unit sphere of covariables.
pub fn fredholm_vs_local(
    t: &SymbolTuple,
    centers: &[Center],
    sizes: &[usize],
    h: f64,
    cfg: &FredholmConfig,
) -> Result<FredholmVsLocal> {
    let rep = compat_check(t)?;
    if !rep.pass {
        return Err(Error::Compatibility(rep.max_mismatch, rep.tol));
    }
    let fam = &t.sigma1;
    let q = fam.q();
    let floor = 1e-3;
    let n_max = sizes.iter().copied().max().unwrap_or(0);
    let periodic = Geometry::cone(ConeSpec::new(Base::Point, n_max as f64 * h / 2.0, n_max, BoundaryMode::Periodic), q)?;
    let modes = periodic.frequencies(Axis::T)?;
    let s0 = &t.sigma0;
    let dirs = s0.sphere(32, s0.r0.max(1.0));
    let mut local = Vec::with_capacity(centers.len());
    for &c in centers {
        let mut s_min = f64::INFINITY;
        if c.r == 0.0 {
            for &p in &modes {
                let m = fam.fiber(&FamilyArgs { x: c.x, p, ..Default::default() })?;
                s_min = s_min.min(linalg::smin(&m));
            }
        } else {
            for cov in &dirs {
                s_min = s_min.min(linalg::smin(&s0.eval(c.x, c.r, cov)?));
            }
        }
        local.push(LocalProxy { center: c, s_min });
    }
    let local_invertible = local.iter().all(|l| l.s_min >= floor);
    let build = |n: usize| {
        let g = Geometry::cone(ConeSpec::new(Base::Point, n as f64 * h / 2.0, n, BoundaryMode::Interval), q)?;
        op_mellin(fam, &g, 0.0, MellinContext::default())
    };
    let global = finite_section(&build, sizes, cfg)?;
    let agree = local_invertible == global.determinate;
    Ok(FredholmVsLocal { local, floor, local_invertible, global, agree })
}
