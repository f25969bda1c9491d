//! Model geometries, weighted L2 structure, discrete transforms and the
//! translation/dilation group actions.
//!
//! Every geometry is laid out on a four-axis grid `(x, t, omega, fiber)` with
//! flat index `((i * n_t + j) * n_omega + l) * q + c`. Axes that a variant does
//! not have are of length one. Cone values are stored in flat coordinates,
//! i.e. after the isometry `(W u)(t, omega) = e^{-(n+1) t / 2} u(e^{-t}, omega)`,
//! so operator norms and adjoints are the plain Euclidean ones.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::{Euclid, Float};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Base {
    Point,
    Circle(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    Periodic,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSpec {
    pub base: Base,
    pub t_half: f64,
    pub n_t: usize,
    pub mode: BoundaryMode,
}

impl ConeSpec {
    pub fn new(base: Base, t_half: f64, n_t: usize, mode: BoundaryMode) -> Self {
        ConeSpec { base, t_half, n_t, mode }
    }

    pub fn h_t(&self) -> f64 {
        2.0 * self.t_half / self.n_t as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Circle { n: usize },
    Cone(ConeSpec),
    Edge { n_x: usize, cone: ConeSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Circle coordinate of a circle geometry, or edge coordinate.
    X,
    /// Log-radial coordinate of a cone.
    T,
    /// Base circle coordinate.
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Coordinates of one grid node. Absent coordinates are zero; `r` is
/// `e^{-t}` on cone axes and zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub t: f64,
    pub r: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub kind: Kind,
    pub q: usize,
}

fn check_even(name: &str, n: usize) -> Result<()> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::Geometry(format!("{name} = {n} must be even and at least 8")));
    }
    Ok(())
}

fn check_cone(c: &ConeSpec) -> Result<()> {
    check_even("N_t", c.n_t)?;
    if !(c.t_half > 0.0) || !c.t_half.is_finite() {
        return Err(Error::Geometry(format!("T = {} must be positive", c.t_half)));
    }
    if let Base::Circle(n) = c.base {
        check_even("N_omega", n)?;
    }
    Ok(())
}

impl Geometry {
    pub fn circle(n: usize, q: usize) -> Result<Self> {
        check_even("N_x", n)?;
        Self::with_q(Kind::Circle { n }, q)
    }

    pub fn cone(spec: ConeSpec, q: usize) -> Result<Self> {
        check_cone(&spec)?;
        Self::with_q(Kind::Cone(spec), q)
    }

    pub fn edge(n_x: usize, cone: ConeSpec, q: usize) -> Result<Self> {
        check_even("N_x", n_x)?;
        check_cone(&cone)?;
        Self::with_q(Kind::Edge { n_x, cone }, q)
    }

    pub fn build(kind: Kind, q: usize) -> Result<Self> {
        match kind {
            Kind::Circle { n } => Self::circle(n, q),
            Kind::Cone(c) => Self::cone(c, q),
            Kind::Edge { n_x, cone } => Self::edge(n_x, cone, q),
        }
    }

    fn with_q(kind: Kind, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::Geometry("fiber dimension q must be at least 1".into()));
        }
        Ok(Geometry { kind, q })
    }

    pub fn cone_spec(&self) -> Option<&ConeSpec> {
        match &self.kind {
            Kind::Circle { .. } => None,
            Kind::Cone(c) => Some(c),
            Kind::Edge { cone, .. } => Some(cone),
        }
    }

    /// Axis lengths `(n_x, n_t, n_omega)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        match &self.kind {
            Kind::Circle { n } => (*n, 1, 1),
            Kind::Cone(c) => (1, c.n_t, base_len(c.base)),
            Kind::Edge { n_x, cone } => (*n_x, cone.n_t, base_len(cone.base)),
        }
    }

    pub fn node_count(&self) -> usize {
        let (a, b, c) = self.dims();
        a * b * c
    }

    pub fn dim(&self) -> usize {
        self.node_count() * self.q
    }

    /// Dimension `n` of the cone base (0 for a point, 1 for a circle).
    pub fn base_dim(&self) -> usize {
        match self.cone_spec().map(|c| c.base) {
            Some(Base::Circle(_)) => 1,
            _ => 0,
        }
    }

    pub fn weight_exponent(&self) -> f64 {
        (self.base_dim() as f64 + 1.0) / 2.0
    }

    pub fn h_x(&self) -> f64 {
        2.0 * PI / self.dims().0 as f64
    }

    pub fn h_t(&self) -> f64 {
        self.cone_spec().map(|c| c.h_t()).unwrap_or(1.0)
    }

    pub fn h_omega(&self) -> f64 {
        match self.cone_spec().map(|c| c.base) {
            Some(Base::Circle(n)) => 2.0 * PI / n as f64,
            _ => 1.0,
        }
    }

    pub fn has_x(&self) -> bool {
        !matches!(self.kind, Kind::Cone(_))
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        if !self.has_x() {
            return alloc::vec![0.0];
        }
        let n = self.dims().0;
        (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        match self.cone_spec() {
            None => alloc::vec![0.0],
            Some(c) => (0..c.n_t).map(|j| -c.t_half + j as f64 * c.h_t()).collect(),
        }
    }

    pub fn omega_nodes(&self) -> Vec<f64> {
        let nb = self.dims().2;
        if nb == 1 {
            return alloc::vec![0.0];
        }
        (0..nb).map(|l| 2.0 * PI * l as f64 / nb as f64).collect()
    }

    /// Node index of grid position `(i, j, l)`.
    pub fn node_index(&self, i: usize, j: usize, l: usize) -> usize {
        let (_, nt, nb) = self.dims();
        (i * nt + j) * nb + l
    }

    pub fn node_position(&self, idx: usize) -> (usize, usize, usize) {
        let (_, nt, nb) = self.dims();
        (idx / (nt * nb), (idx / nb) % nt, idx % nb)
    }

    pub fn node(&self, idx: usize) -> Node {
        let (i, j, l) = self.node_position(idx);
        let x = if self.has_x() { 2.0 * PI * i as f64 / self.dims().0 as f64 } else { 0.0 };
        let (t, r) = match self.cone_spec() {
            Some(c) => {
                let t = -c.t_half + j as f64 * c.h_t();
                (t, (-t).exp())
            }
            None => (0.0, 0.0),
        };
        let nb = self.dims().2;
        let omega = if nb > 1 { 2.0 * PI * l as f64 / nb as f64 } else { 0.0 };
        Node { x, t, r, omega }
    }

    pub fn nodes(&self) -> Vec<Node> {
        (0..self.node_count()).map(|i| self.node(i)).collect()
    }

    /// Uniform quadrature weight of the flat (cylinder) coordinates.
    pub fn flat_weight(&self) -> f64 {
        let hx = if self.has_x() { self.h_x() } else { 1.0 };
        let ht = if self.cone_spec().is_some() { self.h_t() } else { 1.0 };
        hx * ht * self.h_omega()
    }

    /// Native quadrature weights per node, realizing `r^n dr dvol_Omega dx`.
    pub fn native_weights(&self) -> Vec<f64> {
        let a = self.base_dim() as f64 + 1.0;
        let w = self.flat_weight();
        self.nodes()
            .iter()
            .map(|nd| if self.cone_spec().is_some() { w * (-a * nd.t).exp() } else { w })
            .collect()
    }

    /// Diagonal of the isometry `W` per node: `e^{-(n+1) t / 2}`.
    pub fn w_factors(&self) -> Vec<f64> {
        let a = self.weight_exponent();
        self.nodes()
            .iter()
            .map(|nd| if self.cone_spec().is_some() { (-a * nd.t).exp() } else { 1.0 })
            .collect()
    }

    /// Expand a per-node vector to per-coefficient (repeat across the fiber).
    pub fn per_coefficient(&self, per_node: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for v in per_node {
            for _ in 0..self.q {
                out.push(*v);
            }
        }
        out
    }

    /// Maps native samples to flat coordinates.
    pub fn to_flat(&self, u: &CVec) -> CVec {
        let f = self.per_coefficient(&self.w_factors());
        CVec::from_fn(u.len(), |i, _| u[i] * f[i])
    }

    pub fn from_flat(&self, v: &CVec) -> CVec {
        let f = self.per_coefficient(&self.w_factors());
        CVec::from_fn(v.len(), |i, _| v[i] / f[i])
    }

    /// Weighted native norm.
    pub fn native_norm(&self, u: &CVec) -> f64 {
        let w = self.per_coefficient(&self.native_weights());
        u.iter().zip(&w).map(|(z, w)| w * z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn native_inner(&self, u: &CVec, v: &CVec) -> C64 {
        let w = self.per_coefficient(&self.native_weights());
        u.iter().zip(v.iter()).zip(&w).map(|((a, b), w)| b.conj() * a * *w).sum()
    }

    pub fn flat_norm(&self, v: &CVec) -> f64 {
        (self.flat_weight() * v.norm_squared()).sqrt()
    }

    fn axis_len(&self, axis: Axis) -> Result<usize> {
        let (nx, nt, nb) = self.dims();
        match axis {
            Axis::X if self.has_x() => Ok(nx),
            Axis::T if self.cone_spec().is_some() => Ok(nt),
            Axis::Omega if nb > 1 => Ok(nb),
            _ => Err(Error::Geometry(format!("geometry has no {axis:?} axis"))),
        }
    }

    /// Apply an `n x n` matrix along one axis of a flat coefficient vector.
    pub fn apply_along(&self, v: &CVec, axis: Axis, m: &CMat) -> Result<CVec> {
        let n = self.axis_len(axis)?;
        if v.len() != self.dim() || m.nrows() != n || m.ncols() != n {
            return Err(Error::Shape(format!("vector of length {} on axis of length {n}", v.len())));
        }
        let (nx, nt, nb) = self.dims();
        let q = self.q;
        let mut out = CVec::zeros(v.len());
        let lens = [nx, nt, nb];
        let a = match axis {
            Axis::X => 0,
            Axis::T => 1,
            Axis::Omega => 2,
        };
        let stride = [nt * nb * q, nb * q, q][a];
        for i in 0..nx {
            for j in 0..nt {
                for l in 0..nb {
                    let pos = [i, j, l];
                    if pos[a] != 0 {
                        continue;
                    }
                    let base = ((i * nt + j) * nb + l) * q;
                    for cq in 0..q {
                        for r in 0..lens[a] {
                            let mut acc = C64::from(0.0);
                            for s in 0..lens[a] {
                                acc += m[(r, s)] * v[base + s * stride + cq];
                            }
                            out[base + r * stride + cq] = acc;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Full matrix of `m` acting along `axis`, identity on the other axes.
    pub fn along_matrix(&self, axis: Axis, m: &CMat) -> Result<CMat> {
        let n = self.axis_len(axis)?;
        if m.nrows() != n {
            return Err(Error::Shape(format!("matrix of size {} on axis of length {n}", m.nrows())));
        }
        let (nx, nt, nb) = self.dims();
        let (before, after) = match axis {
            Axis::X => (1, nt * nb * self.q),
            Axis::T => (nx, nb * self.q),
            Axis::Omega => (nx * nt, self.q),
        };
        Ok(linalg::kron(&linalg::kron(&linalg::eye(before), m), &linalg::eye(after)))
    }

    /// DFT along a periodic axis of a flat vector: `u_hat(k) = (1/N) sum_j u_j e^{-i k x_j}`
    /// with `x_j = 2 pi j / N` the normalized axis coordinate.
    pub fn dft(&self, v: &CVec, axis: Axis, dir: Direction) -> Result<CVec> {
        let n = self.axis_len(axis)?;
        let m = match dir {
            Direction::Forward => linalg::dft_matrix(n),
            Direction::Inverse => linalg::idft_matrix(n),
        };
        self.apply_along(v, axis, &m)
    }

    /// Physical frequencies of an axis in FFT order: integer modes on circles,
    /// `p_k = pi k / T` on the cone axis.
    pub fn frequencies(&self, axis: Axis) -> Result<Vec<f64>> {
        let n = self.axis_len(axis)?;
        let scale = match axis {
            Axis::T => PI / self.cone_spec().map(|c| c.t_half).unwrap_or(PI),
            _ => 1.0,
        };
        Ok((0..n).map(|i| linalg::mode(i, n) as f64 * scale).collect())
    }

    /// Dilation `kappa_lambda` in flat coordinates: a circular shift of the
    /// cone axis by `k = log(lambda) / h_t` nodes.
    pub fn kappa(&self, lambda: f64) -> Result<CMat> {
        let c = self
            .cone_spec()
            .ok_or_else(|| Error::Geometry("dilations need a cone axis".into()))?;
        if c.mode != BoundaryMode::Periodic || !(lambda > 0.0) {
            return Err(Error::InadmissibleScale(lambda));
        }
        let kf = lambda.ln() / c.h_t();
        let k = kf.round();
        if (kf - k).abs() > 1e-9 * kf.abs().max(1.0) {
            return Err(Error::InadmissibleScale(lambda));
        }
        let shift = shift_matrix(c.n_t, -(k as i64));
        self.along_matrix(Axis::T, &shift)
    }

    /// Translation `(T_tau u)(x) = u(x + tau)` along the circle/edge axis.
    pub fn translation(&self, tau: f64) -> Result<CMat> {
        if !self.has_x() {
            return Err(Error::Geometry("translations need a circle or edge axis".into()));
        }
        let h = self.h_x();
        let m = (tau / h).round();
        if (tau / h - m).abs() > 1e-9 {
            return Err(Error::NonGridShift(tau));
        }
        let n = self.dims().0;
        self.along_matrix(Axis::X, &shift_matrix(n, m as i64))
    }

    /// Edge dilation centered at grid point `center`: the cone dilation by
    /// `e^{k h_t}` combined with the index map `i -> center + mu (i - center)`
    /// on the edge circle, `mu` a unit modulo `N_x`.
    pub fn edge_dilation(&self, k: i64, mu: i64, center: usize) -> Result<CMat> {
        let (nx, _, _) = self.dims();
        if !matches!(self.kind, Kind::Edge { .. }) {
            return Err(Error::Geometry("edge dilation needs an edge geometry".into()));
        }
        if gcd(mu.rem_euclid(nx as i64), nx as i64) != 1 {
            return Err(Error::InadmissibleScale(mu as f64));
        }
        let lambda = (k as f64 * self.h_t()).exp();
        let kap = self.kappa(lambda)?;
        let c = center as i64;
        let mut p = CMat::zeros(nx, nx);
        for i in 0..nx as i64 {
            let src = (c + mu * (i - c)).rem_euclid(nx as i64) as usize;
            p[(i as usize, src)] = C64::from(1.0);
        }
        Ok(self.along_matrix(Axis::X, &p)? * kap)
    }

    /// Cutoff ladder around `center` with scales `s_0 > s_1 > ...`.
    pub fn cutoff_family(&self, center: Center, scales: &[f64]) -> Result<CutoffFamily> {
        if scales.is_empty() {
            return Err(Error::Cutoff("empty scale ladder".into()));
        }
        for w in scales.windows(2) {
            if !(w[1] <= 0.5 * w[0]) {
                return Err(Error::Cutoff(format!(
                    "scales {} and {} do not nest (need s_next <= s / 2)",
                    w[0], w[1]
                )));
            }
        }
        let floor = self.resolution_floor(&center);
        let last = scales[scales.len() - 1];
        if last < floor {
            return Err(Error::Cutoff(format!("scale {last} is below grid resolution {floor}")));
        }
        let dist: Vec<f64> = self.nodes().iter().map(|nd| center.distance(self, nd)).collect();
        let bumps = scales
            .iter()
            .map(|&s| dist.iter().map(|&d| bump(d, s)).collect())
            .collect();
        Ok(CutoffFamily { center, scales: scales.to_vec(), values: bumps })
    }

    fn resolution_floor(&self, center: &Center) -> f64 {
        let mut floor: f64 = 0.0;
        if self.has_x() {
            floor = floor.max(3.0 * self.h_x());
        }
        if let Some(c) = self.cone_spec() {
            if center.r == 0.0 {
                floor = floor.max((-c.t_half + 3.0 * c.h_t()).exp());
            } else {
                floor = floor.max(3.0 * c.h_t() * center.r);
            }
        }
        floor
    }

    /// Multiplication by a per-node function in flat coordinates.
    pub fn multiplier(&self, per_node: &[f64]) -> CMat {
        linalg::diag_real(&self.per_coefficient(per_node))
    }

    /// Indices of coefficients whose node lies in `nodes`.
    pub fn coefficients_of(&self, nodes: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for &n in nodes {
            for c in 0..self.q {
                out.push(n * self.q + c);
            }
        }
        out
    }
}

fn base_len(b: Base) -> usize {
    match b {
        Base::Point => 1,
        Base::Circle(n) => n,
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `(S u)_j = u_{j + m mod n}`.
pub fn shift_matrix(n: usize, m: i64) -> CMat {
    let mut s = CMat::zeros(n, n);
    for j in 0..n {
        s[(j, (j as i64 + m).rem_euclid(n as i64) as usize)] = C64::from(1.0);
    }
    s
}

/// Plateau bump: 1 for `d <= s/2`, 0 for `d >= s`, smooth in between.
pub fn bump(d: f64, s: f64) -> f64 {
    let a = 0.5 * s;
    if d <= a {
        return 1.0;
    }
    if d >= s {
        return 0.0;
    }
    let y = (d - a) / (s - a);
    (1.0 - 1.0 / (1.0 - y * y)).exp()
}

/// Periodic distance on the unit circle.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = Euclid::rem_euclid(&(a - b), &(2.0 * PI));
    d.min(2.0 * PI - d)
}

/// Center of a cutoff family. Coordinates absent from a geometry are ignored;
/// `r = 0` on a cone axis denotes the vertex (edge stratum).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Center {
    pub x: f64,
    pub r: f64,
    pub omega: f64,
}

impl Center {
    pub fn circle(x: f64) -> Self {
        Center { x, r: 0.0, omega: 0.0 }
    }

    pub fn vertex() -> Self {
        Center { x: 0.0, r: 0.0, omega: 0.0 }
    }

    pub fn edge(x: f64) -> Self {
        Center { x, r: 0.0, omega: 0.0 }
    }

    pub fn distance(&self, g: &Geometry, nd: &Node) -> f64 {
        let mut d2 = 0.0;
        if g.has_x() {
            let dx = circle_distance(nd.x, self.x);
            d2 += dx * dx;
        }
        if g.cone_spec().is_some() {
            let dr = nd.r - self.r;
            d2 += dr * dr;
            if g.dims().2 > 1 && self.r > 0.0 {
                let dw = self.r * circle_distance(nd.omega, self.omega);
                d2 += dw * dw;
            }
        }
        d2.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffFamily {
    pub center: Center,
    pub scales: Vec<f64>,
    /// Per-scale, per-node bump values.
    pub values: Vec<Vec<f64>>,
}

impl CutoffFamily {
    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn matrix(&self, g: &Geometry, i: usize) -> CMat {
        g.multiplier(&self.values[i])
    }

    /// Max deviation of `phi_i phi_j = phi_j` for `i < j`.
    pub fn nesting_defect(&self, i: usize, j: usize) -> f64 {
        self.values[i]
            .iter()
            .zip(&self.values[j])
            .map(|(a, b)| (a * b - b).abs())
            .fold(0.0, f64::max)
    }
}
