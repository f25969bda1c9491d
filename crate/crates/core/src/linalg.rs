//! Dense complex linear algebra helpers on top of `nalgebra`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Signed Fourier mode of FFT-ordered index `i`: `0..N/2` then `-N/2..-1`.
pub fn mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Index of signed mode `k` in FFT order.
pub fn mode_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Forward DFT matrix `F[k, j] = e^{-i k x_j} / N` with `x_j = 2 pi j / N`.
pub fn dft_matrix(n: usize) -> CMat {
    let scale = 1.0 / n as f64;
    CMat::from_fn(n, n, |i, j| {
        let k = mode(i, n) as f64;
        C64::from_polar(scale, -k * 2.0 * PI * j as f64 / n as f64)
    })
}

/// Inverse DFT matrix `G[j, k] = e^{i k x_j}`.
pub fn idft_matrix(n: usize) -> CMat {
    CMat::from_fn(n, n, |j, i| {
        let k = mode(i, n) as f64;
        C64::from_polar(1.0, k * 2.0 * PI * j as f64 / n as f64)
    })
}

/// Unitary DFT `e^{-i k x_j} / sqrt(N)`.
pub fn unitary_dft(n: usize) -> CMat {
    dft_matrix(n) * C64::from(Float::sqrt(n as f64))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

pub fn opnorm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn smin(m: &CMat) -> f64 {
    let s = singular_values(m);
    if m.nrows() != m.ncols() {
        return if m.nrows() > m.ncols() {
            s.last().copied().unwrap_or(0.0)
        } else {
            0.0
        };
    }
    s.last().copied().unwrap_or(0.0)
}

/// Full SVD `m = U diag(s) V^H` with singular values sorted descending.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    let n = m.nrows().min(m.ncols());
    let d = m.clone().svd(true, true);
    let u0 = d.u.unwrap_or_else(|| CMat::zeros(m.nrows(), n));
    let vt0 = d.v_t.unwrap_or_else(|| CMat::zeros(n, m.ncols()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        d.singular_values[b]
            .partial_cmp(&d.singular_values[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut u = CMat::zeros(m.nrows(), n);
    let mut v = CMat::zeros(m.ncols(), n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        s.push(d.singular_values[src]);
        u.set_column(dst, &u0.column(src));
        let row = vt0.row(src).adjoint();
        v.set_column(dst, &row);
    }
    Svd { u, s, v }
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn diag(values: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(values))
}

pub fn diag_real(values: &[f64]) -> CMat {
    CMat::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            C64::from(values[i])
        } else {
            C64::from(0.0)
        }
    })
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Matrix inverse via LU; `None` when singular.
pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().try_inverse()
}

/// Hermitian positive semidefinite square root of a diagonal of reals.
pub fn sqrt_diag(values: &[f64]) -> CMat {
    let s: Vec<f64> = values.iter().map(|v| Float::sqrt(v.max(0.0))).collect();
    diag_real(&s)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * C64::from(0.5);
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_pair_is_inverse() {
        let n = 12;
        let p = idft_matrix(n) * dft_matrix(n);
        assert!(max_abs(&(p - eye(n))) < 1e-13);
    }

    #[test]
    fn unitary_dft_is_unitary() {
        let f = unitary_dft(10);
        assert!(max_abs(&(f.adjoint() * &f - eye(10))) < 1e-13);
    }

    #[test]
    fn modes_are_fft_ordered() {
        assert_eq!(mode(0, 8), 0);
        assert_eq!(mode(3, 8), 3);
        assert_eq!(mode(4, 8), -4);
        assert_eq!(mode(7, 8), -1);
        assert_eq!(mode_index(-1, 8), 7);
    }

    #[test]
    fn svd_sorted_and_reconstructs() {
        let m = CMat::from_fn(5, 5, |i, j| c((i * 3 + j) as f64 % 7.0, (i as f64 - j as f64) * 0.3));
        let d = svd(&m);
        for w in d.s.windows(2) {
            assert!(w[0] >= w[1]);
        }
        let s = diag_real(&d.s);
        let r = &d.u * s * d.v.adjoint();
        assert!(max_abs(&(r - m)) < 1e-12);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-2.5)).collect();
        assert!((loglog_slope(&x, &y) + 2.5).abs() < 1e-12);
    }
}
