//! Dense small-matrix kernel.
//!
//! Everything here is independent of frame semantics: a row-major complex
//! matrix type, a general (non-Hermitian) eigenvalue routine with an
//! eigenvector-conditioning estimate, trace powers, Hadamard powers and
//! numerical rank. Hermitian inputs take a dedicated path whose eigenvector
//! matrix is unitary; everything else goes through a complex Schur form
//! (backed by `nalgebra`) followed by triangular back-substitution.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense matrix of complex scalars.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| if r == c { values[r] } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    #[cfg(test)]
    pub(crate) fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues of a square matrix plus conditioning diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by descending real part, ties by descending imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// 2-norm condition number of the column-normalized eigenvector matrix.
    /// Infinite when the computed eigenvectors are linearly dependent.
    pub eigvec_condition: f64,
    pub max_imag: f64,
}

impl Spectrum {
    /// Build a spectrum from eigenvalues known to come from a diagonalizable
    /// operator with a well-conditioned eigenbasis.
    pub fn from_eigenvalues(mut eigenvalues: Vec<Complex64>) -> Self {
        sort_eigenvalues(&mut eigenvalues);
        let max_imag = eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        Self { eigenvalues, eigvec_condition: 1.0, max_imag }
    }

    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Allowed |Im λ| relative to the spectral radius.
    pub eig_imag_tol: f64,
    /// Allowed negative real part relative to the spectral radius.
    pub nonneg_tol: f64,
    /// Singular values at or below `rank_tol * σ_max` count as zero.
    pub rank_tol: f64,
    /// Eigenvector condition numbers above this flag the matrix as defective.
    pub diag_cond_max: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { eig_imag_tol: 1e-9, nonneg_tol: 1e-9, rank_tol: 1e-10, diag_cond_max: 1e8 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eig_imag_tol", self.eig_imag_tol),
            ("nonneg_tol", self.nonneg_tol),
            ("rank_tol", self.rank_tol),
            ("diag_cond_max", self.diag_cond_max),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralVerdict {
    pub diagonalizable: bool,
    pub nonneg: bool,
}

impl SpectralVerdict {
    pub fn holds(&self) -> bool {
        self.diagonalizable && self.nonneg
    }
}

fn sort_eigenvalues(v: &mut [Complex64]) {
    v.sort_by(|a, b| match b.re.total_cmp(&a.re) {
        Ordering::Equal => b.im.total_cmp(&a.im),
        o => o,
    });
}

fn is_hermitian(m: &DenseMatrix) -> bool {
    let scale = m.max_abs();
    if scale == 0.0 {
        return true;
    }
    let n = m.rows();
    for r in 0..n {
        for c in r..n {
            if (m.get(r, c) - m.get(c, r).conj()).norm() > 1e-13 * scale {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues of a square matrix.
pub fn eigen(m: &DenseMatrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n == 0 {
        return Err(Error::InvalidArgument("eigen of an empty matrix".into()));
    }
    if is_hermitian(m) {
        // Symmetrize exactly so the solver sees a Hermitian matrix.
        let h = DenseMatrix::from_fn(n, n, |r, c| (m.get(r, c) + m.get(c, r).conj()) * 0.5);
        let eig = h.to_nalgebra().symmetric_eigen();
        let vals = eig.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        return Ok(Spectrum::from_eigenvalues(vals));
    }

    let a = m.to_nalgebra();
    let schur = a
        .try_schur(f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let eigvec_condition = eigvec_condition(&q, &t);
    sort_eigenvalues(&mut eigenvalues);
    let max_imag = eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(Spectrum { eigenvalues, eigvec_condition, max_imag })
}

/// Condition number of the eigenvector matrix of `Q T Q^H`, with `T` upper
/// triangular. Eigenvectors of `T` come from back-substitution; inside an
/// eigenvalue cluster a negligible right-hand side means the cluster is
/// semisimple there (component set to zero), a non-negligible one means a
/// Jordan coupling and the component blows up to ~1/eps.
fn eigvec_condition(q: &DMatrix<Complex64>, t: &DMatrix<Complex64>) -> f64 {
    let n = t.nrows();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let cluster_tol = 1e-8 * scale;
    let tiny = f64::EPSILON * scale;
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut rhs = ZERO;
            let mut ymax: f64 = 1.0;
            for l in (i + 1)..=k {
                rhs -= t[(i, l)] * y[(l, k)];
                ymax = ymax.max(y[(l, k)].norm());
            }
            let denom = t[(i, i)] - lambda;
            y[(i, k)] = if denom.norm() > cluster_tol {
                rhs / denom
            } else if rhs.norm() <= cluster_tol * ymax {
                ZERO
            } else {
                rhs / Complex64::new(tiny, 0.0)
            };
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            col.iter_mut().for_each(|z| *z /= norm);
        }
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return f64::INFINITY;
    }
    let sv = v.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        (smax / smin).max(1.0)
    }
}

pub fn spectral_verdict(s: &Spectrum, t: &ToleranceConfig) -> SpectralVerdict {
    let diagonalizable = s.eigvec_condition <= t.diag_cond_max;
    let rho = s.spectral_radius();
    let nonneg = rho == 0.0
        || s.eigenvalues
            .iter()
            .all(|z| z.im.abs() <= t.eig_imag_tol * rho && z.re >= -t.nonneg_tol * rho);
    SpectralVerdict { diagonalizable, nonneg }
}

pub fn trace(m: &DenseMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    Ok((0..m.rows()).map(|i| m.get(i, i)).sum())
}

/// `Σ max(Re λ, 0)^r`, the trace of `S^r` for an operator with non-negative
/// spectrum. Tiny negative real parts allowed by the tolerance clamp to zero.
pub fn trace_power(s: &Spectrum, r: f64, t: &ToleranceConfig) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("trace power exponent must be positive, got {r}")));
    }
    if !spectral_verdict(s, t).nonneg {
        return Err(Error::NegativeSpectrum);
    }
    Ok(clamped_power_sum(s, r))
}

pub(crate) fn clamped_power_sum(s: &Spectrum, r: f64) -> f64 {
    s.eigenvalues
        .iter()
        .map(|z| {
            let x = z.re.max(0.0);
            if x == 0.0 {
                0.0
            } else {
                x.powf(r)
            }
        })
        .sum()
}

/// Entrywise `m`-th power.
pub fn hadamard_power(g: &DenseMatrix, m: u32) -> Result<DenseMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("Hadamard power order must be >= 1".into()));
    }
    Ok(DenseMatrix {
        rows: g.rows,
        cols: g.cols,
        data: g.data.iter().map(|z| z.powu(m)).collect(),
    })
}

pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.to_nalgebra().singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `rank_tol * σ_max`.
pub fn numerical_rank(m: &DenseMatrix, t: &ToleranceConfig) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().cloned().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > t.rank_tol * smax).count()
}
