//! Approximate Schauder frames on ℓp spaces.
//!
//! A [`DualPair`] holds `n` vectors `τ_j ∈ 𝕂^d` and `n` functionals
//! `f_j ∈ (𝕂^d)*`, both stored as coordinate rows. The pairing
//! `f_j(x) = Σ_i f_j[i]·x[i]` is bilinear: there is no conjugation anywhere,
//! so the Hilbert-space case is obtained by conjugating coordinates once in
//! [`DualPair::hilbert_embed`].

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{trace, DenseMatrix};

/// Imaginary parts below this are accepted (and dropped) for real-field input.
pub const REAL_FIELD_IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

/// An ℓp exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidArgument(format!("exponent must lie in [1, inf], got {p}")))
        }
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn dual(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_two(self) -> bool {
        self == Exponent::Finite(2.0)
    }

    /// Smooth norms are those with `1 < p < ∞`.
    pub fn is_smooth(self) -> bool {
        matches!(self, Exponent::Finite(p) if p > 1.0)
    }

    pub fn norm(self, x: &[Complex64]) -> f64 {
        match self {
            Exponent::Infinity => x.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Exponent::Finite(p) if p == 1.0 => x.iter().map(|z| z.norm()).sum(),
            Exponent::Finite(p) if p == 2.0 => x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            Exponent::Finite(p) => {
                // scale first so large p does not overflow
                let m = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if m == 0.0 {
                    return 0.0;
                }
                m * x.iter().map(|z| (z.norm() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

/// `𝕂^d` with the ℓp norm; its dual is realized as `𝕂^d` with the ℓq norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpSpace {
    pub dim: usize,
    pub p: Exponent,
    pub field: Field,
}

impl LpSpace {
    pub fn new(dim: usize, p: Exponent, field: Field) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if let Exponent::Finite(v) = p {
            Exponent::new(v)?;
        }
        Ok(Self { dim, p, field })
    }

    pub fn hilbert(dim: usize, field: Field) -> Self {
        Self { dim, p: Exponent::Finite(2.0), field }
    }

    pub fn q(&self) -> Exponent {
        self.p.dual()
    }
}

/// Deviations from the Grassmannian constraint set
/// `‖τ_j‖_p = 1, ‖f_j‖_q = 1, f_j(τ_j) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub max_vec_norm_dev: f64,
    pub max_fun_norm_dev: f64,
    pub max_pairing_dev: f64,
}

impl NormalizationReport {
    pub fn max_dev(&self) -> f64 {
        self.max_vec_norm_dev.max(self.max_fun_norm_dev).max(self.max_pairing_dev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tightness {
    pub tight: bool,
    pub lambda: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    space: LpSpace,
    /// n × d, row j is τ_j
    vectors: DenseMatrix,
    /// n × d, row j holds the coefficients of f_j
    functionals: DenseMatrix,
}

impl DualPair {
    pub fn new(space: LpSpace, vectors: DenseMatrix, functionals: DenseMatrix) -> Result<Self> {
        let d = space.dim;
        if vectors.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: vectors.cols() });
        }
        if functionals.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: functionals.cols() });
        }
        if vectors.rows() != functionals.rows() {
            return Err(Error::DimensionMismatch {
                expected: vectors.rows(),
                found: functionals.rows(),
            });
        }
        if vectors.rows() == 0 {
            return Err(Error::InvalidArgument("a dual pair needs at least one vector".into()));
        }
        let (vectors, functionals) = match space.field {
            Field::Complex => (vectors, functionals),
            Field::Real => (realify(vectors)?, realify(functionals)?),
        };
        Ok(Self { space, vectors, functionals })
    }

    pub fn from_rows(
        space: LpSpace,
        vectors: &[Vec<Complex64>],
        functionals: &[Vec<Complex64>],
    ) -> Result<Self> {
        let d = space.dim;
        let flatten = |rows: &[Vec<Complex64>]| -> Result<DenseMatrix> {
            if let Some(bad) = rows.iter().find(|r| r.len() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
            }
            DenseMatrix::new(rows.len(), d, rows.iter().flatten().cloned().collect())
        };
        if vectors.len() != functionals.len() {
            return Err(Error::DimensionMismatch { expected: vectors.len(), found: functionals.len() });
        }
        Self::new(space, flatten(vectors)?, flatten(functionals)?)
    }

    pub fn from_real_rows(space: LpSpace, vectors: &[Vec<f64>], functionals: &[Vec<f64>]) -> Result<Self> {
        let lift = |rows: &[Vec<f64>]| -> Vec<Vec<Complex64>> {
            rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect()
        };
        Self::from_rows(space, &lift(vectors), &lift(functionals))
    }

    /// Pairs each vector with the functional `h ↦ ⟨h, τ_j⟩`, i.e. the
    /// coordinate-wise conjugate of `τ_j`.
    pub fn hilbert_embed(vectors: DenseMatrix, space: LpSpace) -> Result<Self> {
        if !space.p.is_two() {
            return Err(Error::WrongExponent(space.p.to_string()));
        }
        let functionals = DenseMatrix::from_fn(vectors.rows(), vectors.cols(), |r, c| vectors.get(r, c).conj());
        Self::new(space, vectors, functionals)
    }

    pub fn space(&self) -> &LpSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.vectors.rows()
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn vectors(&self) -> &DenseMatrix {
        &self.vectors
    }

    pub fn functionals(&self) -> &DenseMatrix {
        &self.functionals
    }

    pub fn vector(&self, j: usize) -> &[Complex64] {
        self.vectors.row(j)
    }

    pub fn functional(&self, j: usize) -> &[Complex64] {
        self.functionals.row(j)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.n() {
            Err(Error::IndexOutOfRange { index: j, len: self.n() })
        } else {
            Ok(())
        }
    }

    /// `f_j(τ_k)` (zero-based indices).
    pub fn pairing(&self, j: usize, k: usize) -> Result<Complex64> {
        self.check_index(j)?;
        self.check_index(k)?;
        Ok(dot(self.functional(j), self.vector(k)))
    }

    /// `G[j][k] = f_j(τ_k)`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.n();
        DenseMatrix::from_fn(n, n, |j, k| dot(self.functional(j), self.vector(k)))
    }

    /// `S[a][b] = Σ_j τ_j[a]·f_j[b]`, the matrix of `x ↦ Σ_j f_j(x) τ_j`.
    pub fn frame_operator(&self) -> DenseMatrix {
        let d = self.dim();
        let mut s = DenseMatrix::zeros(d, d);
        for j in 0..self.n() {
            let (t, f) = (self.vector(j), self.functional(j));
            for a in 0..d {
                if t[a] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..d {
                    s.set(a, b, s.get(a, b) + t[a] * f[b]);
                }
            }
        }
        s
    }

    /// Matrix of the analysis operator `θ_f` (n × d).
    pub fn analysis_matrix(&self) -> DenseMatrix {
        self.functionals.clone()
    }

    /// Matrix of the synthesis operator `θ_τ` (d × n).
    pub fn synthesis_matrix(&self) -> DenseMatrix {
        self.vectors.transpose()
    }

    /// `θ_f x = (f_1(x), …, f_n(x))`.
    pub fn analysis(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok((0..self.n()).map(|j| dot(self.functional(j), x)).collect())
    }

    /// `θ_τ a = Σ_j a_j τ_j`.
    pub fn synthesis(&self, a: &[Complex64]) -> Result<Vec<Complex64>> {
        if a.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: a.len() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (j, aj) in a.iter().enumerate() {
            for (o, t) in out.iter_mut().zip(self.vector(j)) {
                *o += aj * t;
            }
        }
        Ok(out)
    }

    /// `Tra(S) = Σ_j f_j(τ_j)`.
    pub fn trace_s(&self) -> Complex64 {
        (0..self.n()).map(|j| dot(self.functional(j), self.vector(j))).sum()
    }

    /// `Tra(S²) = Σ_j Σ_k f_j(τ_k) f_k(τ_j)`.
    pub fn trace_s2(&self) -> Complex64 {
        let g = self.gram();
        let n = self.n();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                acc += g.get(j, k) * g.get(k, j);
            }
        }
        acc
    }

    pub fn tightness(&self, tol: f64) -> Tightness {
        let lambda = self.trace_s() / self.dim() as f64;
        let s = self.frame_operator();
        let dev = s
            .sub(&DenseMatrix::identity(self.dim()).scale(lambda))
            .map(|m| m.max_abs())
            .unwrap_or(f64::INFINITY);
        Tightness { tight: dev <= tol * lambda.norm().max(1.0), lambda }
    }

    pub fn normalization_report(&self) -> NormalizationReport {
        let (p, q) = (self.space.p, self.space.q());
        let mut rep = NormalizationReport::default();
        for j in 0..self.n() {
            rep.max_vec_norm_dev = rep.max_vec_norm_dev.max((p.norm(self.vector(j)) - 1.0).abs());
            rep.max_fun_norm_dev = rep.max_fun_norm_dev.max((q.norm(self.functional(j)) - 1.0).abs());
            let pj = dot(self.functional(j), self.vector(j));
            rep.max_pairing_dev = rep.max_pairing_dev.max((pj - 1.0).norm());
        }
        rep
    }

    /// `f_j(τ_j) = 1` for all j, within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (0..self.n()).all(|j| (dot(self.functional(j), self.vector(j)) - 1.0).norm() <= tol)
    }

    /// ℓ2 pair whose functionals are the conjugated vectors.
    pub fn is_hilbert_structured(&self, tol: f64) -> bool {
        self.space.p.is_two()
            && self
                .vectors
                .as_slice()
                .iter()
                .zip(self.functionals.as_slice())
                .all(|(t, f)| (t.conj() - f).norm() <= tol)
    }

    /// Replace `(f_j, τ_j)` by `(c·f_j, τ_j / c)`; the Gram matrix is unchanged.
    pub fn rescaled(&self, c: Complex64) -> Result<Self> {
        if c.norm() == 0.0 {
            return Err(Error::InvalidArgument("rescale factor must be non-zero".into()));
        }
        Self::new(self.space, self.vectors.scale(c.inv()), self.functionals.scale(c))
    }
}

#[inline]
pub(crate) fn dot(f: &[Complex64], x: &[Complex64]) -> Complex64 {
    f.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn realify(m: DenseMatrix) -> Result<DenseMatrix> {
    if let Some(pos) = m.as_slice().iter().position(|z| z.im.abs() > REAL_FIELD_IMAG_TOL) {
        return Err(Error::InvalidArgument(format!(
            "real field but entry {pos} has imaginary part {}",
            m.as_slice()[pos].im
        )));
    }
    DenseMatrix::new(m.rows(), m.cols(), m.as_slice().iter().map(|z| Complex64::new(z.re, 0.0)).collect())
}

/// `trace(S)` via the matrix, used to cross-check [`DualPair::trace_s`].
pub fn matrix_trace_of_frame_operator(pair: &DualPair) -> Complex64 {
    trace(&pair.frame_operator()).expect("frame operator is square")
}
