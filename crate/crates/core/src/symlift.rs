//! Symmetric m-tensor lifts.
//!
//! Pairings of lifted vectors and functionals are m-th powers of the original
//! pairings, so the lifted Gram matrix is the Hadamard power `G^{∘m}` and never
//! needs the `C(d+m−1, m)`-dimensional space. The explicit lift is kept for
//! cross-checking small cases.

use num_complex::Complex64;

use crate::asf::{DualPair, LpSpace};
use crate::error::{Error, Result};
use crate::numkernel::{eigen, hadamard_power, DenseMatrix, Spectrum};

/// Largest lifted dimension the explicit lift will materialize.
pub const LIFT_CAP: usize = 4096;

/// `C(d+m−1, m)`, the dimension of `Sym^m(𝕂^d)`.
pub fn sym_dim(d: usize, m: usize) -> Result<usize> {
    if d == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!("sym_dim needs d >= 1 and m >= 1, got d={d}, m={m}")));
    }
    let overflow = || Error::Overflow(format!("C({}+{}-1, {})", d, m, m));
    // C(m+k, k) with k = d−1, built up one factor at a time; each partial
    // product is itself a binomial coefficient so the division is exact.
    let k = (d - 1) as u128;
    let top = (m as u128).checked_add(k).ok_or_else(overflow)?;
    let k = k.min(top - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul(top - k + i).ok_or_else(overflow)? / i;
    }
    usize::try_from(acc).map_err(|_| overflow())
}

/// Exponent vector `α` labelling a monomial basis element of `Sym^m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymBasisIndex {
    pub multi_index: Vec<u32>,
}

impl SymBasisIndex {
    pub fn order(&self) -> u32 {
        self.multi_index.iter().sum()
    }

    /// `m! / Π α_i!` as a float.
    pub fn multinomial(&self) -> f64 {
        let mut acc = 1.0;
        let mut seen = 0u32;
        for &a in &self.multi_index {
            for t in 1..=a {
                seen += 1;
                acc *= seen as f64 / t as f64;
            }
        }
        acc
    }
}

/// All exponent vectors of length `d` summing to `m`, in descending
/// lexicographic order (`(m,0,…,0)` first, `(0,…,0,m)` last).
pub fn sym_basis(d: usize, m: usize) -> Result<Vec<SymBasisIndex>> {
    let dim = sym_dim(d, m)?;
    let mut out = Vec::with_capacity(dim);
    let mut cur = vec![0u32; d];
    fill(&mut cur, 0, m as u32, &mut out);
    debug_assert_eq!(out.len(), dim);
    Ok(out)
}

fn fill(cur: &mut [u32], pos: usize, left: u32, out: &mut Vec<SymBasisIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(SymBasisIndex { multi_index: cur.to_vec() });
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        fill(cur, pos + 1, left - a, out);
    }
    cur[pos] = 0;
}

/// `G^{∘m}`; entry `(j,k)` is `f_j(τ_k)^m`.
pub fn lifted_gram(g: &DenseMatrix, m: u32) -> Result<DenseMatrix> {
    if !g.is_square() {
        return Err(Error::NonSquare { rows: g.rows(), cols: g.cols() });
    }
    hadamard_power(g, m)
}

fn lift_rows(rows: &DenseMatrix, basis: &[SymBasisIndex]) -> DenseMatrix {
    let weights: Vec<f64> = basis.iter().map(|b| b.multinomial().sqrt()).collect();
    DenseMatrix::from_fn(rows.rows(), basis.len(), |r, col| {
        let x = rows.row(r);
        let mono: Complex64 = basis[col]
            .multi_index
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powu(a))
            .product();
        mono * weights[col]
    })
}

/// The lifted pair `(f_j^{⊗m}, τ_j^{⊗m})` in monomial coordinates.
///
/// The lifted space keeps the exponent and field of the original one, but
/// its norms are not the tensor norms; only the pairing values are meaningful.
pub fn explicit_lift(pair: &DualPair, m: usize) -> Result<DualPair> {
    let d = pair.dim();
    let dim = sym_dim(d, m)?;
    if dim > LIFT_CAP {
        return Err(Error::LiftTooLarge { dim, cap: LIFT_CAP });
    }
    if m == 1 {
        return Ok(pair.clone());
    }
    let basis = sym_basis(d, m)?;
    let space = LpSpace { dim, ..*pair.space() };
    DualPair::new(space, lift_rows(pair.vectors(), &basis), lift_rows(pair.functionals(), &basis))
}

/// Spectrum of the order-m lifted frame operator, obtained from the `n × n`
/// lifted Gram matrix. The `D × D` operator has the same non-zero eigenvalues
/// plus `padding` additional zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSpectrum {
    pub spectrum: Spectrum,
    pub padding: usize,
    pub lifted_dim: usize,
}

impl LiftedSpectrum {
    /// Eigenvalues of the `D × D` operator: the Gram eigenvalues with the
    /// `n − D` smallest in modulus dropped when `n > D`, or zeros appended
    /// when `n < D`. Order otherwise follows [`Spectrum`].
    pub fn operator_eigenvalues(&self) -> Vec<Complex64> {
        let (kept, _) = self.split();
        let mut ev = kept;
        ev.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), self.padding));
        ev
    }

    /// Gram eigenvalues split into those shared with the operator and the
    /// surplus that must vanish.
    fn split(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let ev = &self.spectrum.eigenvalues;
        let surplus = ev.len().saturating_sub(self.lifted_dim);
        let mut by_modulus: Vec<usize> = (0..ev.len()).collect();
        by_modulus.sort_by(|&a, &b| ev[a].norm().total_cmp(&ev[b].norm()));
        let mut dropped = vec![false; ev.len()];
        for &i in &by_modulus[..surplus] {
            dropped[i] = true;
        }
        let kept = (0..ev.len()).filter(|&i| !dropped[i]).map(|i| ev[i]).collect();
        let gone = (0..ev.len()).filter(|&i| dropped[i]).map(|i| ev[i]).collect();
        (kept, gone)
    }

    /// The lifted operator is `λ·I` for some λ, within `tol` relative.
    pub fn is_tight(&self, tol: f64) -> bool {
        if self.padding > 0 {
            return false;
        }
        let (ev, gone) = self.split();
        let lambda: Complex64 = ev.iter().sum::<Complex64>() / ev.len() as f64;
        let scale = lambda.norm().max(1.0);
        ev.iter().all(|e| (e - lambda).norm() <= tol * scale) && gone.iter().all(|e| e.norm() <= tol * scale)
    }
}

pub fn lifted_frame_spectrum(pair: &DualPair, m: usize) -> Result<LiftedSpectrum> {
    let lifted_dim = sym_dim(pair.dim(), m)?;
    let gm = lifted_gram(&pair.gram(), u32::try_from(m).map_err(|_| Error::Overflow("order".into()))?)?;
    let spectrum = eigen(&gm)?;
    Ok(LiftedSpectrum { spectrum, padding: lifted_dim.saturating_sub(pair.n()), lifted_dim })
}
