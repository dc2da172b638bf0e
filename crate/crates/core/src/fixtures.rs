//! Small named dual pairs with known closed-form behaviour, plus random
//! generators used by tests and the command-line tool.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::asf::{DualPair, Exponent, Field, LpSpace};
use crate::numkernel::DenseMatrix;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Standard basis `e_j` paired with the coordinate functionals `e_j*`.
pub fn dual_basis(d: usize, p: Exponent, field: Field) -> DualPair {
    let space = LpSpace::new(d, p, field).expect("valid space");
    DualPair::new(space, DenseMatrix::identity(d), DenseMatrix::identity(d)).expect("valid pair")
}

/// Three unit vectors at 120° in ℝ², self-paired.
pub fn mercedes_benz() -> DualPair {
    let h = 3f64.sqrt() / 2.0;
    let v = DenseMatrix::from_real(3, 2, &[1.0, 0.0, -0.5, h, -0.5, -h]).unwrap();
    DualPair::hilbert_embed(v, LpSpace::hilbert(2, Field::Real)).unwrap()
}

/// Four equiangular lines in ℂ² with `|⟨ψ_j, ψ_k⟩|² = 1/3`.
pub fn sic_d2() -> DualPair {
    let a = 1.0 / 3f64.sqrt();
    let b = (2.0f64 / 3.0).sqrt();
    let mut data = vec![c(1.0, 0.0), c(0.0, 0.0)];
    for k in 0..3 {
        data.push(c(a, 0.0));
        data.push(Complex64::from_polar(b, 2.0 * PI * k as f64 / 3.0));
    }
    let v = DenseMatrix::new(4, 2, data).unwrap();
    DualPair::hilbert_embed(v, LpSpace::hilbert(2, Field::Complex)).unwrap()
}

/// The nine Weyl–Heisenberg translates of `(0, 1, −1)/√2` in ℂ³.
pub fn hesse_sic() -> DualPair {
    let s = 0.5f64.sqrt();
    let fid = [c(0.0, 0.0), c(s, 0.0), c(-s, 0.0)];
    let mut data = Vec::with_capacity(27);
    for a in 0..3 {
        for b in 0..3 {
            for i in 0..3 {
                // (X^a Z^b ψ)_i = ω^{b(i−a)} ψ_{i−a}
                let src = (i + 3 - a) % 3;
                let phase = Complex64::from_polar(1.0, 2.0 * PI * (b * src) as f64 / 3.0);
                data.push(phase * fid[src]);
            }
        }
    }
    let v = DenseMatrix::new(9, 3, data).unwrap();
    DualPair::hilbert_embed(v, LpSpace::hilbert(3, Field::Complex)).unwrap()
}

/// `{e1, e1, e2}` in ℝ², self-paired: a frame that is not tight.
pub fn duplicated_basis() -> DualPair {
    let v = DenseMatrix::from_real(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
    DualPair::hilbert_embed(v, LpSpace::hilbert(2, Field::Real)).unwrap()
}

/// A pair whose frame operator is the Jordan block `[[1,1],[0,1]]`.
/// The sum inequality holds with equality even though `S` is not diagonalizable.
pub fn jordan_pair() -> DualPair {
    let sp = LpSpace::hilbert(2, Field::Real);
    DualPair::from_real_rows(sp, &[vec![1.0, 0.0], vec![1.0, 1.0]], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
}

/// A pair with `S = [[1,1],[−1,1]]`, eigenvalues `1 ± i`, for which the sum
/// inequality fails outright.
pub fn rotating_pair() -> DualPair {
    let sp = LpSpace::hilbert(2, Field::Real);
    DualPair::from_real_rows(sp, &[vec![1.0, 0.0], vec![0.0, 1.0]], &[vec![1.0, 1.0], vec![-1.0, 1.0]]).unwrap()
}

/// Looks up a fixture by its command-line name.
pub fn by_name(name: &str) -> Option<DualPair> {
    Some(match name {
        "mercedes-benz" | "mb" => mercedes_benz(),
        "sic2" => sic_d2(),
        "hesse" | "sic3" => hesse_sic(),
        "duplicated-basis" => duplicated_basis(),
        "jordan" => jordan_pair(),
        "rotating" => rotating_pair(),
        _ => return None,
    })
}

pub const FIXTURE_NAMES: &[&str] = &["mercedes-benz", "sic2", "hesse", "duplicated-basis", "jordan", "rotating"];

fn gaussian_entry<R: Rng + ?Sized>(rng: &mut R, field: Field) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    match field {
        Field::Real => c(re, 0.0),
        Field::Complex => c(re, rng.sample(StandardNormal)),
    }
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, field: Field) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| gaussian_entry(rng, field))
}

/// Independent Gaussian vectors and functionals (no normalization).
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, n: usize, space: LpSpace) -> DualPair {
    let v = gaussian_matrix(rng, n, space.dim, space.field);
    let f = gaussian_matrix(rng, n, space.dim, space.field);
    DualPair::new(space, v, f).unwrap()
}

/// Gaussian vectors with the Hilbert pairing, not normalized.
pub fn random_hilbert_pair<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, field: Field) -> DualPair {
    let v = gaussian_matrix(rng, n, d, field);
    DualPair::hilbert_embed(v, LpSpace::hilbert(d, field)).unwrap()
}

/// Uniformly random unit vectors with the Hilbert pairing.
pub fn random_unit_hilbert_pair<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, field: Field) -> DualPair {
    let mut v = gaussian_matrix(rng, n, d, field);
    for j in 0..n {
        let norm = Exponent::Finite(2.0).norm(v.row(j));
        for i in 0..d {
            v.set(j, i, v.get(j, i) / norm);
        }
    }
    DualPair::hilbert_embed(v, LpSpace::hilbert(d, field)).unwrap()
}
