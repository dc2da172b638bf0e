#![allow(dead_code)]

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use welch_core::asf::{DualPair, Exponent, Field, LpSpace};
use welch_core::fixtures;
use welch_core::numkernel::DenseMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn field(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

pub fn exponent(code: u8) -> Exponent {
    match code % 4 {
        0 => Exponent::Finite(1.0),
        1 => Exponent::Finite(2.0),
        2 => Exponent::Finite(3.0),
        _ => Exponent::Infinity,
    }
}

pub fn random_pair(seed: u64, n: usize, d: usize, p: Exponent, complex: bool) -> DualPair {
    let space = LpSpace::new(d, p, field(complex)).unwrap();
    fixtures::random_pair(&mut rng(seed), n, space)
}

pub fn unit_pair(seed: u64, n: usize, d: usize, complex: bool) -> DualPair {
    fixtures::random_unit_hilbert_pair(&mut rng(seed), n, d, field(complex))
}

/// Sum of f_j[i] τ_k[i], written out by hand.
pub fn naive_pairing(pair: &DualPair, j: usize, k: usize) -> Complex64 {
    let f = pair.functional(j);
    let t = pair.vector(k);
    (0..pair.dim()).map(|i| f[i] * t[i]).sum()
}

pub fn naive_gram(pair: &DualPair) -> Vec<Vec<Complex64>> {
    (0..pair.n()).map(|j| (0..pair.n()).map(|k| naive_pairing(pair, j, k)).collect()).collect()
}

/// S[a][b] = Σ_j τ_j[a] f_j[b].
pub fn naive_frame_operator(pair: &DualPair) -> Vec<Vec<Complex64>> {
    let d = pair.dim();
    let mut s = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for j in 0..pair.n() {
        for a in 0..d {
            for b in 0..d {
                s[a][b] += pair.vector(j)[a] * pair.functional(j)[b];
            }
        }
    }
    s
}

pub fn mat_trace(m: &DenseMatrix) -> Complex64 {
    (0..m.rows()).map(|i| m.get(i, i)).sum()
}

pub fn mat_power(m: &DenseMatrix, k: u32) -> DenseMatrix {
    let mut out = DenseMatrix::identity(m.rows());
    for _ in 0..k {
        out = out.matmul(m).unwrap();
    }
    out
}

pub fn binom(n: u64, k: u64) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// (n / C(d+m−1, m) − 1)/(n − 1)
pub fn welch_floor(n: usize, d: usize, m: usize) -> f64 {
    let dm = binom((d + m - 1) as u64, m as u64);
    (n as f64 / dm - 1.0) / (n as f64 - 1.0)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn crel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}
