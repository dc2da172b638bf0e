//! Scalar quality measures of a dual pair, all functions of the Gram matrix.

use serde::{Deserialize, Serialize};

use crate::asf::DualPair;
use crate::bounds::NORMALIZATION_TOL;
use crate::error::{Error, Result};
use crate::numkernel::DenseMatrix;

fn require_two(pair: &DualPair) -> Result<()> {
    if pair.n() < 2 {
        Err(Error::TooFewVectors(pair.n()))
    } else {
        Ok(())
    }
}

fn require_normalized(pair: &DualPair) -> Result<()> {
    let dev = pair.normalization_report().max_pairing_dev;
    if dev > NORMALIZATION_TOL {
        Err(Error::NotNormalized(dev))
    } else {
        Ok(())
    }
}

pub(crate) fn max_offdiag_abs(g: &DenseMatrix) -> f64 {
    let n = g.rows();
    let mut best: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                best = best.max(g.get(j, k).norm());
            }
        }
    }
    best
}

/// `max_{j≠k} |f_j(τ_k)|`.
pub fn frame_correlation(pair: &DualPair) -> Result<f64> {
    require_two(pair)?;
    Ok(max_offdiag_abs(&pair.gram()))
}

/// `Re Σ_{j≠k} G_jk G_kj`.
fn cross_sum(g: &DenseMatrix) -> (f64, f64) {
    let n = g.rows();
    let (mut acc, mut scale) = (0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            if j != k {
                let t = g.get(j, k) * g.get(k, j);
                acc += t.re;
                scale += t.norm();
            }
        }
    }
    (acc, scale)
}

/// `(Re Σ_{j≠k} f_j(τ_k) f_k(τ_j) / (n(n−1)))^{1/2}` for a normalized pair.
///
/// A negative radicand cannot occur when the frame operator has
/// non-negative spectrum, so it is reported as an error.
pub fn rms_cross(pair: &DualPair) -> Result<f64> {
    require_two(pair)?;
    require_normalized(pair)?;
    let n = pair.n() as f64;
    let (sum, scale) = cross_sum(&pair.gram());
    let radicand = sum / (n * (n - 1.0));
    sqrt_radicand(radicand, scale / (n * (n - 1.0)))
}

pub(crate) fn sqrt_radicand(radicand: f64, scale: f64) -> Result<f64> {
    if radicand < -64.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NegativeRadicand(radicand));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `Re Σ_{j,k} f_j(τ_k) f_k(τ_j)`, which is `Re Tra(S²)`.
pub fn pseudo_frame_potential(pair: &DualPair) -> f64 {
    pair.trace_s2().re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equiangularity {
    pub flag: bool,
    pub gamma: f64,
    pub max_dev: f64,
}

/// `γ` is the mean of `|G_jk|²` over `j ≠ k`; the pair is equiangular when
/// every off-diagonal `|G_jk|²` is within `tol` of it.
pub fn equiangularity(pair: &DualPair, tol: f64) -> Result<Equiangularity> {
    require_two(pair)?;
    let g = pair.gram();
    let n = g.rows();
    let vals: Vec<f64> = (0..n)
        .flat_map(|j| (0..n).filter(move |&k| k != j).map(move |k| (j, k)))
        .map(|(j, k)| g.get(j, k).norm_sqr())
        .collect();
    Ok(spread(&vals, tol))
}

pub(crate) fn spread(vals: &[f64], tol: f64) -> Equiangularity {
    let gamma = vals.iter().sum::<f64>() / vals.len() as f64;
    let max_dev = vals.iter().map(|v| (v - gamma).abs()).fold(0.0, f64::max);
    Equiangularity { flag: max_dev <= tol, gamma, max_dev }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asf::{Exponent, Field};
    use crate::fixtures;
    use num_complex::Complex64;

    #[test]
    fn correlation_examples() {
        assert_eq!(frame_correlation(&fixtures::dual_basis(3, Exponent::Finite(2.0), Field::Real)).unwrap(), 0.0);
        assert!((frame_correlation(&fixtures::mercedes_benz()).unwrap() - 0.5).abs() < 1e-15);
        assert!((frame_correlation(&fixtures::sic_d2()).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let one = fixtures::dual_basis(1, Exponent::Finite(2.0), Field::Real);
        assert!(matches!(frame_correlation(&one), Err(Error::TooFewVectors(1))));
    }

    #[test]
    fn rms_examples() {
        assert!((rms_cross(&fixtures::mercedes_benz()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(rms_cross(&fixtures::dual_basis(4, Exponent::Finite(2.0), Field::Complex)).unwrap(), 0.0);
        assert!((rms_cross(&fixtures::duplicated_basis()).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        // the rotating pair has cross sum −2
        assert!(matches!(rms_cross(&fixtures::rotating_pair()), Err(Error::NegativeRadicand(_))));
        let mb = fixtures::mercedes_benz();
        let off = crate::asf::DualPair::new(*mb.space(), mb.vectors().scale(Complex64::new(2.0, 0.0)), mb.functionals().clone()).unwrap();
        assert!(matches!(rms_cross(&off), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn potential_examples() {
        assert_eq!(pseudo_frame_potential(&fixtures::dual_basis(3, Exponent::Finite(2.0), Field::Real)), 3.0);
        assert!((pseudo_frame_potential(&fixtures::mercedes_benz()) - 4.5).abs() < 1e-14);
        assert!((pseudo_frame_potential(&fixtures::duplicated_basis()) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn equiangular_examples() {
        let e = equiangularity(&fixtures::mercedes_benz(), 1e-12).unwrap();
        assert!(e.flag && (e.gamma - 0.25).abs() < 1e-15 && e.max_dev < 1e-15);
        let e = equiangularity(&fixtures::dual_basis(3, Exponent::Finite(2.0), Field::Real), 1e-12).unwrap();
        assert_eq!((e.flag, e.gamma, e.max_dev), (true, 0.0, 0.0));
        let e = equiangularity(&fixtures::duplicated_basis(), 1e-6).unwrap();
        assert!(!e.flag);
    }
}
