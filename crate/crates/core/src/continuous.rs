//! Frames indexed by a finite atomic measure.
//!
//! Integrals over `Ω` become weighted sums over atoms and the diagonal of
//! `Ω × Ω` has mass `Σ w_α²`. With unit weights every quantity here reduces
//! to its counterpart in [`crate::bounds`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asf::DualPair;
use crate::bounds::{
    self, hypothesis_failures, weighted_order_records, weighted_trace_power_record, BoundConfig, BoundRecord,
    BoundReport, PairSummary, ReportRequest, NORMALIZATION_TOL,
};
use crate::error::{Error, Result};
use crate::numkernel::{eigen, spectral_verdict, DenseMatrix};
use crate::optimize::metrics::{spread, sqrt_radicand, Equiangularity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasure {
    pub atoms: Vec<String>,
    pub weights: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(atoms: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: atoms.len(), found: weights.len() });
        }
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("measure needs at least one atom".into()));
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::NonPositiveMass { index, value });
        }
        Ok(Self { atoms, weights })
    }

    /// Unit weights on atoms labelled `0, 1, …, n−1`.
    pub fn counting(n: usize) -> Self {
        Self { atoms: (0..n).map(|j| j.to_string()).collect(), weights: vec![1.0; n] }
    }

    pub fn uniform(n: usize, w: f64) -> Result<Self> {
        Self::new((0..n).map(|j| j.to_string()).collect(), vec![w; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `μ(Ω)`
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `(μ×μ)(Δ) = Σ w_α²`
    pub fn diag_mass(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// `(μ×μ)((Ω×Ω) \ Δ)`
    pub fn offdiag_mass(&self) -> f64 {
        let t = self.total_mass();
        (t * t - self.diag_mass()).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousAsf {
    measure: FiniteMeasure,
    pair: DualPair,
}

impl ContinuousAsf {
    pub fn new(measure: FiniteMeasure, pair: DualPair) -> Result<Self> {
        if measure.len() != pair.n() {
            return Err(Error::DimensionMismatch { expected: pair.n(), found: measure.len() });
        }
        Ok(Self { measure, pair })
    }

    /// The discrete pair under counting measure.
    pub fn counting(pair: DualPair) -> Self {
        Self { measure: FiniteMeasure::counting(pair.n()), pair }
    }

    pub fn measure(&self) -> &FiniteMeasure {
        &self.measure
    }

    pub fn pair(&self) -> &DualPair {
        &self.pair
    }

    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    fn w(&self) -> &[f64] {
        &self.measure.weights
    }

    fn require_offdiag(&self) -> Result<f64> {
        let m = self.measure.offdiag_mass();
        if self.measure.len() < 2 || m <= 0.0 {
            Err(Error::DegenerateMeasure)
        } else {
            Ok(m)
        }
    }

    fn require_normalized(&self) -> Result<()> {
        let dev = self.pair.normalization_report().max_pairing_dev;
        if dev > NORMALIZATION_TOL {
            Err(Error::NotNormalized(dev))
        } else {
            Ok(())
        }
    }

    /// `W^{1/2} G W^{1/2}`, similar to `W G` and sharing the non-zero spectrum
    /// of the continuous frame operator.
    fn weighted_gram(&self) -> DenseMatrix {
        let g = self.pair.gram();
        let r: Vec<f64> = self.w().iter().map(|x| x.sqrt()).collect();
        DenseMatrix::from_fn(g.rows(), g.cols(), |j, k| g.get(j, k) * (r[j] * r[k]))
    }
}

/// `S[a][b] = Σ_α w_α τ_α[a] f_α[b]`.
pub fn cont_frame_operator(casf: &ContinuousAsf) -> DenseMatrix {
    let d = casf.dim();
    let mut s = DenseMatrix::zeros(d, d);
    for (alpha, &w) in casf.w().iter().enumerate() {
        let (t, f) = (casf.pair.vector(alpha), casf.pair.functional(alpha));
        for a in 0..d {
            let wt = t[a] * w;
            for b in 0..d {
                s.set(a, b, s.get(a, b) + wt * f[b]);
            }
        }
    }
    s
}

/// `Σ_α w_α f_α(τ_α)`.
pub fn cont_trace(casf: &ContinuousAsf) -> Complex64 {
    let g = casf.pair.gram();
    casf.w().iter().enumerate().map(|(a, &w)| g.get(a, a) * w).sum()
}

/// `Σ_{α,β} w_α w_β f_β(τ_α) f_α(τ_β)`.
pub fn cont_trace2(casf: &ContinuousAsf) -> Complex64 {
    let g = casf.pair.gram();
    let w = casf.w();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..w.len() {
        for b in 0..w.len() {
            acc += g.get(a, b) * g.get(b, a) * (w[a] * w[b]);
        }
    }
    acc
}

/// Sum form, product max form and single max form at order `m`.
pub fn cont_welch_check(casf: &ContinuousAsf, m: usize, cfg: &BoundConfig) -> Result<[BoundRecord; 3]> {
    casf.require_offdiag()?;
    let (sum, prod, single, _) = weighted_order_records(&casf.pair, casf.w(), m, cfg)?;
    Ok([sum, prod.expect("off-diagonal mass is positive"), single.expect("off-diagonal mass is positive")])
}

/// Continuous Jensen trace-power bound; same direction conventions as
/// [`bounds::trace_power_check`].
pub fn cont_trace_power_check(casf: &ContinuousAsf, r: f64, cfg: &BoundConfig) -> Result<BoundRecord> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("trace power exponent must be positive, got {r}")));
    }
    let spectrum = eigen(&cont_frame_operator(casf))?;
    if !spectral_verdict(&spectrum, &cfg.tolerances).nonneg {
        return Err(Error::NegativeSpectrum);
    }
    Ok(weighted_trace_power_record(&casf.pair, r, &spectrum, cont_trace(casf), cfg))
}

/// `Σ_{α,β} w_α w_β |G_αβ G_βα|^{p/2} ≥ (μ(Ω)²/d − D)^{p/2} / M^{p/2−1} + D`
/// with `D` the diagonal mass and `M` the off-diagonal mass.
pub fn cont_p_check(casf: &ContinuousAsf, p: f64, cfg: &BoundConfig) -> Result<BoundRecord> {
    bounds::validate_p(p)?;
    casf.require_normalized()?;
    let (n, d) = (casf.pair.n(), casf.dim());
    if n < d {
        return Err(Error::DegenerateCount { n, d });
    }
    let big_m = casf.require_offdiag()?;
    let g = casf.pair.gram();
    let w = casf.w();
    let mut lhs = 0.0;
    for a in 0..n {
        for b in 0..n {
            lhs += w[a] * w[b] * (g.get(a, b) * g.get(b, a)).norm().powf(p / 2.0);
        }
    }
    let total = casf.measure.total_mass();
    let diag = casf.measure.diag_mass();
    let base = total * total / d as f64 - diag;
    let failures = hypothesis_failures(&casf.weighted_gram(), "continuous frame operator", cfg)?;
    let mut note = None;
    let rhs = if base >= 0.0 {
        base.powf(p / 2.0) / big_m.powf(p / 2.0 - 1.0) + diag
    } else {
        note = Some(format!("negative base {base:.3e} clamped to 0"));
        diag
    };
    let mut rec = BoundRecord::new(format!("cont_p_sum_p{p}"), lhs, rhs, true, cfg.equality_tol);
    if let Some(n) = note {
        rec.note(n);
    }
    for f in failures {
        rec.hypothesis_ok = false;
        rec.note(format!("hypothesis failed: {f}"));
    }
    Ok(rec)
}

/// One atom per partition cell: weight `masses[j]`, rows scaled by
/// `1/√masses[j]`, so the weighted frame operator equals the discrete one.
pub fn partition_construction(pair: &DualPair, masses: &[f64]) -> Result<ContinuousAsf> {
    if masses.len() != pair.n() {
        return Err(Error::DimensionMismatch { expected: pair.n(), found: masses.len() });
    }
    if let Some((index, &value)) = masses.iter().enumerate().find(|(_, m)| !(**m > 0.0 && m.is_finite())) {
        return Err(Error::NonPositiveMass { index, value });
    }
    let scale = |m: &DenseMatrix| {
        DenseMatrix::from_fn(m.rows(), m.cols(), |j, i| m.get(j, i) / masses[j].sqrt())
    };
    let lifted = DualPair::new(*pair.space(), scale(pair.vectors()), scale(pair.functionals()))?;
    let measure = FiniteMeasure::new((0..pair.n()).map(|j| format!("cell{j}")).collect(), masses.to_vec())?;
    ContinuousAsf::new(measure, lifted)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousMetrics {
    pub crms: f64,
    pub cpfp: f64,
    pub correlation: f64,
    /// Here `gamma` is the common value of `|G_αβ|`, not its square.
    pub equiangular: Equiangularity,
}

pub fn cont_metrics(casf: &ContinuousAsf, tol: f64) -> Result<ContinuousMetrics> {
    let big_m = casf.require_offdiag()?;
    casf.require_normalized()?;
    let g = casf.pair.gram();
    let w = casf.w();
    let n = w.len();
    let (mut cross, mut scale, mut cpfp) = (0.0, 0.0, 0.0);
    let mut mags = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let t = (g.get(a, b) * g.get(b, a)).re * w[a] * w[b];
            cpfp += t;
            if a != b {
                cross += t;
                scale += t.abs();
                mags.push(g.get(a, b).norm());
            }
        }
    }
    let correlation = mags.iter().cloned().fold(0.0, f64::max);
    Ok(ContinuousMetrics {
        crms: sqrt_radicand(cross / big_m, scale / big_m)?,
        cpfp,
        correlation,
        equiangular: spread(&mags, tol),
    })
}

/// All continuous checks for the requested orders and exponents.
pub fn continuous_report(casf: &ContinuousAsf, req: &ReportRequest, cfg: &BoundConfig) -> Result<BoundReport> {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut skipped = Vec::new();
    if let Some(&m) = req.orders.iter().find(|&&m| m == 0) {
        return Err(Error::InvalidArgument(format!("order must be >= 1, got {m}")));
    }
    for &p in &req.p_list {
        bounds::validate_p(p)?;
    }
    let degenerate = casf.require_offdiag().is_err();
    for &m in &req.orders {
        match weighted_order_records(&casf.pair, casf.w(), m, cfg) {
            Ok((sum, prod, single, diag)) => {
                records.push(sum);
                records.extend(prod);
                records.extend(single);
                diagnostics.push(diag);
            }
            Err(e) => skipped.push(format!("order {m}: {e}")),
        }
    }
    if degenerate {
        skipped.push("max forms: single atom, no off-diagonal mass".into());
    }
    match eigen(&cont_frame_operator(casf)) {
        Ok(spectrum) => {
            let tr = cont_trace(casf);
            for &r in &req.trace_powers {
                records.push(weighted_trace_power_record(&casf.pair, r, &spectrum, tr, cfg));
            }
        }
        Err(e) => skipped.push(format!("trace powers: {e}")),
    }
    for &p in &req.p_list {
        match cont_p_check(casf, p, cfg) {
            Ok(r) => records.push(r),
            Err(e) => skipped.push(format!("p-sum p={p}: {e}")),
        }
    }
    Ok(BoundReport { summary: PairSummary::of(&casf.pair), records, diagnostics, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asf::{Exponent, Field};
    use crate::bounds::{discrete_welch_max_check, discrete_welch_sum_check, p_sum_check};
    use crate::fixtures;

    fn cfg() -> BoundConfig {
        BoundConfig::default()
    }

    #[test]
    fn measure_bookkeeping() {
        let m = FiniteMeasure::new(vec!["a".into(), "b".into()], vec![1.5, 0.5]).unwrap();
        assert_eq!(m.total_mass(), 2.0);
        assert_eq!(m.diag_mass(), 2.5);
        assert_eq!(m.offdiag_mass(), 1.5);
        assert!(matches!(
            FiniteMeasure::new(vec!["a".into()], vec![0.0]),
            Err(Error::NonPositiveMass { index: 0, .. })
        ));
        assert!(FiniteMeasure::new(vec!["a".into()], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn frame_operator_reductions() {
        let mb = fixtures::mercedes_benz();
        let c = ContinuousAsf::counting(mb.clone());
        assert_eq!(cont_frame_operator(&c), mb.frame_operator());
        let half = ContinuousAsf::new(FiniteMeasure::uniform(3, 0.5).unwrap(), mb.clone()).unwrap();
        let want = mb.frame_operator().scale(Complex64::new(0.5, 0.0));
        assert!(cont_frame_operator(&half).sub(&want).unwrap().max_abs() < 1e-15);
        assert_eq!(cont_trace(&c), mb.trace_s());
        assert_eq!(cont_trace2(&c), mb.trace_s2());
    }

    #[test]
    fn traces_under_weights() {
        let mb = fixtures::mercedes_benz();
        let c = ContinuousAsf::new(FiniteMeasure::uniform(3, 1.0 / 3.0).unwrap(), mb).unwrap();
        assert!((cont_trace(&c).re - 1.0).abs() < 1e-15);
        // tight: Tra(S²) = (Tra S)²/d
        assert!((cont_trace2(&c).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn welch_counting_reduction() {
        let mb = fixtures::mercedes_benz();
        let c = ContinuousAsf::counting(mb.clone());
        let [sum, prod, single] = cont_welch_check(&c, 1, &cfg()).unwrap();
        let d_sum = discrete_welch_sum_check(&mb, 1, &cfg()).unwrap();
        let [d_prod, d_single] = discrete_welch_max_check(&mb, 1, &cfg()).unwrap();
        for (a, b) in [(&sum, &d_sum), (&prod, &d_prod), (&single, &d_single)] {
            assert_eq!((a.lhs, a.rhs, a.holds, a.equality, a.hypothesis_ok), (b.lhs, b.rhs, b.holds, b.equality, b.hypothesis_ok));
        }
    }

    #[test]
    fn uniform_mercedes_benz_floor() {
        let c = ContinuousAsf::new(FiniteMeasure::uniform(3, 2.0 / 3.0).unwrap(), fixtures::mercedes_benz()).unwrap();
        let [sum, prod, single] = cont_welch_check(&c, 1, &cfg()).unwrap();
        assert!((prod.rhs - 0.25).abs() < 1e-15 && prod.equality);
        assert!(single.equality);
        assert!((sum.lhs - 2.0).abs() < 1e-14 && sum.equality);
        let p = cont_p_check(&c, 4.0, &cfg()).unwrap();
        assert!(p.equality, "{p:?}");
    }

    #[test]
    fn degenerate_measure() {
        let one = fixtures::dual_basis(1, Exponent::Finite(2.0), Field::Real);
        let c = ContinuousAsf::counting(one);
        assert!(matches!(cont_welch_check(&c, 1, &cfg()), Err(Error::DegenerateMeasure)));
        assert!(matches!(cont_metrics(&c, 1e-9), Err(Error::DegenerateMeasure)));
    }

    #[test]
    fn trace_power_and_p() {
        let c = ContinuousAsf::counting(fixtures::mercedes_benz());
        assert!(cont_trace_power_check(&c, 1.0, &cfg()).unwrap().equality);
        let a = cont_p_check(&c, 4.0, &cfg()).unwrap();
        let b = p_sum_check(&fixtures::mercedes_benz(), 4.0, &cfg()).unwrap();
        assert!((a.lhs - b.lhs).abs() < 1e-12 && (a.rhs - b.rhs).abs() < 1e-12);
    }

    #[test]
    fn partition_examples() {
        let mb = fixtures::mercedes_benz();
        let c = partition_construction(&mb, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(c.pair().vectors(), mb.vectors());
        let c = partition_construction(&mb, &[4.0, 1.0, 1.0]).unwrap();
        assert!((c.pair().vector(0)[0] - 0.5).norm() < 1e-15);
        assert!(cont_frame_operator(&c).sub(&mb.frame_operator()).unwrap().max_abs() < 1e-15);
        assert!(matches!(partition_construction(&mb, &[1.0, -1.0, 1.0]), Err(Error::NonPositiveMass { index: 1, .. })));
    }

    #[test]
    fn metrics_examples() {
        let c = ContinuousAsf::counting(fixtures::mercedes_benz());
        let m = cont_metrics(&c, 1e-12).unwrap();
        assert!((m.crms - 0.5).abs() < 1e-15 && (m.correlation - 0.5).abs() < 1e-15);
        assert!(m.equiangular.flag && (m.equiangular.gamma - 0.5).abs() < 1e-15);
        assert!(m.cpfp >= 9.0 / 2.0 - 1e-12);

        let c = ContinuousAsf::counting(fixtures::dual_basis(3, Exponent::Finite(2.0), Field::Real));
        let m = cont_metrics(&c, 1e-12).unwrap();
        assert_eq!((m.crms, m.cpfp), (0.0, 3.0));
    }
}
