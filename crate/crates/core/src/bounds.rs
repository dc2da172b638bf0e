//! Welch-type inequalities for dual pairs.
//!
//! The inequalities are conditional on the (lifted) frame operator being
//! diagonalizable with non-negative spectrum. Checks never assume this: they
//! measure it and store the outcome in [`BoundRecord::hypothesis_ok`] next to
//! the numerical verdict.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asf::{DualPair, Field};
use crate::error::{Error, Result};
use crate::numkernel::{
    clamped_power_sum, eigen, hadamard_power, numerical_rank, spectral_verdict, DenseMatrix, Spectrum,
    SpectralVerdict, ToleranceConfig,
};
use crate::optimize::metrics::frame_correlation;
use crate::symlift::sym_dim;

/// Relative tolerance used to decide equality (and, symmetrically, holding).
pub const DEFAULT_EQUALITY_TOL: f64 = 1e-8;
/// Imaginary residue allowed in sums that are real under the hypotheses.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;
/// Pairs whose `max |f_j(τ_j) − 1|` exceeds this are not normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Exponents used by [`full_report`] for the trace-power family.
pub const DEFAULT_TRACE_POWERS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub tolerances: ToleranceConfig,
    pub equality_tol: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self { tolerances: ToleranceConfig::default(), equality_tol: DEFAULT_EQUALITY_TOL }
    }
}

/// One evaluated inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub equality: bool,
    pub hypothesis_ok: bool,
    pub notes: String,
}

impl BoundRecord {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, hypothesis_ok: bool, tol: f64) -> Self {
        let slack = lhs - rhs;
        let band = tol * rhs.abs().max(1.0);
        let mut rec = Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            holds: slack >= -band,
            equality: slack.abs() <= band,
            hypothesis_ok,
            notes: String::new(),
        };
        if rhs < 0.0 {
            rec.note("vacuous: rhs is negative");
        }
        rec
    }

    pub fn note(&mut self, text: impl AsRef<str>) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text.as_ref());
    }

    /// A violated inequality whose hypotheses were verified.
    pub fn is_alarm(&self) -> bool {
        self.hypothesis_ok && !self.holds
    }

    fn finish(mut self, failed_hypotheses: &[String]) -> Self {
        if !failed_hypotheses.is_empty() {
            self.hypothesis_ok = false;
            for f in failed_hypotheses {
                self.note(format!("hypothesis failed: {f}"));
            }
            if !self.holds {
                self.note("inequality violated but not asserted");
            }
        }
        self
    }
}

/// Spectral facts about the lifted frame operator of one order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiagnostic {
    pub order: usize,
    pub lifted_dim: usize,
    pub padding: usize,
    pub verdict: SpectralVerdict,
    pub eigvec_condition: f64,
    pub max_imag: f64,
    pub min_real: f64,
    pub gram_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub n: usize,
    pub d: usize,
    pub p: String,
    pub field: Field,
    pub normalized: bool,
    pub hilbert: bool,
}

impl PairSummary {
    pub fn of(pair: &DualPair) -> Self {
        Self {
            n: pair.n(),
            d: pair.dim(),
            p: pair.space().p.to_string(),
            field: pair.space().field,
            normalized: pair.is_normalized(NORMALIZATION_TOL),
            hilbert: pair.is_hilbert_structured(1e-12),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub summary: PairSummary,
    pub records: Vec<BoundRecord>,
    pub diagnostics: Vec<SpectralDiagnostic>,
    /// Checks that were not run, with the reason.
    pub skipped: Vec<String>,
}

impl BoundReport {
    pub fn alarms(&self) -> impl Iterator<Item = &BoundRecord> {
        self.records.iter().filter(|r| r.is_alarm())
    }
}

/// `(1/(n−1))·(n/C(d+m−1,m) − 1)`; negative values are returned unchanged.
pub fn welch_rhs(n: usize, d: usize, m: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewVectors(n));
    }
    let dim = sym_dim(d, m)? as f64;
    Ok((n as f64 / dim - 1.0) / (n as f64 - 1.0))
}

/// Hypothesis test on an `n × n` matrix sharing its non-zero spectrum with
/// the relevant frame operator.
struct Hypothesis {
    spectrum: Spectrum,
    verdict: SpectralVerdict,
}

impl Hypothesis {
    fn of(m: &DenseMatrix, cfg: &BoundConfig) -> Result<Self> {
        let spectrum = eigen(m)?;
        let verdict = spectral_verdict(&spectrum, &cfg.tolerances);
        Ok(Self { spectrum, verdict })
    }

    fn failures(&self, what: &str) -> Vec<String> {
        let mut out = Vec::new();
        if !self.verdict.diagonalizable {
            out.push(format!(
                "{what} not diagonalizable (eigenvector condition {:.3e})",
                self.spectrum.eigvec_condition
            ));
        }
        if !self.verdict.nonneg {
            out.push(format!("{what} has eigenvalues off the non-negative real axis"));
        }
        out
    }
}

/// Real part of `z`, or a failure message when the imaginary part is not
/// negligible relative to `scale` (the sum of the magnitudes of the terms).
fn real_part(z: Complex64, scale: f64, what: &str, failures: &mut Vec<String>) -> f64 {
    if z.im.abs() > IMAG_RESIDUE_TOL * z.re.abs() + 64.0 * f64::EPSILON * scale {
        failures.push(format!("{what} has imaginary residue {:.3e}", z.im));
    }
    z.re
}

/// Sums shared by the order-m checks.
struct OrderSums {
    /// Σ_{j,k} G_jk^m G_kj^m
    cross: Complex64,
    cross_scale: f64,
    /// Σ_j G_jj^m
    diag: Complex64,
    diag_scale: f64,
    /// Σ_j |G_jj|^{2m}
    diag_abs: f64,
    /// max_{j≠k} |G_jk G_kj|^m
    max_product: f64,
    /// (max_{j≠k} |G_jk|)^{2m}
    max_single: f64,
}

fn order_sums(gm: &DenseMatrix, weights: Option<&[f64]>) -> OrderSums {
    let n = gm.rows();
    let w = |j: usize| weights.map_or(1.0, |w| w[j]);
    let mut s = OrderSums {
        cross: Complex64::new(0.0, 0.0),
        cross_scale: 0.0,
        diag: Complex64::new(0.0, 0.0),
        diag_scale: 0.0,
        diag_abs: 0.0,
        max_product: 0.0,
        max_single: 0.0,
    };
    let mut max_entry: f64 = 0.0;
    for j in 0..n {
        let gjj = gm.get(j, j);
        s.diag += gjj * w(j);
        s.diag_scale += gjj.norm() * w(j);
        s.diag_abs += w(j) * w(j) * gjj.norm_sqr();
        for k in 0..n {
            let t = gm.get(j, k) * gm.get(k, j);
            s.cross += t * (w(j) * w(k));
            s.cross_scale += t.norm() * w(j) * w(k);
            if j != k {
                s.max_product = s.max_product.max(t.norm());
                max_entry = max_entry.max(gm.get(j, k).norm());
            }
        }
    }
    s.max_single = max_entry * max_entry;
    s
}

fn order_u32(m: usize) -> Result<u32> {
    if m == 0 {
        return Err(Error::InvalidArgument("order m must be >= 1".into()));
    }
    u32::try_from(m).map_err(|_| Error::Overflow(format!("order {m}")))
}

struct OrderRecords {
    sum: BoundRecord,
    max_product: Option<BoundRecord>,
    max_single: Option<BoundRecord>,
    hadamard_rank: BoundRecord,
    diagnostic: SpectralDiagnostic,
}

/// All order-m records. With `weights`, the sums are the atomic-measure
/// versions and the hypothesis matrix is `W^{1/2} G^{∘m} W^{1/2}`.
fn order_records(
    pair: &DualPair,
    m: usize,
    weights: Option<&[f64]>,
    prefix: &str,
    cfg: &BoundConfig,
) -> Result<OrderRecords> {
    let mu = order_u32(m)?;
    let n = pair.n();
    let dim = sym_dim(pair.dim(), m)?;
    let gm = hadamard_power(&pair.gram(), mu)?;
    let hyp_matrix = match weights {
        None => gm.clone(),
        Some(w) => {
            let r: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
            DenseMatrix::from_fn(n, n, |j, k| gm.get(j, k) * (r[j] * r[k]))
        }
    };
    let hyp = Hypothesis::of(&hyp_matrix, cfg)?;
    let rank = numerical_rank(&hyp_matrix, &cfg.tolerances);
    let sums = order_sums(&gm, weights);

    let mut failures = hyp.failures(&format!("lifted frame operator (m={m})"));
    let lhs = real_part(sums.cross, sums.cross_scale, "cross sum", &mut failures);
    let diag = real_part(sums.diag, sums.diag_scale, "diagonal sum", &mut failures);
    let rhs_sum = diag * diag / dim as f64;
    let tol = cfg.equality_tol;

    let sum = BoundRecord::new(format!("{prefix}welch_sum_m{m}"), lhs, rhs_sum, true, tol).finish(&failures);

    let rhs_rank = if rank == 0 { 0.0 } else { diag * diag / rank as f64 };
    let mut hadamard_rank =
        BoundRecord::new(format!("{prefix}hadamard_rank_m{m}"), lhs, rhs_rank, true, tol).finish(&failures);
    hadamard_rank.note(format!("rank {rank}"));

    let (total, diag_mass) = match weights {
        None => (n as f64, n as f64),
        Some(w) => (w.iter().sum::<f64>(), w.iter().map(|x| x * x).sum::<f64>()),
    };
    let offdiag = total * total - diag_mass;
    let (max_product, max_single) = if n >= 2 && offdiag > 0.0 {
        let rhs_max = (rhs_sum - sums.diag_abs) / offdiag;
        let prod = BoundRecord::new(format!("{prefix}welch_max_product_m{m}"), sums.max_product, rhs_max, true, tol)
            .finish(&failures);
        let single = BoundRecord::new(format!("{prefix}welch_max_single_m{m}"), sums.max_single, rhs_max, true, tol)
            .finish(&failures);
        (Some(prod), Some(single))
    } else {
        (None, None)
    };

    let min_real = hyp.spectrum.eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let diagnostic = SpectralDiagnostic {
        order: m,
        lifted_dim: dim,
        padding: dim.saturating_sub(n),
        verdict: hyp.verdict,
        eigvec_condition: hyp.spectrum.eigvec_condition,
        max_imag: hyp.spectrum.max_imag,
        min_real,
        gram_rank: rank,
    };
    Ok(OrderRecords { sum, max_product, max_single, hadamard_rank, diagnostic })
}

/// `Re Σ_{j,k} G_jk^m G_kj^m ≥ (Re Σ_j G_jj^m)² / C(d+m−1, m)`.
pub fn discrete_welch_sum_check(pair: &DualPair, m: usize, cfg: &BoundConfig) -> Result<BoundRecord> {
    Ok(order_records(pair, m, None, "", cfg)?.sum)
}

/// Product form `max_{j≠k}|G_jk G_kj|^m` and single form `(max_{j≠k}|G_jk|)^{2m}`
/// against `(sum rhs − Σ_j |G_jj|^{2m}) / (n² − n)`.
pub fn discrete_welch_max_check(pair: &DualPair, m: usize, cfg: &BoundConfig) -> Result<[BoundRecord; 2]> {
    if pair.n() < 2 {
        return Err(Error::TooFewVectors(pair.n()));
    }
    let r = order_records(pair, m, None, "", cfg)?;
    Ok([r.max_product.expect("n >= 2"), r.max_single.expect("n >= 2")])
}

/// Sum form with `d` replaced by the numerical rank of `G^{∘m}`.
pub fn hadamard_rank_check(pair: &DualPair, m: usize, cfg: &BoundConfig) -> Result<BoundRecord> {
    Ok(order_records(pair, m, None, "", cfg)?.hadamard_rank)
}

/// Sum form (and, for `n ≥ 2`, product max form) with `d` replaced by the
/// numerical rank of the Gram matrix.
pub fn gram_rank_check(pair: &DualPair, cfg: &BoundConfig) -> Result<Vec<BoundRecord>> {
    let g = pair.gram();
    let n = pair.n();
    let rank = numerical_rank(&g, &cfg.tolerances);
    let hyp = Hypothesis::of(&g, cfg)?;
    let sums = order_sums(&g, None);
    let mut failures = hyp.failures("frame operator");
    let lhs = real_part(sums.cross, sums.cross_scale, "cross sum", &mut failures);
    let diag = real_part(sums.diag, sums.diag_scale, "diagonal sum", &mut failures);
    let rhs = if rank == 0 { 0.0 } else { diag * diag / rank as f64 };
    let mut out = Vec::with_capacity(2);
    let mut sum = BoundRecord::new("gram_rank_sum", lhs, rhs, true, cfg.equality_tol).finish(&failures);
    sum.note(format!("rank {rank}"));
    out.push(sum);
    if n >= 2 {
        let rhs_max = (rhs - sums.diag_abs) / (n * n - n) as f64;
        let mut rec =
            BoundRecord::new("gram_rank_max_product", sums.max_product, rhs_max, true, cfg.equality_tol).finish(&failures);
        rec.note(format!("rank {rank}"));
        out.push(rec);
    }
    Ok(out)
}

fn trace_power_record(pair: &DualPair, r: f64, cfg: &BoundConfig, prefix: &str, spectrum: &Spectrum, trace: Complex64) -> BoundRecord {
    let d = pair.dim() as f64;
    let verdict = spectral_verdict(spectrum, &cfg.tolerances);
    let mut failures = Vec::new();
    if !verdict.nonneg {
        failures.push("frame operator has eigenvalues off the non-negative real axis".to_string());
    }
    if !verdict.diagonalizable {
        failures.push(format!(
            "frame operator not diagonalizable (eigenvector condition {:.3e})",
            spectrum.eigvec_condition
        ));
    }
    let tr_pow = clamped_power_sum(spectrum, r);
    let jensen = trace.re.max(0.0).powf(r) / d.powf(r - 1.0);
    let name = format!("{prefix}trace_power_r{r}");
    let rec = if r >= 1.0 {
        BoundRecord::new(name, tr_pow, jensen, true, cfg.equality_tol)
    } else {
        let mut rec = BoundRecord::new(name, jensen, tr_pow, true, cfg.equality_tol);
        rec.note("reversed direction for r < 1: lhs is (Re Tra S)^r / d^(r-1), rhs is Tra(S^r)");
        rec
    };
    rec.finish(&failures)
}

/// Jensen bound `Tra(S^r) ≥ (Re Tra S)^r / d^{r−1}` for `r ≥ 1`, reversed for
/// `0 < r < 1`. For `r < 1` the record stores the sides swapped so that
/// `lhs ≥ rhs` is always the asserted direction.
pub fn trace_power_check(pair: &DualPair, r: f64, cfg: &BoundConfig) -> Result<BoundRecord> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("trace power exponent must be positive, got {r}")));
    }
    let spectrum = eigen(&pair.frame_operator())?;
    if !spectral_verdict(&spectrum, &cfg.tolerances).nonneg {
        return Err(Error::NegativeSpectrum);
    }
    Ok(trace_power_record(pair, r, cfg, "", &spectrum, pair.trace_s()))
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p-sum bound needs 2 < p < inf, got {p}")));
    }
    Ok(())
}

/// `Σ_{j,k} |G_jk G_kj|^{p/2} ≥ n(n−1)((n−d)/(d(n−1)))^{p/2} + n` for
/// normalized pairs and `2 < p < ∞`.
pub fn p_sum_check(pair: &DualPair, p: f64, cfg: &BoundConfig) -> Result<BoundRecord> {
    check_p(p)?;
    let dev = pair.normalization_report().max_pairing_dev;
    if dev > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(dev));
    }
    let (n, d) = (pair.n(), pair.dim());
    if n < d {
        return Err(Error::DegenerateCount { n, d });
    }
    let g = pair.gram();
    let hyp = Hypothesis::of(&g, cfg)?;
    let failures = hyp.failures("frame operator");
    let mut lhs = 0.0;
    for j in 0..n {
        for k in 0..n {
            lhs += (g.get(j, k) * g.get(k, j)).norm().powf(p / 2.0);
        }
    }
    let (nf, df) = (n as f64, d as f64);
    let rhs = if n == 1 { nf } else { nf * (nf - 1.0) * ((nf - df) / (df * (nf - 1.0))).powf(p / 2.0) + nf };
    Ok(BoundRecord::new(format!("p_sum_p{p}"), lhs, rhs, true, cfg.equality_tol).finish(&failures))
}

/// Maximal number of equiangular lines: `d²` over ℂ, `d(d+1)/2` over ℝ.
pub fn gerzon(d: usize, field: Field) -> usize {
    match field {
        Field::Complex => d * d,
        Field::Real => d * (d + 1) / 2,
    }
}

/// A closed-form lower bound on `max_{j≠k} |⟨τ_j, τ_k⟩|` for unit vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBound {
    pub name: String,
    pub rhs: Option<f64>,
    pub applicable: bool,
    pub note: String,
}

impl ClassicalBound {
    fn applicable(name: &str, rhs: f64) -> Self {
        Self { name: name.into(), rhs: Some(rhs), applicable: true, note: String::new() }
    }

    fn not_applicable(name: &str, note: impl Into<String>) -> Self {
        Self { name: name.into(), rhs: None, applicable: false, note: note.into() }
    }
}

/// Bukh–Cox, orthoplex, Levenstein and exponential bounds for `n` unit
/// vectors in `𝕂^d`.
pub fn classical_bounds(n: usize, d: usize, field: Field) -> Result<Vec<ClassicalBound>> {
    if n < 2 {
        return Err(Error::TooFewVectors(n));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let m = match field {
        Field::Real => 0.5,
        Field::Complex => 1.0,
    };
    let (nf, df) = (n as f64, d as f64);
    let z = gerzon(d, field);
    let mut out = Vec::with_capacity(4);

    out.push(if n > d {
        let zz = gerzon(n - d, field) as f64;
        let nd = nf - df;
        let denom = nf * (1.0 + m * (nd - 1.0) * (1.0 / m + nd).sqrt()) - zz;
        ClassicalBound::applicable("bukh_cox", zz / denom)
    } else {
        ClassicalBound::not_applicable("bukh_cox", "needs n > d")
    });

    out.push(if n > z {
        ClassicalBound::applicable("orthoplex", 1.0 / df.sqrt())
    } else {
        ClassicalBound::not_applicable("orthoplex", format!("needs n > {z}"))
    });

    out.push(if n > z {
        let num = nf * (m + 1.0) - df * (m * df + 1.0);
        let den = (nf - df) * (m * df + 1.0);
        ClassicalBound::applicable("levenstein", (num / den).sqrt())
    } else {
        ClassicalBound::not_applicable("levenstein", format!("needs n > {z}"))
    });

    out.push(if d >= 2 {
        ClassicalBound::applicable("exponential", 1.0 - 2.0 * nf.powf(-1.0 / (df - 1.0)))
    } else {
        ClassicalBound::not_applicable("exponential", "degenerate dimension d = 1")
    });
    Ok(out)
}

fn classical_records(pair: &DualPair, cfg: &BoundConfig) -> Result<Vec<BoundRecord>> {
    let lhs = frame_correlation(pair)?;
    let unit = pair.normalization_report().max_dev() <= NORMALIZATION_TOL;
    let hilbert = pair.is_hilbert_structured(1e-12) && unit;
    Ok(classical_bounds(pair.n(), pair.dim(), pair.space().field)?
        .into_iter()
        .filter_map(|b| {
            let rhs = b.rhs?;
            let mut rec = BoundRecord::new(format!("classical_{}", b.name), lhs, rhs, hilbert, cfg.equality_tol);
            if !hilbert {
                rec.note("Hilbert reference");
            }
            Some(rec)
        })
        .collect())
}

/// Trace-power exponents, orders and p values requested for a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRequest {
    pub orders: Vec<usize>,
    pub p_list: Vec<f64>,
    pub trace_powers: Vec<f64>,
}

impl ReportRequest {
    pub fn new(orders: Vec<usize>, p_list: Vec<f64>) -> Self {
        Self { orders, p_list, trace_powers: DEFAULT_TRACE_POWERS.to_vec() }
    }

    fn validate(&self) -> Result<()> {
        if let Some(&m) = self.orders.iter().find(|&&m| m == 0) {
            return Err(Error::InvalidArgument(format!("order must be >= 1, got {m}")));
        }
        for &p in &self.p_list {
            check_p(p)?;
        }
        if let Some(&r) = self.trace_powers.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidArgument(format!("trace power exponent must be positive, got {r}")));
        }
        Ok(())
    }
}

/// Runs every applicable check. Order-m groups are evaluated in parallel and
/// reassembled in request order.
pub fn full_report(pair: &DualPair, req: &ReportRequest, cfg: &BoundConfig) -> Result<BoundReport> {
    req.validate()?;
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut skipped = Vec::new();

    let per_order: Vec<(usize, Result<OrderRecords>)> =
        req.orders.par_iter().map(|&m| (m, order_records(pair, m, None, "", cfg))).collect();
    for (m, res) in per_order {
        match res {
            Ok(o) => {
                records.push(o.sum);
                records.extend(o.max_product);
                records.extend(o.max_single);
                records.push(o.hadamard_rank);
                diagnostics.push(o.diagnostic);
            }
            Err(e) => skipped.push(format!("order {m}: {e}")),
        }
    }

    match gram_rank_check(pair, cfg) {
        Ok(r) => records.extend(r),
        Err(e) => skipped.push(format!("gram rank: {e}")),
    }

    match eigen(&pair.frame_operator()) {
        Ok(spectrum) => {
            let tr = pair.trace_s();
            for &r in &req.trace_powers {
                records.push(trace_power_record(pair, r, cfg, "", &spectrum, tr));
            }
        }
        Err(e) => skipped.push(format!("trace powers: {e}")),
    }

    for &p in &req.p_list {
        match p_sum_check(pair, p, cfg) {
            Ok(r) => records.push(r),
            Err(e) => skipped.push(format!("p-sum p={p}: {e}")),
        }
    }

    if pair.n() >= 2 {
        records.extend(classical_records(pair, cfg)?);
    } else {
        skipped.push("max forms and classical bounds: need at least 2 vectors".into());
    }

    Ok(BoundReport { summary: PairSummary::of(pair), records, diagnostics, skipped })
}

// Weighted versions reused by the continuous module.
pub(crate) fn weighted_order_records(
    pair: &DualPair,
    weights: &[f64],
    m: usize,
    cfg: &BoundConfig,
) -> Result<(BoundRecord, Option<BoundRecord>, Option<BoundRecord>, SpectralDiagnostic)> {
    let o = order_records(pair, m, Some(weights), "cont_", cfg)?;
    Ok((o.sum, o.max_product, o.max_single, o.diagnostic))
}

pub(crate) fn weighted_trace_power_record(
    pair: &DualPair,
    r: f64,
    spectrum: &Spectrum,
    trace: Complex64,
    cfg: &BoundConfig,
) -> BoundRecord {
    trace_power_record(pair, r, cfg, "cont_", spectrum, trace)
}

pub(crate) fn hypothesis_failures(m: &DenseMatrix, what: &str, cfg: &BoundConfig) -> Result<Vec<String>> {
    Ok(Hypothesis::of(m, cfg)?.failures(what))
}

pub(crate) fn validate_p(p: f64) -> Result<()> {
    check_p(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asf::{Exponent, LpSpace};
    use crate::fixtures;

    fn cfg() -> BoundConfig {
        BoundConfig::default()
    }

    #[test]
    fn welch_rhs_values() {
        assert!((welch_rhs(4, 2, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(welch_rhs(5, 5, 1).unwrap(), 0.0);
        assert!((welch_rhs(4, 2, 2).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(welch_rhs(3, 5, 1).unwrap() < 0.0);
        assert!(matches!(welch_rhs(1, 2, 1), Err(Error::TooFewVectors(1))));
    }

    #[test]
    fn sum_check_examples() {
        for d in 1..5 {
            let r = discrete_welch_sum_check(&fixtures::dual_basis(d, Exponent::Finite(2.0), Field::Real), 1, &cfg()).unwrap();
            assert_eq!((r.lhs, r.rhs), (d as f64, d as f64));
            assert!(r.equality && r.hypothesis_ok);
        }
        let r = discrete_welch_sum_check(&fixtures::mercedes_benz(), 1, &cfg()).unwrap();
        assert!((r.lhs - 4.5).abs() < 1e-14 && (r.rhs - 4.5).abs() < 1e-14 && r.equality);

        let r = discrete_welch_sum_check(&fixtures::duplicated_basis(), 1, &cfg()).unwrap();
        assert!((r.lhs - 5.0).abs() < 1e-14 && (r.rhs - 4.5).abs() < 1e-14);
        assert!(r.holds && !r.equality && r.hypothesis_ok);
    }

    #[test]
    fn max_check_examples() {
        let [prod, single] = discrete_welch_max_check(&fixtures::mercedes_benz(), 1, &cfg()).unwrap();
        for r in [&prod, &single] {
            assert!((r.lhs - 0.25).abs() < 1e-14 && (r.rhs - 0.25).abs() < 1e-14 && r.equality);
        }
        let [prod, _] = discrete_welch_max_check(&fixtures::sic_d2(), 2, &cfg()).unwrap();
        assert!((prod.lhs - 1.0 / 9.0).abs() < 1e-14 && (prod.rhs - 1.0 / 9.0).abs() < 1e-14 && prod.equality);
        let [prod, _] = discrete_welch_max_check(&fixtures::dual_basis(3, Exponent::Infinity, Field::Real), 1, &cfg()).unwrap();
        assert_eq!((prod.lhs, prod.rhs), (0.0, 0.0));
        assert!(prod.equality);

        let one = DualPair::from_real_rows(LpSpace::hilbert(1, Field::Real), &[vec![1.0]], &[vec![1.0]]).unwrap();
        assert!(matches!(discrete_welch_max_check(&one, 1, &cfg()), Err(Error::TooFewVectors(1))));
    }

    #[test]
    fn rank_checks() {
        let r = gram_rank_check(&fixtures::mercedes_benz(), &cfg()).unwrap();
        assert!(r[0].notes.contains("rank 2") && r[0].equality);

        // three copies of e1 with e1* duals: rank 1, lhs = rhs = 9
        let sp = LpSpace::hilbert(2, Field::Real);
        let e = vec![vec![1.0, 0.0]; 3];
        let deg = DualPair::from_real_rows(sp, &e, &e).unwrap();
        let r = gram_rank_check(&deg, &cfg()).unwrap();
        assert_eq!((r[0].lhs, r[0].rhs), (9.0, 9.0));

        let h = hadamard_rank_check(&fixtures::mercedes_benz(), 2, &cfg()).unwrap();
        assert!(h.notes.contains("rank 3"));
        assert!((h.rhs - 3.0).abs() < 1e-13 && (h.lhs - 3.375).abs() < 1e-13 && h.holds);

        let id = fixtures::dual_basis(4, Exponent::Finite(2.0), Field::Complex);
        let h = hadamard_rank_check(&id, 3, &cfg()).unwrap();
        assert!(h.equality && h.lhs == 4.0);
    }

    #[test]
    fn trace_power_examples() {
        let pair = fixtures::duplicated_basis();
        let r = trace_power_check(&pair, 2.0, &cfg()).unwrap();
        assert!((r.lhs - 5.0).abs() < 1e-13 && (r.rhs - 4.5).abs() < 1e-13 && r.holds);
        let r = trace_power_check(&pair, 1.0, &cfg()).unwrap();
        assert!(r.equality);
        let r = trace_power_check(&pair, 0.5, &cfg()).unwrap();
        assert!(r.holds && r.notes.contains("reversed"));
        for r in [0.3, 1.0, 2.5] {
            let rec = trace_power_check(&fixtures::dual_basis(3, Exponent::Finite(2.0), Field::Real), r, &cfg()).unwrap();
            assert!(rec.equality);
        }
        assert!(matches!(trace_power_check(&fixtures::rotating_pair(), 2.0, &cfg()), Err(Error::NegativeSpectrum)));
        assert!(trace_power_check(&pair, 0.0, &cfg()).is_err());
    }

    #[test]
    fn p_sum_examples() {
        let r = p_sum_check(&fixtures::mercedes_benz(), 4.0, &cfg()).unwrap();
        assert!((r.rhs - 3.375).abs() < 1e-13 && (r.lhs - 3.375).abs() < 1e-13 && r.equality);
        let r = p_sum_check(&fixtures::dual_basis(4, Exponent::Finite(2.0), Field::Real), 4.0, &cfg()).unwrap();
        assert_eq!((r.lhs, r.rhs), (4.0, 4.0));

        let mb = fixtures::mercedes_benz();
        let near = p_sum_check(&mb, 2.0001, &cfg()).unwrap();
        assert!((near.rhs - 4.5).abs() < 1e-3);

        assert!(p_sum_check(&mb, 2.0, &cfg()).is_err());
        let doubled = DualPair::new(*mb.space(), mb.vectors().scale(Complex64::new(2.0, 0.0)), mb.functionals().clone()).unwrap();
        assert!(matches!(p_sum_check(&doubled, 4.0, &cfg()), Err(Error::NotNormalized(_))));
        let e = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let few = DualPair::from_real_rows(LpSpace::hilbert(3, Field::Real), &e, &e).unwrap();
        assert!(matches!(p_sum_check(&few, 4.0, &cfg()), Err(Error::DegenerateCount { n: 2, d: 3 })));
    }

    #[test]
    fn gerzon_values() {
        assert_eq!(gerzon(2, Field::Complex), 4);
        assert_eq!(gerzon(3, Field::Real), 6);
        assert_eq!(gerzon(1, Field::Real), 1);
        assert_eq!(gerzon(1, Field::Complex), 1);
    }

    fn find(b: &[ClassicalBound], name: &str) -> ClassicalBound {
        b.iter().find(|x| x.name == name).unwrap().clone()
    }

    #[test]
    fn classical_values() {
        let b = classical_bounds(20, 4, Field::Complex).unwrap();
        assert_eq!(find(&b, "orthoplex").rhs, Some(0.5));
        let b = classical_bounds(5, 2, Field::Complex).unwrap();
        assert!((find(&b, "levenstein").rhs.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let b = classical_bounds(2, 2, Field::Real).unwrap();
        assert_eq!(find(&b, "exponential").rhs, Some(0.0));
        assert!(!find(&b, "bukh_cox").applicable);
        let b = classical_bounds(4, 2, Field::Complex).unwrap();
        assert!((find(&b, "bukh_cox").rhs.unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(!find(&b, "orthoplex").applicable);
        let b = classical_bounds(3, 1, Field::Real).unwrap();
        assert!(!find(&b, "exponential").applicable);
        assert!(classical_bounds(1, 2, Field::Real).is_err());
    }

    #[test]
    fn reports() {
        let req = ReportRequest::new(vec![1, 2], vec![4.0]);
        let rep = full_report(&fixtures::dual_basis(3, Exponent::Finite(2.0), Field::Real), &req, &cfg()).unwrap();
        assert!(rep.records.iter().all(|r| r.holds && r.hypothesis_ok), "{:#?}", rep.records);
        assert!(rep.records.iter().find(|r| r.name == "welch_sum_m1").unwrap().equality);
        assert_eq!(rep.diagnostics.len(), 2);

        let rep = full_report(&fixtures::jordan_pair(), &ReportRequest::new(vec![1], vec![]), &cfg()).unwrap();
        let sum = rep.records.iter().find(|r| r.name == "welch_sum_m1").unwrap();
        assert!(!sum.hypothesis_ok && sum.notes.contains("not diagonalizable"));
        assert_eq!(rep.alarms().count(), 0);

        let rep = full_report(&fixtures::rotating_pair(), &ReportRequest::new(vec![1], vec![]), &cfg()).unwrap();
        let sum = rep.records.iter().find(|r| r.name == "welch_sum_m1").unwrap();
        assert!(!sum.holds && !sum.hypothesis_ok && sum.notes.contains("not asserted"));
        assert_eq!(rep.alarms().count(), 0);

        assert!(full_report(&fixtures::mercedes_benz(), &ReportRequest::new(vec![0], vec![]), &cfg()).is_err());
    }

    #[test]
    fn record_flags() {
        let r = BoundRecord::new("x", 1.0, 1.0 + 1e-9, true, 1e-8);
        assert!(r.holds && r.equality);
        let r = BoundRecord::new("x", 1.0, 2.0, true, 1e-8);
        assert!(!r.holds && !r.equality && r.is_alarm());
        let r = BoundRecord::new("x", 1.0, -2.0, true, 1e-8);
        assert!(r.notes.contains("vacuous"));
    }
}
