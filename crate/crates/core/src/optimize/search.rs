//! Restarted local search over normalized dual pairs.
//!
//! For `1 < p < ∞` every unit vector `τ` has exactly one norming functional,
//! `f_i = |τ_i|^{p−2}·conj(τ_i)`, so the constraint set
//! `‖τ_j‖_p = ‖f_j‖_q = f_j(τ_j) = 1` is parametrized by free rows `u_j` via
//! `τ_j = u_j/‖u_j‖_p` and `f_j = J(τ_j)`. The search then runs L-BFGS on the
//! free rows with an exact gradient. For `p ∈ {1, ∞}` the norming functional
//! is not unique and the norms are not smooth, so a random coordinate search
//! moves `τ_j` and `f_j` together inside the exact constraint set.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asf::{DualPair, Exponent, Field, LpSpace, NormalizationReport};
use crate::bounds::welch_rhs;
use crate::error::{Error, Result};
use crate::numkernel::{eigen, spectral_verdict, DenseMatrix, ToleranceConfig};
use crate::optimize::metrics::{equiangularity, max_offdiag_abs};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Softmax temperature schedule for the correlation surrogate.
const BETA_START: f64 = 10.0;
const BETA_MAX: f64 = 2.0e6;
/// Window over which a stalled objective counts as converged.
const STALL_WINDOW: usize = 200;
const LBFGS_MEMORY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Objective {
    /// Frame correlation `max_{j≠k} |G_jk|`.
    Correlation,
    /// Pseudo frame potential `Re Σ G_jk G_kj`.
    Potential,
    /// `Σ_{j≠k} (|G_jk|² − target)² + ‖S − (n/d)·I‖_F²`.
    Equiangular { target: f64 },
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::Correlation => "correlation",
            Objective::Potential => "potential",
            Objective::Equiangular { .. } => "equiangular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: usize,
    /// Iteration budget per restart.
    pub max_iters: usize,
    /// Length of the very first trial step.
    pub step_init: f64,
    /// Shrink factor for the proposal scale of the non-smooth search.
    pub step_decay: f64,
    /// Weight for squared constraint residuals. Both search paths stay on the
    /// constraint set by construction, so no penalty term is ever added; the
    /// field is validated and serialized so configurations round-trip.
    pub penalty_weight: f64,
    pub tol: f64,
    pub objective: Objective,
    pub record_trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 32,
            max_iters: 5000,
            step_init: 0.1,
            step_decay: 0.99,
            penalty_weight: 10.0,
            tol: 1e-9,
            objective: Objective::Correlation,
            record_trace: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if self.restarts == 0 {
            return bad("restarts must be >= 1");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1");
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return bad("step_init must be positive");
        }
        if !(self.step_decay > 0.0 && self.step_decay < 1.0) {
            return bad("step_decay must lie in (0, 1)");
        }
        if !(self.penalty_weight > 0.0 && self.penalty_weight.is_finite()) {
            return bad("penalty_weight must be positive");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        if let Objective::Equiangular { target } = self.objective {
            if !(target >= 0.0 && target.is_finite()) {
                return bad("equiangular target must be non-negative");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub restart: usize,
    pub iter: usize,
    pub correlation: f64,
    pub hypothesis_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchResiduals {
    /// `max_{j≠k} ||G_jk|² − γ|` with γ the equiangular target, or the mean
    /// of `|G_jk|²` for other objectives.
    pub equiangular_dev: f64,
    /// `‖S − (Tra S / d)·I‖_F`.
    pub tightness: f64,
    /// `Re Tra(S²) − n²/d`.
    pub potential_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub pair: DualPair,
    pub objective: Objective,
    pub objective_value: f64,
    /// `correlation − √welch_rhs(n, d, 1)` for the correlation objective when
    /// the Welch bound is not vacuous.
    pub welch_gap: Option<f64>,
    pub feasibility: NormalizationReport,
    pub residuals: SearchResiduals,
    pub iters_used: usize,
    pub converged: bool,
    pub seed: u64,
    /// Index of the winning restart.
    pub restart: usize,
    pub trace: Vec<TracePoint>,
}

impl SearchResult {
    /// `max(equiangular_dev, tightness)`, the quantity an equiangular tight
    /// search drives to zero.
    pub fn etf_residual(&self) -> f64 {
        self.residuals.equiangular_dev.max(self.residuals.tightness)
    }
}

/// Minimizes frame correlation over normalized pairs.
pub fn grassmannian_search(space: LpSpace, n: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    search(space, n, &SearchConfig { objective: Objective::Correlation, ..*cfg })
}

/// Minimizes the pseudo frame potential over normalized pairs.
pub fn potential_minimize(space: LpSpace, n: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    if n < space.dim {
        return Err(Error::DegenerateCount { n, d: space.dim });
    }
    search(space, n, &SearchConfig { objective: Objective::Potential, ..*cfg })
}

/// Searches for `d²` vectors in `ℂ^d` (ℓ2) that are `1/(d+1)`-equiangular and tight.
pub fn etf_search(d: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    etf_search_in(LpSpace::hilbert(d, Field::Complex), cfg)
}

/// Equiangular tight search with `n = d²` in an arbitrary ℓp space.
pub fn etf_search_in(space: LpSpace, cfg: &SearchConfig) -> Result<SearchResult> {
    let d = space.dim;
    if d < 2 {
        return Err(Error::InvalidArgument("equiangular tight search needs d >= 2".into()));
    }
    let target = 1.0 / (d as f64 + 1.0);
    search(space, d * d, &SearchConfig { objective: Objective::Equiangular { target }, ..*cfg })
}

/// Runs `cfg.restarts` independent local searches for `cfg.objective` and
/// returns the best, ties broken by feasibility then restart index.
pub fn search(space: LpSpace, n: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::TooFewVectors(n));
    }
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|idx| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, idx as u64));
            if space.p.is_smooth() {
                smooth_run(space, n, cfg, idx, &mut rng)
            } else {
                nonsmooth_run(space, n, cfg, idx, &mut rng)
            }
        })
        .collect();

    let mut best: Option<(usize, f64, f64)> = None;
    for (idx, run) in runs.iter().enumerate() {
        let feas = run.pair.normalization_report().max_dev();
        let key = (run.value, feas);
        let better = match best {
            None => true,
            Some((_, v, f)) => key.0 < v || (key.0 == v && key.1 < f),
        };
        if better {
            best = Some((idx, key.0, key.1));
        }
    }
    let (idx, _, _) = best.expect("at least one restart");
    let trace = if cfg.record_trace { runs.iter().flat_map(|r| r.trace.iter().cloned()).collect() } else { Vec::new() };
    let run = runs.into_iter().nth(idx).expect("index in range");
    Ok(finish(run, idx, cfg, trace))
}

fn finish(run: Run, restart: usize, cfg: &SearchConfig, trace: Vec<TracePoint>) -> SearchResult {
    let pair = run.pair;
    let (n, d) = (pair.n() as f64, pair.dim() as f64);
    let g = pair.gram();
    let target = match cfg.objective {
        Objective::Equiangular { target } => Some(target),
        _ => None,
    };
    let equiangular_dev = match target {
        Some(t) => offdiag(&g).map(|z| (z.norm_sqr() - t).abs()).fold(0.0, f64::max),
        None => equiangularity(&pair, 0.0).map(|e| e.max_dev).unwrap_or(0.0),
    };
    let s = pair.frame_operator();
    let lambda = pair.trace_s() / d;
    let tightness = s.sub(&DenseMatrix::identity(pair.dim()).scale(lambda)).map(|m| m.frobenius_norm()).unwrap_or(f64::NAN);
    let residuals = SearchResiduals { equiangular_dev, tightness, potential_gap: pair.trace_s2().re - n * n / d };
    let welch_gap = match cfg.objective {
        Objective::Correlation => welch_rhs(pair.n(), pair.dim(), 1).ok().filter(|r| *r > 0.0).map(|r| run.value - r.sqrt()),
        _ => None,
    };
    SearchResult {
        feasibility: pair.normalization_report(),
        pair,
        objective: cfg.objective,
        objective_value: run.value,
        welch_gap,
        residuals,
        iters_used: run.iters,
        converged: run.converged,
        seed: cfg.seed,
        restart,
        trace,
    }
}

fn offdiag(g: &DenseMatrix) -> impl Iterator<Item = Complex64> + '_ {
    let n = g.rows();
    (0..n).flat_map(move |j| (0..n).filter(move |&k| k != j).map(move |k| g.get(j, k)))
}

/// SplitMix64 finalizer applied to `seed + idx·φ`.
fn sub_seed(seed: u64, idx: u64) -> u64 {
    let mut z = seed.wrapping_add(idx.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Run {
    pair: DualPair,
    /// True objective (not the smoothed surrogate).
    value: f64,
    iters: usize,
    converged: bool,
    trace: Vec<TracePoint>,
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, field: Field) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    match field {
        Field::Real => Complex64::new(re, 0.0),
        Field::Complex => Complex64::new(re, rng.sample(StandardNormal)),
    }
}

/// Objective value and `D_jk = ∂Φ/∂Re G_jk + i·∂Φ/∂Im G_jk`, plus, for the
/// equiangular objective, `E_ab` for the tightness term in `S`.
struct Derivs {
    value: f64,
    dg: Vec<Complex64>,
    ds: Option<Vec<Complex64>>,
}

fn gram_of(t: &[Complex64], f: &[Complex64], n: usize, d: usize) -> Vec<Complex64> {
    let mut g = vec![ZERO; n * n];
    for j in 0..n {
        let fj = &f[j * d..(j + 1) * d];
        for k in 0..n {
            g[j * n + k] = fj.iter().zip(&t[k * d..(k + 1) * d]).map(|(a, b)| a * b).sum();
        }
    }
    g
}

fn frame_op_of(t: &[Complex64], f: &[Complex64], n: usize, d: usize) -> Vec<Complex64> {
    let mut s = vec![ZERO; d * d];
    for j in 0..n {
        for a in 0..d {
            let ta = t[j * d + a];
            for b in 0..d {
                s[a * d + b] += ta * f[j * d + b];
            }
        }
    }
    s
}

fn max_offdiag_sq(g: &[Complex64], n: usize) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                m = m.max(g[j * n + k].norm_sqr());
            }
        }
    }
    m
}

/// Surrogate objective for a fixed softmax temperature `beta`.
fn derivs(obj: Objective, beta: f64, t: &[Complex64], f: &[Complex64], n: usize, d: usize, grad: bool) -> Derivs {
    let g = gram_of(t, f, n, d);
    let mut dg = if grad { vec![ZERO; n * n] } else { Vec::new() };
    match obj {
        Objective::Correlation => {
            let m = max_offdiag_sq(&g, n);
            let mut z = 0.0;
            for j in 0..n {
                for k in 0..n {
                    if j != k {
                        let e = (beta * (g[j * n + k].norm_sqr() - m)).exp();
                        z += e;
                        if grad {
                            dg[j * n + k] = g[j * n + k] * (2.0 * e);
                        }
                    }
                }
            }
            if grad {
                dg.iter_mut().for_each(|x| *x /= z);
            }
            Derivs { value: m + z.ln() / beta, dg, ds: None }
        }
        Objective::Potential => {
            let mut v = 0.0;
            for j in 0..n {
                for k in 0..n {
                    v += (g[j * n + k] * g[k * n + j]).re;
                    if grad {
                        dg[j * n + k] = g[k * n + j].conj() * 2.0;
                    }
                }
            }
            Derivs { value: v, dg, ds: None }
        }
        Objective::Equiangular { target } => {
            let mut v = 0.0;
            for j in 0..n {
                for k in 0..n {
                    if j != k {
                        let r = g[j * n + k].norm_sqr() - target;
                        v += r * r;
                        if grad {
                            dg[j * n + k] = g[j * n + k] * (4.0 * r);
                        }
                    }
                }
            }
            let c = n as f64 / d as f64;
            let mut s = frame_op_of(t, f, n, d);
            for a in 0..d {
                s[a * d + a] -= c;
            }
            v += s.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let ds = grad.then(|| s.iter().map(|z| z * 2.0).collect());
            Derivs { value: v, dg, ds }
        }
    }
}

/// Smooth-exponent state: free rows `u` (n × d) and the induced pair.
struct SmoothMap {
    n: usize,
    d: usize,
    p: f64,
    field: Field,
}

impl SmoothMap {
    #[cfg(test)]
    fn nvars(&self) -> usize {
        match self.field {
            Field::Real => self.n * self.d,
            Field::Complex => 2 * self.n * self.d,
        }
    }

    fn unpack(&self, x: &[f64]) -> Vec<Complex64> {
        match self.field {
            Field::Real => x.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
            Field::Complex => x.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect(),
        }
    }

    fn pack_grad(&self, g: &[Complex64]) -> Vec<f64> {
        match self.field {
            Field::Real => g.iter().map(|z| z.re).collect(),
            Field::Complex => g.iter().flat_map(|z| [z.re, z.im]).collect(),
        }
    }

    fn norm(&self, row: &[Complex64]) -> f64 {
        Exponent::Finite(self.p).norm(row)
    }

    /// `(τ, f, row norms)` for free rows `u`.
    fn pair_parts(&self, u: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>, Vec<f64>) {
        let (n, d, p) = (self.n, self.d, self.p);
        let mut t = vec![ZERO; n * d];
        let mut f = vec![ZERO; n * d];
        let mut norms = vec![0.0; n];
        for j in 0..n {
            let row = &u[j * d..(j + 1) * d];
            let nj = self.norm(row);
            norms[j] = nj;
            for i in 0..d {
                let ti = if nj > 0.0 { row[i] / nj } else { ZERO };
                t[j * d + i] = ti;
                f[j * d + i] = duality(ti, p);
            }
        }
        (t, f, norms)
    }

    fn value_grad(&self, obj: Objective, beta: f64, x: &[f64], grad: bool) -> (f64, Vec<f64>) {
        let (n, d, p) = (self.n, self.d, self.p);
        let u = self.unpack(x);
        let (t, f, norms) = self.pair_parts(&u);
        let dv = derivs(obj, beta, &t, &f, n, d, grad);
        if !grad {
            return (dv.value, Vec::new());
        }
        // gradients with respect to τ and f
        let mut gt = vec![ZERO; n * d];
        let mut gf = vec![ZERO; n * d];
        for j in 0..n {
            for k in 0..n {
                let djk = dv.dg[j * n + k];
                if djk == ZERO {
                    continue;
                }
                for i in 0..d {
                    gt[k * d + i] += djk * f[j * d + i].conj();
                    gf[j * d + i] += djk * t[k * d + i].conj();
                }
            }
        }
        if let Some(e) = &dv.ds {
            for j in 0..n {
                for a in 0..d {
                    for b in 0..d {
                        let eab = e[a * d + b];
                        gt[j * d + a] += eab * f[j * d + b].conj();
                        gf[j * d + b] += eab * t[j * d + a].conj();
                    }
                }
            }
        }
        // through f = J(τ)
        for idx in 0..n * d {
            gt[idx] += duality_pullback(t[idx], gf[idx], p);
        }
        // through τ = u / ‖u‖_p
        let mut gu = vec![ZERO; n * d];
        for j in 0..n {
            let nj = norms[j];
            if nj == 0.0 {
                continue;
            }
            let row = &u[j * d..(j + 1) * d];
            let a = &gt[j * d..(j + 1) * d];
            let inner: f64 = a.iter().zip(row).map(|(ai, ui)| (ai.conj() * ui).re).sum();
            for i in 0..d {
                let ui = row[i];
                let r = ui.norm();
                let gn = if r > 0.0 { ui * (r.powf(p - 2.0) * nj.powf(1.0 - p)) } else { ZERO };
                gu[j * d + i] = a[i] / nj - gn * (inner / (nj * nj));
            }
        }
        (dv.value, self.pack_grad(&gu))
    }

    fn to_pair(&self, space: LpSpace, x: &[f64]) -> DualPair {
        let (t, f, _) = self.pair_parts(&self.unpack(x));
        let (n, d) = (self.n, self.d);
        DualPair::new(space, DenseMatrix::new(n, d, t).unwrap(), DenseMatrix::new(n, d, f).unwrap())
            .expect("search iterate is a valid pair")
    }

    /// Rescales each free row to unit norm; the induced pair is unchanged.
    fn renormalize(&self, x: &mut [f64]) {
        let u = self.unpack(x);
        let w = match self.field {
            Field::Real => 1,
            Field::Complex => 2,
        };
        for j in 0..self.n {
            let nj = self.norm(&u[j * self.d..(j + 1) * self.d]);
            if nj > 0.0 {
                x[j * self.d * w..(j + 1) * self.d * w].iter_mut().for_each(|v| *v /= nj);
            }
        }
    }
}

/// The norming functional coordinate `|τ_i|^{p−2}·conj(τ_i)`.
fn duality(ti: Complex64, p: f64) -> Complex64 {
    let r = ti.norm();
    if r == 0.0 {
        ZERO
    } else {
        ti.conj() * r.powf(p - 2.0)
    }
}

/// Pulls a gradient `b` on `f_i = J(τ_i)` back to `τ_i`.
fn duality_pullback(ti: Complex64, b: Complex64, p: f64) -> Complex64 {
    let r = ti.norm();
    if r == 0.0 || b == ZERO {
        return ZERO;
    }
    let phase = ti / r;
    let w = b.conj() * phase.conj();
    phase * Complex64::new((p - 1.0) * w.re, w.im) * r.powf(p - 2.0)
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of minimizing one fixed surrogate.
enum StageEnd {
    /// Stationary point or no further decrease possible.
    Converged,
    /// Budget exhausted.
    Budget,
}

struct Lbfgs {
    s: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

impl Lbfgs {
    fn new() -> Self {
        Self { s: Vec::new(), y: Vec::new() }
    }

    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let k = self.s.len();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            let rho = 1.0 / dotv(&self.y[i], &self.s[i]);
            alpha[i] = rho * dotv(&self.s[i], &q);
            q.iter_mut().zip(&self.y[i]).for_each(|(qv, yv)| *qv -= alpha[i] * yv);
        }
        if let (Some(s), Some(y)) = (self.s.last(), self.y.last()) {
            let gamma = dotv(s, y) / dotv(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..k {
            let rho = 1.0 / dotv(&self.y[i], &self.s[i]);
            let b = rho * dotv(&self.y[i], &q);
            q.iter_mut().zip(&self.s[i]).for_each(|(qv, sv)| *qv += (alpha[i] - b) * sv);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        if dotv(&s, &y) > 1e-16 * dotv(&y, &y).sqrt() * dotv(&s, &s).sqrt() {
            if self.s.len() == LBFGS_MEMORY {
                self.s.remove(0);
                self.y.remove(0);
            }
            self.s.push(s);
            self.y.push(y);
        }
    }
}

fn smooth_run<R: Rng + ?Sized>(space: LpSpace, n: usize, cfg: &SearchConfig, restart: usize, rng: &mut R) -> Run {
    let p = space.p.as_f64();
    let map = SmoothMap { n, d: space.dim, p, field: space.field };
    let mut x: Vec<f64> = {
        let u: Vec<Complex64> = (0..n * space.dim).map(|_| gaussian(rng, space.field)).collect();
        map.pack_grad(&u)
    };
    map.renormalize(&mut x);
    let tol_cfg = ToleranceConfig::default();

    let annealed = matches!(cfg.objective, Objective::Correlation);
    let mut beta = if annealed { BETA_START } else { 1.0 };
    let mut iters = 0usize;
    let mut trace = Vec::new();
    let mut best_x = x.clone();
    let mut best_val = f64::INFINITY;
    let mut converged = false;
    let mut first_step = cfg.step_init;

    let true_value = |x: &[f64]| -> f64 {
        let v = map.value_grad(cfg.objective, BETA_MAX, x, false).0;
        match cfg.objective {
            Objective::Correlation => {
                let (t, f, _) = map.pair_parts(&map.unpack(x));
                max_offdiag_sq(&gram_of(&t, &f, n, space.dim), n).sqrt()
            }
            _ => v,
        }
    };

    loop {
        let last_stage = !annealed || beta >= BETA_MAX;
        let window = if last_stage { STALL_WINDOW } else { 20 };
        let stage_tol = if last_stage { cfg.tol } else { cfg.tol.max(1e-10) };
        let mut mem = Lbfgs::new();
        let (mut fx, mut gx) = map.value_grad(cfg.objective, beta, &x, true);
        let mut history: Vec<f64> = vec![fx];
        let end = loop {
            if iters >= cfg.max_iters {
                break StageEnd::Budget;
            }
            let gnorm = dotv(&gx, &gx).sqrt();
            if gnorm <= 1e-12 * fx.abs().max(1.0) {
                break StageEnd::Converged;
            }
            let mut dir = if mem.s.is_empty() {
                gx.iter().map(|g| -g * first_step / gnorm).collect()
            } else {
                mem.direction(&gx)
            };
            let mut slope = dotv(&gx, &dir);
            if slope >= 0.0 {
                mem = Lbfgs::new();
                dir = gx.iter().map(|g| -g * first_step / gnorm).collect();
                slope = dotv(&gx, &dir);
            }
            // Armijo backtracking
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..50 {
                let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
                let (fn_, gn) = map.value_grad(cfg.objective, beta, &xn, true);
                if fn_.is_finite() && fn_ <= fx + 1e-4 * step * slope {
                    accepted = Some((xn, fn_, gn));
                    break;
                }
                step *= 0.5;
            }
            iters += 1;
            let Some((xn, fn_, gn)) = accepted else {
                break StageEnd::Converged;
            };
            if mem.s.is_empty() {
                first_step *= step.max(1e-3);
            }
            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gn.iter().zip(&gx).map(|(a, b)| a - b).collect();
            mem.push(s, y);
            x = xn;
            fx = fn_;
            gx = gn;

            let tv = true_value(&x);
            if tv < best_val {
                best_val = tv;
                best_x.clone_from(&x);
            }
            if cfg.record_trace {
                trace.push(trace_point(&map, space, &x, restart, iters, &tol_cfg));
            }
            history.push(fx);
            if history.len() > window {
                let old = history[history.len() - 1 - window];
                if old - fx < stage_tol * fx.abs().max(1.0) {
                    break StageEnd::Converged;
                }
            }
        };
        match end {
            StageEnd::Budget => break,
            StageEnd::Converged if last_stage => {
                converged = true;
                break;
            }
            StageEnd::Converged => {
                beta = (beta * 2.0).min(BETA_MAX);
                map.renormalize(&mut x);
            }
        }
    }

    let tv = true_value(&x);
    if tv <= best_val {
        best_val = tv;
        best_x = x;
    }
    Run { pair: map.to_pair(space, &best_x), value: best_val, iters, converged, trace }
}

fn trace_point(map: &SmoothMap, space: LpSpace, x: &[f64], restart: usize, iter: usize, tol: &ToleranceConfig) -> TracePoint {
    let pair = map.to_pair(space, x);
    let g = pair.gram();
    let hypothesis_ok = if pair.is_hilbert_structured(0.0) {
        true
    } else {
        eigen(&g).map(|s| spectral_verdict(&s, tol).holds()).unwrap_or(false)
    };
    TracePoint { restart, iter, correlation: max_offdiag_abs(&g), hypothesis_ok }
}

/// Pair state for `p ∈ {1, ∞}` kept exactly on the constraint set.
struct Corner {
    n: usize,
    d: usize,
    infinity: bool,
    field: Field,
    t: Vec<Complex64>,
    f: Vec<Complex64>,
}

impl Corner {
    fn row(&self, j: usize) -> std::ops::Range<usize> {
        j * self.d..(j + 1) * self.d
    }

    /// Normalizes τ_j and rebuilds f_j as a norming functional, reusing the
    /// old f_j where the constraint leaves freedom.
    fn project_row(&mut self, j: usize) {
        let r = self.row(j);
        let t = &mut self.t[r.clone()];
        let f = &mut self.f[r];
        if self.infinity {
            let m = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
            t.iter_mut().for_each(|z| *z /= m);
            // f lives on the active set with non-negative weights summing to 1
            let active: Vec<bool> = t.iter().map(|z| z.norm() >= 1.0 - 1e-12).collect();
            let mut w: Vec<f64> = f.iter().zip(&active).map(|(fi, &a)| if a { fi.norm() } else { 0.0 }).collect();
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                let top = t.iter().map(|z| z.norm()).enumerate().fold((0, -1.0), |b, (i, v)| if v > b.1 { (i, v) } else { b }).0;
                w.iter_mut().enumerate().for_each(|(i, v)| *v = if i == top { 1.0 } else { 0.0 });
            } else {
                w.iter_mut().for_each(|v| *v /= total);
            }
            for i in 0..t.len() {
                if active[i] {
                    let mag = t[i].norm();
                    t[i] /= mag;
                    f[i] = t[i].conj() * w[i];
                } else {
                    f[i] = ZERO;
                }
            }
        } else {
            let s: f64 = t.iter().map(|z| z.norm()).sum();
            t.iter_mut().for_each(|z| *z /= s);
            for i in 0..t.len() {
                let m = t[i].norm();
                if m > 0.0 {
                    f[i] = t[i].conj() / m;
                } else if f[i].norm() > 1.0 {
                    f[i] /= f[i].norm();
                }
            }
        }
        if self.field == Field::Real {
            t.iter_mut().for_each(|z| z.im = 0.0);
            f.iter_mut().for_each(|z| z.im = 0.0);
        }
    }

    fn to_pair(&self, space: LpSpace) -> DualPair {
        DualPair::new(
            space,
            DenseMatrix::new(self.n, self.d, self.t.clone()).unwrap(),
            DenseMatrix::new(self.n, self.d, self.f.clone()).unwrap(),
        )
        .expect("search iterate is a valid pair")
    }

    fn value(&self, obj: Objective, beta: f64) -> f64 {
        derivs(obj, beta, &self.t, &self.f, self.n, self.d, false).value
    }

    fn true_value(&self, obj: Objective) -> f64 {
        match obj {
            Objective::Correlation => max_offdiag_sq(&gram_of(&self.t, &self.f, self.n, self.d), self.n).sqrt(),
            _ => self.value(obj, 1.0),
        }
    }
}

fn nonsmooth_run<R: Rng + ?Sized>(space: LpSpace, n: usize, cfg: &SearchConfig, restart: usize, rng: &mut R) -> Run {
    let d = space.dim;
    let mut st = Corner {
        n,
        d,
        infinity: space.p == Exponent::Infinity,
        field: space.field,
        t: (0..n * d).map(|_| gaussian(rng, space.field)).collect(),
        f: vec![ZERO; n * d],
    };
    for j in 0..n {
        st.project_row(j);
    }
    let annealed = matches!(cfg.objective, Objective::Correlation);
    let mut beta = if annealed { BETA_START } else { 1.0 };
    let mut scale = cfg.step_init;
    let mut cur = st.value(cfg.objective, beta);
    let mut best_val = st.true_value(cfg.objective);
    let mut best = (st.t.clone(), st.f.clone());
    let mut history = vec![best_val];
    let mut trace = Vec::new();
    let tol_cfg = ToleranceConfig::default();
    let mut converged = false;
    let mut iters = 0;

    while iters < cfg.max_iters {
        iters += 1;
        if annealed && beta < BETA_MAX {
            beta = (beta * 1.01).min(BETA_MAX);
            cur = st.value(cfg.objective, beta);
        }
        let j = rng.random_range(0..n);
        let r = st.row(j);
        let saved = (st.t[r.clone()].to_vec(), st.f[r.clone()].to_vec());
        let i = rng.random_range(0..d);
        match rng.random_range(0..4u8) {
            // perturb the whole vector
            0 => {
                for z in &mut st.t[r.clone()] {
                    *z += gaussian(rng, space.field) * scale;
                }
            }
            // perturb one coordinate
            1 => st.t[r.start + i] += gaussian(rng, space.field) * scale,
            // zero a coordinate (kept away from the all-zero vector below)
            2 => st.t[r.start + i] = ZERO,
            // move the free part of the functional
            _ => {
                if st.infinity {
                    let m = st.t[r.start + i].norm();
                    if m > 0.0 {
                        st.t[r.start + i] /= m;
                    }
                    st.f[r.start + i] += Complex64::new(scale * rng.random::<f64>(), 0.0);
                } else {
                    st.f[r.start + i] += gaussian(rng, space.field) * scale;
                    if rng.random::<f64>() < 0.5 {
                        st.f[r.start + i] = ZERO;
                    }
                }
            }
        }
        if st.t[r.clone()].iter().all(|z| *z == ZERO) {
            st.t[r.clone()].copy_from_slice(&saved.0);
            st.f[r.clone()].copy_from_slice(&saved.1);
            continue;
        }
        st.project_row(j);
        let val = st.value(cfg.objective, beta);
        if val < cur {
            cur = val;
            scale = (scale / cfg.step_decay).min(1.0);
        } else {
            st.t[r.clone()].copy_from_slice(&saved.0);
            st.f[r.clone()].copy_from_slice(&saved.1);
            scale = (scale * cfg.step_decay).max(1e-12);
        }
        let tv = st.true_value(cfg.objective);
        if tv < best_val {
            best_val = tv;
            best = (st.t.clone(), st.f.clone());
        }
        if cfg.record_trace {
            let pair = st.to_pair(space);
            let g = pair.gram();
            let hypothesis_ok = eigen(&g).map(|s| spectral_verdict(&s, &tol_cfg).holds()).unwrap_or(false);
            trace.push(TracePoint { restart, iter: iters, correlation: max_offdiag_abs(&g), hypothesis_ok });
        }
        history.push(best_val);
        let settled = !annealed || beta >= BETA_MAX;
        if settled && history.len() > STALL_WINDOW {
            let old = history[history.len() - 1 - STALL_WINDOW];
            if old - best_val < cfg.tol * best_val.abs().max(1.0) && scale < 1e-9 {
                converged = true;
                break;
            }
        }
    }
    st.t = best.0;
    st.f = best.1;
    Run { pair: st.to_pair(space), value: best_val, iters, converged, trace }
}
