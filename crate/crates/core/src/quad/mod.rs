//! Panel quadrature locked to the oscillation scale of Z.
//!
//! `[0, ∞)` is cut into unit blocks, and each block into equal panels no wider
//! than `fraction · oscillation_scale(block end)` (and never wider than
//! `cap`). Because the scale decreases in `t`, every panel satisfies the width
//! rule at its own right edge. The grid is global: a segment `[a, b]` uses the
//! grid panels it overlaps, clipped to `[a, b]`, so results never depend on how
//! a range was split between calls beyond the clipped end panels.
//!
//! Each panel is integrated with 15-point Gauss–Legendre; the error estimate is
//! the difference against the two half-panel rules, and panels are bisected
//! until `error ≤ rel_tol · ∫|f|` holds locally.

mod checkpoint;

pub use checkpoint::{config_fingerprint, CheckpointFile, SweepCheckpoint};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::zeta::{oscillation_scale, HardyZ};

const GL_ORDER: usize = 15;
const BLOCK: f64 = 1.0;
/// Panels handed to the thread pool at once.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelPolicy {
    /// Upper bound on any panel width.
    pub cap: f64,
    /// Panel width as a fraction of the oscillation scale.
    pub fraction: f64,
}

impl Default for PanelPolicy {
    fn default() -> Self {
        Self {
            cap: 0.5,
            fraction: 0.25,
        }
    }
}

impl PanelPolicy {
    fn width_limit(&self, right: f64) -> f64 {
        match oscillation_scale(right) {
            Ok(s) => (self.fraction * s).min(self.cap),
            Err(_) => self.cap,
        }
    }

    fn panels_in_block(&self, k: u64) -> u64 {
        let right = (k + 1) as f64 * BLOCK;
        (BLOCK / self.width_limit(right)).ceil() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    /// Maximum bisection depth inside one panel.
    pub max_depth: u32,
    pub policy: PanelPolicy,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_depth: 12,
            policy: PanelPolicy::default(),
        }
    }
}

impl QuadConfig {
    /// Defaults for exponentially weighted integrals.
    pub fn weighted() -> Self {
        Self {
            rel_tol: 1e-6,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!(
                "rel_tol must be in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if !(self.policy.cap > 0.0 && self.policy.fraction > 0.0) {
            return Err(Error::Config("panel policy must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub est_error: f64,
    pub panels: usize,
    pub evals: usize,
}

/// Componentwise result of integrating a vector-valued integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const K: usize> {
    pub value: [f64; K],
    pub est_error: [f64; K],
    pub panels: usize,
    pub evals: usize,
}

impl<const K: usize> Integral<K> {
    fn zero() -> Self {
        Self {
            value: [0.0; K],
            est_error: [0.0; K],
            panels: 0,
            evals: 0,
        }
    }

    fn push(&mut self, p: &PanelSum<K>) {
        for k in 0..K {
            self.value[k] += p.value[k];
            self.est_error[k] += p.err[k];
        }
        self.panels += 1;
        self.evals += p.evals;
    }

    pub fn component(&self, k: usize) -> QuadResult {
        QuadResult {
            value: self.value[k],
            est_error: self.est_error[k],
            panels: self.panels,
            evals: self.evals,
        }
    }
}

struct GaussRule {
    nodes: [f64; GL_ORDER],
    weights: [f64; GL_ORDER],
}

/// Gauss–Legendre nodes on [-1, 1] by Newton iteration on P_n.
fn gauss_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussRule { nodes, weights }
    })
}

struct PanelSum<const K: usize> {
    value: [f64; K],
    err: [f64; K],
    evals: usize,
}

fn gauss<const K: usize, F>(f: &F, a: f64, b: f64) -> ([f64; K], [f64; K])
where
    F: Fn(f64) -> [f64; K],
{
    let rule = gauss_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut val = [0.0; K];
    let mut abs = [0.0; K];
    for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let y = f(mid + half * x);
        for k in 0..K {
            val[k] += w * y[k];
            abs[k] += w * y[k].abs();
        }
    }
    for k in 0..K {
        val[k] *= half;
        abs[k] *= half.abs();
    }
    (val, abs)
}

/// `budget[k]` is the absolute error this subinterval may always spend: its
/// width share of `rel_tol · ∫|f|` over the enclosing grid panel. It keeps
/// near-zero stretches of the integrand from demanding pure relative accuracy.
fn refine<const K: usize, F>(
    f: &F,
    a: f64,
    b: f64,
    whole: [f64; K],
    budget: [f64; K],
    depth: u32,
    cfg: &QuadConfig,
) -> Result<PanelSum<K>>
where
    F: Fn(f64) -> [f64; K],
{
    let m = 0.5 * (a + b);
    let (left, left_abs) = gauss(f, a, m);
    let (right, right_abs) = gauss(f, m, b);
    let mut value = [0.0; K];
    let mut err = [0.0; K];
    let mut ok = true;
    for k in 0..K {
        value[k] = left[k] + right[k];
        err[k] = (whole[k] - value[k]).abs();
        ok &= err[k] <= (cfg.rel_tol * (left_abs[k] + right_abs[k])).max(budget[k]);
    }
    if ok {
        return Ok(PanelSum {
            value,
            err,
            evals: 2 * GL_ORDER,
        });
    }
    if depth >= cfg.max_depth {
        let worst = err.iter().cloned().fold(0.0, f64::max);
        return Err(Error::Tolerance {
            lo: a,
            hi: b,
            err: worst,
        });
    }
    let half = budget.map(|x| 0.5 * x);
    let l = refine(f, a, m, left, half, depth + 1, cfg)?;
    let r = refine(f, m, b, right, half, depth + 1, cfg)?;
    for k in 0..K {
        value[k] = l.value[k] + r.value[k];
        err[k] = l.err[k] + r.err[k];
    }
    Ok(PanelSum {
        value,
        err,
        evals: 2 * GL_ORDER + l.evals + r.evals,
    })
}

fn panel<const K: usize, F>(f: &F, a: f64, b: f64, cfg: &QuadConfig) -> Result<PanelSum<K>>
where
    F: Fn(f64) -> [f64; K],
{
    if a == b {
        return Ok(PanelSum {
            value: [0.0; K],
            err: [0.0; K],
            evals: GL_ORDER,
        });
    }
    let (whole, abs) = gauss(f, a, b);
    let budget = abs.map(|x| cfg.rel_tol * x);
    let mut p = refine(f, a, b, whole, budget, 0, cfg)?;
    p.evals += GL_ORDER;
    Ok(p)
}

/// The grid panels overlapping `[a, b]`, clipped to it, in ascending order.
pub fn panels(a: f64, b: f64, policy: &PanelPolicy) -> impl Iterator<Item = (f64, f64)> + '_ {
    let degenerate = a == b;
    let first_block = (a / BLOCK).floor() as u64;
    let last_block = if degenerate {
        first_block
    } else {
        ((b / BLOCK).ceil() as u64).max(1) - 1
    };
    (first_block..=last_block)
        .flat_map(move |k| {
            let m = policy.panels_in_block(k);
            let base = k as f64 * BLOCK;
            let width = BLOCK / m as f64;
            let j0 = if a > base {
                (((a - base) / width).floor() as u64).min(m - 1)
            } else {
                0
            };
            (j0..m).map_while(move |j| {
                let lo = base + j as f64 * width;
                let hi = if j + 1 == m {
                    base + BLOCK
                } else {
                    base + (j + 1) as f64 * width
                };
                if degenerate {
                    return if j == j0 { Some((a, a)) } else { None };
                }
                if lo >= b {
                    return None;
                }
                Some((lo.max(a), hi.min(b)))
            })
        })
        .filter(move |(lo, hi)| degenerate || hi > lo)
}

/// Integrate a vector-valued integrand over `[a, b]`, evaluating panels on
/// the thread pool and summing them in ascending order.
pub fn integrate<const K: usize, F>(f: &F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Integral<K>>
where
    F: Fn(f64) -> [f64; K] + Sync,
{
    check_segment(a, b)?;
    let mut total = Integral::zero();
    let mut iter = panels(a, b, &cfg.policy).peekable();
    let mut chunk = Vec::with_capacity(CHUNK);
    while iter.peek().is_some() {
        chunk.clear();
        chunk.extend(iter.by_ref().take(CHUNK));
        let sums: Vec<Result<PanelSum<K>>> = chunk
            .par_iter()
            .map(|&(lo, hi)| panel(f, lo, hi, cfg))
            .collect();
        for s in sums {
            total.push(&s?);
        }
    }
    Ok(total)
}

/// Same as [`integrate`] on the calling thread only.
pub fn integrate_serial<const K: usize, F>(
    f: &F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<Integral<K>>
where
    F: Fn(f64) -> [f64; K],
{
    check_segment(a, b)?;
    let mut total = Integral::zero();
    for (lo, hi) in panels(a, b, &cfg.policy) {
        total.push(&panel(f, lo, hi, cfg)?);
    }
    Ok(total)
}

fn check_segment(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b >= a && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration segment [{a}, {b}] is invalid"
        )));
    }
    Ok(())
}

/// Advance the prefix integrals ∫₀ g and ∫₀ g² of a non-negative signal `g`
/// (normally g = Z²) from the checkpoint frontier to `t_end`.
pub fn advance_prefix_with<F>(
    g: &F,
    cfg: &QuadConfig,
    ckpt: &mut SweepCheckpoint,
    t_end: f64,
) -> Result<[QuadResult; 2]>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(t_end >= ckpt.frontier) {
        return Err(Error::Domain(format!(
            "upper limit {t_end} is below the checkpoint frontier {}",
            ckpt.frontier
        )));
    }
    let f = |t: f64| {
        let v = g(t);
        [v, v * v]
    };
    let step = integrate(&f, ckpt.frontier, t_end, cfg)?;
    ckpt.frontier = t_end;
    ckpt.i2 += step.value[0];
    ckpt.i4 += step.value[1];
    ckpt.est_error_i2 += step.est_error[0];
    ckpt.est_error_i4 += step.est_error[1];
    let mk = |value, est_error| QuadResult {
        value,
        est_error,
        panels: step.panels,
        evals: step.evals,
    };
    Ok([
        mk(ckpt.i2, ckpt.est_error_i2),
        mk(ckpt.i4, ckpt.est_error_i4),
    ])
}

/// Advance ∫₀ Z² and ∫₀ Z⁴ to `t_end`; the checkpoint must carry the
/// fingerprint of `(z.config(), cfg)`.
pub fn advance_prefix(
    z: &HardyZ,
    cfg: &QuadConfig,
    ckpt: &mut SweepCheckpoint,
    t_end: f64,
) -> Result<[QuadResult; 2]> {
    let expected = config_fingerprint(z.config(), cfg);
    if ckpt.cfg_hash != expected {
        return Err(Error::CheckpointMismatch {
            expected,
            found: ckpt.cfg_hash.clone(),
        });
    }
    z.check_range(ckpt.frontier, t_end)?;
    let g = |t: f64| {
        let v = z.value(t);
        v * v
    };
    advance_prefix_with(&g, cfg, ckpt, t_end)
}

/// I₂(T) = ∫₀^T Z²; the checkpoint is advanced to `t_end`.
pub fn z2_prefix(
    z: &HardyZ,
    cfg: &QuadConfig,
    ckpt: &mut SweepCheckpoint,
    t_end: f64,
) -> Result<QuadResult> {
    advance_prefix(z, cfg, ckpt, t_end).map(|[i2, _]| i2)
}

/// I₄(T) = ∫₀^T Z⁴; the checkpoint is advanced to `t_end`.
pub fn z4_prefix(
    z: &HardyZ,
    cfg: &QuadConfig,
    ckpt: &mut SweepCheckpoint,
    t_end: f64,
) -> Result<QuadResult> {
    advance_prefix(z, cfg, ckpt, t_end).map(|[_, i4]| i4)
}

/// Prefix integrals from 0 without an external checkpoint.
pub fn prefix_moments(z: &HardyZ, cfg: &QuadConfig, t_end: f64) -> Result<[QuadResult; 2]> {
    let mut ckpt = SweepCheckpoint::new(config_fingerprint(z.config(), cfg), cfg.policy);
    advance_prefix(z, cfg, &mut ckpt, t_end)
}

/// Multiple of 1/δ beyond which the weighted tail is negligible.
pub const TAIL_MULTIPLE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedResult {
    pub quad: QuadResult,
    /// Estimated ∫_upper^∞ Z² e^{-2δt} dt, already included in `quad.est_error`.
    pub tail_estimate: f64,
    /// Set when `upper < 20/δ`.
    pub truncation_warning: bool,
}

/// ∫₀^upper Z²(t) e^{−2δt} dt.
pub fn weighted_z2(z: &HardyZ, cfg: &QuadConfig, upper: f64, delta: f64) -> Result<WeightedResult> {
    if !(upper > 0.0) || !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "need upper > 0 and delta > 0, got {upper}, {delta}"
        )));
    }
    z.check_range(0.0, upper)?;
    let g = |t: f64| {
        let v = z.value(t);
        v * v
    };
    weighted_with(&g, cfg, upper, delta)
}

pub fn weighted_with<F>(g: &F, cfg: &QuadConfig, upper: f64, delta: f64) -> Result<WeightedResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let f = |t: f64| [g(t) * (-2.0 * delta * t).exp()];
    let out = integrate(&f, 0.0, upper, cfg)?;
    // mean of Z² near t is ≈ ln(t/2π) + 2γ; bound it by ln(t) + 2
    let level = upper.max(std::f64::consts::E).ln() + 2.0;
    let tail = (-2.0 * delta * upper).exp() * level / (2.0 * delta);
    let mut quad = out.component(0);
    quad.est_error += tail;
    Ok(WeightedResult {
        quad,
        tail_estimate: tail,
        truncation_warning: upper < TAIL_MULTIPLE / delta,
    })
}

const MOMENTS: usize = 8;

/// Per-panel moments ∫ g(t)(t − c)^k dt about each grid panel's midpoint c,
/// so that ∫ g(t) e^{−2δt} dt can be re-evaluated for any δ ≤ 1/2 from a
/// Taylor series instead of fresh evaluations of g.
pub struct MomentTable {
    panels: Vec<(f64, f64, [f64; MOMENTS])>,
    upper: f64,
}

impl MomentTable {
    pub fn build<F>(g: &F, cfg: &QuadConfig, upper: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        check_segment(0.0, upper)?;
        let grid: Vec<(f64, f64)> = panels(0.0, upper, &cfg.policy).collect();
        let panels = grid
            .par_iter()
            .map(|&(lo, hi)| {
                let c = 0.5 * (lo + hi);
                let f = |t: f64| {
                    let mut out = [0.0; MOMENTS];
                    let (u, mut p) = (t - c, g(t));
                    for m in out.iter_mut() {
                        *m = p;
                        p *= u;
                    }
                    out
                };
                panel(&f, lo, hi, cfg).map(|s| (lo, hi, s.value))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { panels, upper })
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// ∫₀^min(cutoff, upper) g(t) e^{−2δt} dt. The panel cut by `cutoff` is
    /// handed to `partial(lo, cutoff)`.
    pub fn weighted<P>(&self, delta: f64, cutoff: f64, mut partial: P) -> Result<f64>
    where
        P: FnMut(f64, f64) -> Result<f64>,
    {
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(Error::Domain(format!(
                "moment table needs 0 < delta <= 0.5, got {delta}"
            )));
        }
        let s = -2.0 * delta;
        let mut total = 0.0;
        for &(lo, hi, ref m) in &self.panels {
            if lo >= cutoff {
                break;
            }
            if hi > cutoff {
                total += partial(lo, cutoff)?;
                break;
            }
            let c = 0.5 * (lo + hi);
            let mut term = 1.0;
            let mut acc = 0.0;
            for (k, mk) in m.iter().enumerate() {
                acc += term * mk;
                term *= s / (k + 1) as f64;
            }
            total += (s * c).exp() * acc;
        }
        Ok(total)
    }
}
