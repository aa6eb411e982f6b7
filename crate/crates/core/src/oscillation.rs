//! Sign sets S±(T) of Z²(t) − σ on [0, T], the areas m{Π±(T)} between the
//! graph and the level, and the mean values η₁, η₂.
//!
//! Everything here is generic over the signal `g` (normally Z²) so analytic
//! signals can stand in for it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};
use crate::roots::{bisect, brent_with_values, Tolerance};
use crate::zeta::{oscillation_scale, HardyZ};

/// Crossing times are refined to this absolute accuracy.
pub const CROSSING_TOL: f64 = 1e-10;
/// A sampled or refined |g − σ| below this without a sign change is a
/// near-tangency.
pub const TANGENCY_FLOOR: f64 = 1e-9;
/// η values are withheld when a set's measure is below this fraction of T.
pub const DEGENERATE_MEASURE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    /// S⁺ takes the ties, as in g ≥ σ.
    pub fn of(h: f64) -> Self {
        if h >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedInterval {
    pub lo: f64,
    pub hi: f64,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignDecomposition {
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma_level: f64,
    pub crossings: Vec<f64>,
    pub intervals: Vec<SignedInterval>,
    pub near_tangency_count: usize,
    pub samples: usize,
    /// Largest sampled value of the signal.
    pub max_sample: f64,
}

/// Sampling steps for the crossing scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPolicy {
    /// Step used below `low_t`.
    pub floor_step: f64,
    pub low_t: f64,
    /// Step never exceeds this.
    pub max_step: f64,
    /// Samples per oscillation scale.
    pub per_scale: f64,
    pub max_samples: usize,
}

impl Default for ScanPolicy {
    fn default() -> Self {
        Self {
            floor_step: 0.05,
            low_t: 20.0,
            max_step: 0.1,
            per_scale: 8.0,
            max_samples: 50_000_000,
        }
    }
}

impl ScanPolicy {
    pub fn step(&self, t: f64) -> f64 {
        if t < self.low_t {
            return self.floor_step;
        }
        match oscillation_scale(t) {
            Ok(s) => (s / self.per_scale).min(self.max_step),
            Err(_) => self.floor_step,
        }
    }
}

fn sample_grid(t_end: f64, policy: &ScanPolicy) -> Result<Vec<f64>> {
    let mut grid = vec![0.0];
    let mut t = 0.0;
    while t < t_end {
        t = (t + policy.step(t)).min(t_end);
        grid.push(t);
        if grid.len() > policy.max_samples {
            return Err(Error::Budget(format!(
                "crossing scan needs more than {} samples to reach T = {t_end}",
                policy.max_samples
            )));
        }
    }
    Ok(grid)
}

fn refine_crossing<H: Fn(f64) -> f64>(h: &H, lo: f64, hi: f64, h_lo: f64, h_hi: f64) -> f64 {
    brent_with_values(h, lo, hi, h_lo, h_hi, Tolerance::absolute(CROSSING_TOL))
        .unwrap_or_else(|_| bisect(h, lo, hi, h_lo >= 0.0, CROSSING_TOL))
}

/// Extremum of `s·h` on `[a, b]` (minimum for s = +1) by golden section,
/// stopping early once `s·h` turns negative.
fn golden_extremum<H: Fn(f64) -> f64>(h: &H, s: f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = s * h(x1);
    let mut f2 = s * h(x2);
    while b - a > CROSSING_TOL && f1 >= 0.0 && f2 >= 0.0 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = s * h(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = s * h(x2);
        }
    }
    if f1 < f2 {
        (x1, s * f1)
    } else {
        (x2, s * f2)
    }
}

/// Vertex value of the parabola through three points.
fn parabola_vertex(t: [f64; 3], y: [f64; 3]) -> f64 {
    let d1 = (y[1] - y[0]) / (t[1] - t[0]);
    let d2 = (y[2] - y[1]) / (t[2] - t[1]);
    let a = (d2 - d1) / (t[2] - t[0]);
    if a == 0.0 {
        return y[1];
    }
    let b = d1 - a * (t[0] + t[1]);
    let c = y[0] - a * t[0] * t[0] - b * t[0];
    let tv = (-b / (2.0 * a)).clamp(t[0], t[2]);
    (a * tv + b) * tv + c
}

/// Split `[0, t_end]` into maximal intervals where `g − level` keeps its sign.
pub fn decompose_with<G>(
    g: &G,
    t_end: f64,
    level: f64,
    policy: &ScanPolicy,
) -> Result<SignDecomposition>
where
    G: Fn(f64) -> f64 + Sync,
{
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!(
            "decomposition needs T > 0, got {t_end}"
        )));
    }
    if !level.is_finite() {
        return Err(Error::Domain(format!("level must be finite, got {level}")));
    }
    let h = |t: f64| g(t) - level;
    let grid = sample_grid(t_end, policy)?;
    let hv: Vec<f64> = grid.par_iter().map(|&t| h(t)).collect();
    let max_sample = hv.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + level;

    let n = grid.len();
    let mut crossings = Vec::new();
    let mut near_tangency_count = 0;
    for i in 0..n - 1 {
        let (c0, c1) = (Sign::of(hv[i]), Sign::of(hv[i + 1]));
        if c0 != c1 {
            crossings.push(refine_crossing(&h, grid[i], grid[i + 1], hv[i], hv[i + 1]));
            continue;
        }
        if i == 0 || Sign::of(hv[i - 1]) != c0 {
            continue;
        }
        // hidden pair between samples i-1 and i+1: an extremum toward the level
        let s = c0.factor();
        let (a, m, b) = (s * hv[i - 1], s * hv[i], s * hv[i + 1]);
        if !(m < a && m <= b) {
            continue;
        }
        if m < TANGENCY_FLOOR {
            near_tangency_count += 1;
            continue;
        }
        let t3 = [grid[i - 1], grid[i], grid[i + 1]];
        if parabola_vertex(t3, [a, m, b]) >= m {
            continue;
        }
        let (tx, hx) = golden_extremum(&h, s, t3[0], t3[2]);
        if Sign::of(hx) == c0 {
            if hx.abs() < TANGENCY_FLOOR {
                near_tangency_count += 1;
            }
            continue;
        }
        let first = refine_crossing(&h, t3[0], tx, hv[i - 1], hx);
        let second = refine_crossing(&h, tx, t3[2], hx, hv[i + 1]);
        crossings.push(first);
        crossings.push(second);
    }
    crossings.sort_by(f64::total_cmp);
    crossings.retain(|&c| c > 0.0 && c < t_end);
    // a repeated crossing is a touch: drop both copies so signs still alternate
    let mut k = 1;
    while k < crossings.len() {
        if crossings[k] == crossings[k - 1] {
            crossings.drain(k - 1..=k);
        } else {
            k += 1;
        }
    }

    let mut bounds = Vec::with_capacity(crossings.len() + 2);
    bounds.push(0.0);
    bounds.extend_from_slice(&crossings);
    bounds.push(t_end);
    let first_mid = 0.5 * (bounds[0] + bounds[1]);
    let mut sign = Sign::of(h(first_mid));
    let mut intervals = Vec::with_capacity(bounds.len() - 1);
    for w in bounds.windows(2) {
        intervals.push(SignedInterval {
            lo: w[0],
            hi: w[1],
            sign,
        });
        sign = sign.flip();
    }
    Ok(SignDecomposition {
        t: t_end,
        sigma_level: level,
        crossings,
        intervals,
        near_tangency_count,
        samples: n,
        max_sample,
    })
}

/// S±(T) for Z² at level σ.
pub fn decompose_sign_sets(
    z: &HardyZ,
    t_end: f64,
    level: f64,
    policy: &ScanPolicy,
) -> Result<SignDecomposition> {
    if !(t_end >= 10.0) {
        return Err(Error::Domain(format!(
            "decomposition needs T >= 10, got {t_end}"
        )));
    }
    if !(level > 0.0) {
        return Err(Error::Domain(format!(
            "level must be positive, got {level}"
        )));
    }
    z.check_range(0.0, t_end)?;
    decompose_with(&|t| z.value(t).powi(2), t_end, level, policy)
}

/// Integrals of g − σ and g² − σ² over S⁺ and of their negatives over S⁻.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Areas {
    pub m_plus: f64,
    pub m_minus: f64,
    /// ∫_{S⁺} (g² − σ²)
    pub fourth_plus: f64,
    /// ∫_{S⁻} (σ² − g²)
    pub fourth_minus: f64,
    pub measure_plus: f64,
    pub measure_minus: f64,
    /// ∫₀^T g and ∫₀^T g² assembled from the intervals.
    pub g_total: f64,
    pub g2_total: f64,
    pub est_error: f64,
    pub est_error_fourth: f64,
    /// Amount by which a negative area total was raised to 0.
    pub clamped_plus: f64,
    pub clamped_minus: f64,
}

/// Areas by integrating [g, g²] over every interval with the panel rule.
pub fn areas_with<G>(g: &G, dec: &SignDecomposition, cfg: &QuadConfig) -> Result<Areas>
where
    G: Fn(f64) -> f64 + Sync,
{
    let f = |t: f64| {
        let v = g(t);
        [v, v * v]
    };
    let parts: Vec<Result<quad::Integral<2>>> = dec
        .intervals
        .par_iter()
        .map(|iv| quad::integrate_serial(&f, iv.lo, iv.hi, cfg))
        .collect();
    let s = dec.sigma_level;
    let mut out = Areas {
        m_plus: 0.0,
        m_minus: 0.0,
        fourth_plus: 0.0,
        fourth_minus: 0.0,
        measure_plus: 0.0,
        measure_minus: 0.0,
        g_total: 0.0,
        g2_total: 0.0,
        est_error: 0.0,
        est_error_fourth: 0.0,
        clamped_plus: 0.0,
        clamped_minus: 0.0,
    };
    for (iv, part) in dec.intervals.iter().zip(parts) {
        let part = part?;
        let len = iv.hi - iv.lo;
        let above = part.value[0] - s * len;
        let above4 = part.value[1] - s * s * len;
        match iv.sign {
            Sign::Plus => {
                out.m_plus += above;
                out.fourth_plus += above4;
                out.measure_plus += len;
            }
            Sign::Minus => {
                out.m_minus -= above;
                out.fourth_minus -= above4;
                out.measure_minus += len;
            }
        }
        out.g_total += part.value[0];
        out.g2_total += part.value[1];
        out.est_error += part.est_error[0];
        out.est_error_fourth += part.est_error[1];
    }
    if out.m_plus < 0.0 {
        out.clamped_plus = -out.m_plus;
        out.m_plus = 0.0;
    }
    if out.m_minus < 0.0 {
        out.clamped_minus = -out.m_minus;
        out.m_minus = 0.0;
    }
    Ok(out)
}

pub fn areas(z: &HardyZ, dec: &SignDecomposition, cfg: &QuadConfig) -> Result<Areas> {
    z.check_range(0.0, dec.t)?;
    areas_with(&|t| z.value(t).powi(2), dec, cfg)
}

/// η₁ = ∫_{S⁺}(g² − σ²)/m⁺ and η₂ = ∫_{S⁻}(σ² − g²)/m⁻.
pub fn eta_values(dec: &SignDecomposition, a: &Areas) -> Result<(f64, f64)> {
    let floor = DEGENERATE_MEASURE * dec.t;
    if a.measure_plus < floor || a.m_plus <= 0.0 {
        return Err(Error::Degenerate(format!(
            "S+ has measure {} and area {}",
            a.measure_plus, a.m_plus
        )));
    }
    if a.measure_minus < floor || a.m_minus <= 0.0 {
        return Err(Error::Degenerate(format!(
            "S- has measure {} and area {}",
            a.measure_minus, a.m_minus
        )));
    }
    Ok((a.fourth_plus / a.m_plus, a.fourth_minus / a.m_minus))
}

/// Solve m⁺ − m⁻ = diff, η₁m⁺ − η₂m⁻ = rhs (rhs = I₄ − Tσ²).
pub fn reconstruct_areas_via_eta(diff: f64, eta1: f64, eta2: f64, rhs: f64) -> Result<(f64, f64)> {
    let gap = eta1 - eta2;
    if !(gap.abs() > 1e-12 * eta1.abs().max(eta2.abs()).max(1.0)) {
        return Err(Error::Singular { gap: gap.abs() });
    }
    let m_plus = (rhs - eta2 * diff) / gap;
    Ok((m_plus, m_plus - diff))
}

/// I₄(T) / ((1/2π²) T ln⁴ T).
pub fn fourth_moment_ratio(i4: f64, t: f64) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::Domain(format!(
            "fourth moment ratio needs T > 1, got {t}"
        )));
    }
    Ok(i4 / (t * t.ln().powi(4) / (2.0 * PI * PI)))
}

/// m±/T^{1−ε} for ε ∈ {0.1, 0.01, 0} and m±/T^{1−1/ln ln T}.
pub fn conditional_diagnostics(t: f64, m_plus: f64, m_minus: f64) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let exps = [
        ("eps_0.1", 0.9),
        ("eps_0.01", 0.99),
        ("eps_0", 1.0),
        ("rh_A1", 1.0 - 1.0 / t.ln().ln()),
    ];
    for (name, e) in exps {
        out.insert(format!("m_plus/{name}"), m_plus / t.powf(e));
        out.insert(format!("m_minus/{name}"), m_minus / t.powf(e));
    }
    out
}
