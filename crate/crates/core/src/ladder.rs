//! Jacob's ladder φ(T) from the almost exact Hardy–Littlewood formula, the
//! mean levels σ(T) and σ₁(T), the weighted integral equation and the TKA
//! leading term.

use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::quad::{self, MomentTable, QuadConfig};
use crate::roots::{brent, Tolerance};
use crate::zeta::HardyZ;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const PHI_REL_TOL: f64 = 1e-12;

/// F(φ) = (φ/2) ln(φ/2) + (c − ln 2π)(φ/2) + c₀.
pub fn hl_main_term(phi: f64, c0: f64) -> Result<f64> {
    if !(phi >= 2.0) || !phi.is_finite() {
        return Err(Error::Domain(format!(
            "hl_main_term needs phi >= 2, got {phi}"
        )));
    }
    let h = 0.5 * phi;
    Ok(h * h.ln() + (EULER_GAMMA - (2.0 * PI).ln()) * h + c0)
}

/// σ₁(T) = ln T + 2c − 1 − ln 2π.
pub fn sigma_balasubramanian(t: f64) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::Domain(format!(
            "sigma_balasubramanian needs T > 1, got {t}"
        )));
    }
    Ok(t.ln() + 2.0 * EULER_GAMMA - 1.0 - (2.0 * PI).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    #[serde(rename = "T")]
    pub t: f64,
    pub i2: f64,
    pub phi: f64,
    pub sigma: f64,
    pub sigma1: f64,
    pub c0_used: f64,
    pub solve_residual: f64,
}

/// Invert F(φ) = I₂(T) on the increasing branch φ > 2e.
pub fn solve_phi(t: f64, i2: f64, c0: f64) -> Result<LadderPoint> {
    let lo = 2.0 * E;
    let floor = hl_main_term(lo * 1.01, c0)?;
    if !(i2 > floor) {
        return Err(Error::Domain(format!(
            "I2 = {i2} is below F(2e·1.01) = {floor}; T is below the working range (use T >= 10)"
        )));
    }
    let f = |phi: f64| hl_main_term(phi, c0).map(|v| v - i2).unwrap_or(f64::NAN);
    let mut hi = (4.0 * t + 100.0).max(lo * 2.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NotBracketed {
                lo,
                hi,
                f_lo: f(lo),
                f_hi: f64::INFINITY,
            });
        }
    }
    let phi = brent(f, lo, hi, Tolerance::relative(PHI_REL_TOL))?;
    let fphi = hl_main_term(phi, c0)?;
    let solve_residual = (fphi - i2).abs();
    if solve_residual > 1e-9 * i2.abs().max(1.0) {
        return Err(Error::NoConvergence {
            iterations: crate::roots::MAX_ITERATIONS,
            lo: phi,
            hi: phi,
        });
    }
    let mut pt = LadderPoint {
        t,
        i2,
        phi,
        sigma: 0.0,
        sigma1: if t > 1.0 {
            sigma_balasubramanian(t)?
        } else {
            f64::NAN
        },
        c0_used: c0,
        solve_residual,
    };
    pt.sigma = sigma_moser(&pt, t);
    Ok(pt)
}

/// σ(T) = F(φ(T))/T.
pub fn sigma_moser(pt: &LadderPoint, t: f64) -> f64 {
    let h = 0.5 * pt.phi;
    (h * h.ln() + (EULER_GAMMA - (2.0 * PI).ln()) * h + pt.c0_used) / t
}

/// Default cutoff scale μ(x) = 7 x ln x.
pub fn default_mu(x: f64) -> f64 {
    7.0 * x * x.ln()
}

/// Multiple of x beyond which e^{−2t/x} makes the integrand negligible
/// (e^{−20} relative to the leading term).
pub const EQUATION_TAIL_MULTIPLE: f64 = 10.0;

/// ∫₀^{μ} Z² e^{−2t/x} dt − I₂(T) for many (x, μ) at one T, from a moment
/// table built once up to `x_max · EQUATION_TAIL_MULTIPLE`.
pub struct IntegralEquation {
    z: HardyZ,
    cfg: QuadConfig,
    table: MomentTable,
    i2: f64,
    x_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderParameter {
    #[serde(rename = "T")]
    pub t: f64,
    pub x: f64,
    pub mu: f64,
    pub phi: f64,
    pub x_over_phi: f64,
    pub mu_over_phi: f64,
    pub residual: f64,
}

impl IntegralEquation {
    pub fn new(z: &HardyZ, cfg: &QuadConfig, i2: f64, x_max: f64) -> Result<Self> {
        let upper = x_max * EQUATION_TAIL_MULTIPLE;
        z.check_range(0.0, upper)?;
        let g = |t: f64| {
            let v = z.value(t);
            v * v
        };
        let table = MomentTable::build(&g, cfg, upper)?;
        Ok(Self {
            z: *z,
            cfg: *cfg,
            table,
            i2,
            x_max,
        })
    }

    /// Residual of the integral equation for scale `x` and cutoff `mu`.
    pub fn residual(&self, x: f64, mu: f64) -> Result<f64> {
        if !(x > 0.0 && mu >= 0.0) {
            return Err(Error::Domain(format!(
                "need x > 0 and mu >= 0, got {x}, {mu}"
            )));
        }
        if x > self.x_max * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "x = {x} exceeds the table limit {}",
                self.x_max
            )));
        }
        let delta = 1.0 / x;
        let z = self.z;
        let g = |t: f64| {
            let v = z.value(t);
            v * v * (-2.0 * delta * t).exp()
        };
        let lhs = self.table.weighted(delta, mu, |lo, hi| {
            quad::integrate_serial(&|t| [g(t)], lo, hi, &self.cfg).map(|r| r.value[0])
        })?;
        Ok(lhs - self.i2)
    }

    /// Solve residual(x, μ(x)) = 0 for x on `[lo, hi]`.
    pub fn solve<M: Fn(f64) -> f64>(
        &self,
        t: f64,
        phi: f64,
        lo: f64,
        hi: f64,
        mu: M,
    ) -> Result<LadderParameter> {
        let f = |x: f64| self.residual(x, mu(x)).unwrap_or(f64::NAN);
        let x = brent(f, lo, hi, Tolerance::relative(1e-10))?;
        let m = mu(x);
        Ok(LadderParameter {
            t,
            x,
            mu: m,
            phi,
            x_over_phi: x / phi,
            mu_over_phi: m / phi,
            residual: self.residual(x, m)?,
        })
    }
}

/// Solve the integral equation with μ(x) = 7x ln x around the ladder value φ.
pub fn solve_ladder_parameter(
    z: &HardyZ,
    cfg: &QuadConfig,
    pt: &LadderPoint,
) -> Result<LadderParameter> {
    let (lo, hi) = (0.7 * pt.phi, 1.4 * pt.phi);
    let eq = IntegralEquation::new(z, cfg, pt.i2, hi)?;
    eq.solve(pt.t, pt.phi, lo, hi, default_mu)
}

/// One-shot residual ∫₀^{μ} Z² e^{−2t/x} dt − I₂(T), with the weighted
/// integral truncated at min(μ, 20x).
pub fn integral_equation_residual(
    z: &HardyZ,
    cfg: &QuadConfig,
    i2: f64,
    x: f64,
    mu: f64,
) -> Result<f64> {
    if !(x > 0.0 && mu >= 0.0) {
        return Err(Error::Domain(format!(
            "need x > 0 and mu >= 0, got {x}, {mu}"
        )));
    }
    if mu == 0.0 {
        return Ok(-i2);
    }
    let upper = mu.min(quad::TAIL_MULTIPLE * x);
    Ok(quad::weighted_z2(z, cfg, upper, 1.0 / x)?.quad.value - i2)
}

pub const DEFAULT_TKA_DELTAS: [f64; 4] = [0.04, 0.03, 0.02, 0.01];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TkaReport {
    pub delta: f64,
    pub upper: f64,
    pub lhs: f64,
    pub lhs_error: f64,
    pub rhs_main: f64,
    pub diff: f64,
    pub c0_estimate: f64,
    pub truncation_warning: bool,
}

/// (c − ln 4πδ) / (2 sin δ).
pub fn tka_rhs_main(delta: f64) -> f64 {
    (EULER_GAMMA - (4.0 * PI * delta).ln()) / (2.0 * delta.sin())
}

/// Value at δ = 0 of the line through (δ₁, d₁) and (δ₂, d₂).
pub fn extrapolate_c0(d1: f64, diff1: f64, d2: f64, diff2: f64) -> f64 {
    diff1 + (diff2 - diff1) * (0.0 - d1) / (d2 - d1)
}

/// The TKA comparison at each δ, truncated at 20/δ. `c0_estimate` on every row
/// is the extrapolation from the two smallest δ.
pub fn tka_check(z: &HardyZ, cfg: &QuadConfig, deltas: &[f64]) -> Result<Vec<TkaReport>> {
    if deltas.is_empty() {
        return Err(Error::Domain("empty delta list".into()));
    }
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(Error::Domain(format!(
                "delta must be in (0, 0.5], got {delta}"
            )));
        }
        let upper = quad::TAIL_MULTIPLE / delta;
        if z.check_range(0.0, upper).is_err() {
            return Err(Error::Budget(format!(
                "delta = {delta} needs Z up to t = {upper}"
            )));
        }
        let w = quad::weighted_z2(z, cfg, upper, delta)?;
        let rhs_main = tka_rhs_main(delta);
        out.push(TkaReport {
            delta,
            upper,
            lhs: w.quad.value,
            lhs_error: w.quad.est_error,
            rhs_main,
            diff: w.quad.value - rhs_main,
            c0_estimate: f64::NAN,
            truncation_warning: w.truncation_warning,
        });
    }
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by(|&a, &b| out[a].delta.total_cmp(&out[b].delta));
    if order.len() >= 2 {
        let (a, b) = (&out[order[0]], &out[order[1]]);
        let c0 = extrapolate_c0(a.delta, a.diff, b.delta, b.diff);
        for r in &mut out {
            r.c0_estimate = c0;
        }
    }
    Ok(out)
}

/// c₀ from the two smallest and from the two largest δ of a report set
/// (disjoint pairs when at least four distinct δ are present).
pub fn c0_pair_estimates(reports: &[TkaReport]) -> Option<(f64, f64)> {
    if reports.len() < 4 {
        return None;
    }
    let mut rs: Vec<&TkaReport> = reports.iter().collect();
    rs.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let n = rs.len();
    let small = extrapolate_c0(rs[0].delta, rs[0].diff, rs[1].delta, rs[1].diff);
    let large = extrapolate_c0(
        rs[n - 2].delta,
        rs[n - 2].diff,
        rs[n - 1].delta,
        rs[n - 1].diff,
    );
    Some((small, large))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn main_term_values() {
        let v = hl_main_term(2.0 * E, 0.0).unwrap();
        assert!((v - E * (1.0 + EULER_GAMMA - (2.0 * PI).ln())).abs() < 1e-14);
        assert!((v + 0.708_551_151_1).abs() < 1e-9);
        let b = hl_main_term(2.0, 5.0).unwrap();
        assert!((b - (5.0 + EULER_GAMMA - (2.0 * PI).ln())).abs() < 1e-15);
        assert!(hl_main_term(1.999, 0.0).is_err());
        assert!(hl_main_term(20.0, 0.0).unwrap() > hl_main_term(19.0, 0.0).unwrap());
    }

    #[test]
    fn balasubramanian_level() {
        let root = 2.0 * PI * (1.0 - 2.0 * EULER_GAMMA).exp();
        assert!(sigma_balasubramanian(root).unwrap().abs() < 1e-14);
        assert!((sigma_balasubramanian(1e4).unwrap() - 7.526_894_635_4).abs() < 1e-9);
        let t = 123.0;
        let shift = sigma_balasubramanian(E * t).unwrap() - sigma_balasubramanian(t).unwrap();
        assert!((shift - 1.0).abs() < 1e-13);
        assert!(sigma_balasubramanian(1.0).is_err());
    }

    #[test]
    fn solve_phi_round_trip_and_identity() {
        for &phi in &[100.0, 1e4, 1e6] {
            let i2 = hl_main_term(phi, 0.3).unwrap();
            let pt = solve_phi(50.0, i2, 0.3).unwrap();
            assert!((pt.phi / phi - 1.0).abs() < 1e-9, "{phi}");
            assert!(pt.solve_residual <= 1e-9 * i2.max(1.0));
            let f = hl_main_term(pt.phi, 0.3).unwrap();
            assert!((pt.sigma * 50.0 - f).abs() <= 1e-13 * f.abs());
        }
    }

    #[test]
    fn solve_phi_rejects_small_i2() {
        assert!(matches!(solve_phi(5.0, -1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn tka_main_term_arithmetic() {
        assert!((tka_rhs_main(0.01) - 132.6).abs() < 0.05);
        // −ln(δ/δ')/(2δ) dominates the difference for small δ
        let (d, d2) = (1e-4, 2e-4);
        let diff = tka_rhs_main(d) - tka_rhs_main(d2);
        let scale = tka_rhs_main(d) * (1.0 - d / d2) + (d2 / d).ln() / (2.0 * d2);
        assert!(((diff - scale) / diff).abs() < 1e-3);
    }

    #[test]
    fn extrapolation_of_a_line() {
        assert!((extrapolate_c0(0.01, 1.1, 0.02, 1.2) - 1.0).abs() < 1e-12);
    }
}
