//! Hardy's function Z(t) = e^{iϑ(t)} ζ(1/2 + it) and the Riemann–Siegel theta.
//!
//! Two evaluation routes are available:
//!
//! * the Riemann–Siegel main sum with up to five correction terms C₀…C₄,
//!   used for large `t`;
//! * Euler–Maclaurin summation of ζ(1/2 + it), always used below
//!   [`EvalConfig::em_threshold`] and as a fallback wherever the
//!   Riemann–Siegel error bound at the configured order misses
//!   [`EvalConfig::target_abs_error`] and `t` is small enough for
//!   Euler–Maclaurin to stay cheap.
//!
//! Everything here is a pure function of `(t, cfg)`.

mod euler_maclaurin;
mod riemann_siegel;
#[rustfmt::skip]
mod rs_tables;
mod theta;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::roots::{self, Tolerance};

/// Largest ordinate accepted by the evaluator.
pub const MAX_T: f64 = 1.0e8;

/// Upper end of the range where Euler–Maclaurin may replace Riemann–Siegel
/// when the latter cannot meet the accuracy target.
pub const EM_FALLBACK_LIMIT: f64 = 1000.0;

/// Largest accepted |Im(e^{iϑ}ζ)| on the Euler–Maclaurin route.
const MAX_IMAG_RESIDUE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Number of Riemann–Siegel correction terms beyond C₀ (0..=4).
    pub rs_correction_order: usize,
    /// Below this ordinate Euler–Maclaurin replaces Riemann–Siegel.
    pub em_threshold: f64,
    /// Minimum number of directly summed terms on the Euler–Maclaurin route.
    pub em_terms: usize,
    /// Absolute error goal for one Z(t) evaluation.
    pub target_abs_error: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            rs_correction_order: 2,
            em_threshold: 30.0,
            em_terms: 50,
            target_abs_error: 1e-6,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rs_correction_order > 4 {
            return Err(Error::Config(format!(
                "rs_correction_order must be in 0..=4, got {}",
                self.rs_correction_order
            )));
        }
        if !(self.em_threshold >= 10.0 && self.em_threshold <= EM_FALLBACK_LIMIT) {
            return Err(Error::Config(format!(
                "em_threshold must be in [10, {EM_FALLBACK_LIMIT}], got {}",
                self.em_threshold
            )));
        }
        if self.em_terms < 10 {
            return Err(Error::Config(format!(
                "em_terms must be >= 10, got {}",
                self.em_terms
            )));
        }
        if !(self.target_abs_error > 0.0 && self.target_abs_error.is_finite()) {
            return Err(Error::Config(format!(
                "target_abs_error must be positive, got {}",
                self.target_abs_error
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RiemannSiegel,
    EulerMaclaurin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZEval {
    pub t: f64,
    pub z: f64,
    pub theta: f64,
    pub est_error: f64,
    pub method: Method,
}

fn check_ordinate(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("ordinate must be >= 0, got {t}")));
    }
    if t > MAX_T {
        return Err(Error::Domain(format!(
            "ordinate {t} exceeds supported range {MAX_T:e}"
        )));
    }
    Ok(())
}

/// ϑ(t) = −(t/2) ln π + Im ln Γ(1/4 + it/2).
pub fn theta(t: f64, cfg: &EvalConfig) -> Result<f64> {
    check_ordinate(t)?;
    Ok(theta_unchecked(t, cfg.em_threshold))
}

fn theta_unchecked(t: f64, em_threshold: f64) -> f64 {
    if t >= em_threshold {
        theta::theta_asymptotic(t)
    } else {
        theta::theta_lngamma(t)
    }
}

/// Mean spacing 2π / ln(t/2π) of consecutive sign changes of Z near `t`.
pub fn oscillation_scale(t: f64) -> Result<f64> {
    if !(t > 2.0 * PI * E) {
        return Err(Error::Domain(format!(
            "oscillation scale needs t > 2πe, got {t}"
        )));
    }
    Ok(2.0 * PI / (t / (2.0 * PI)).ln())
}

/// The unique t > 7 with ϑ(t) = nπ.
pub fn gram_point(n: i64, cfg: &EvalConfig) -> Result<f64> {
    if n < -1 {
        return Err(Error::Domain(format!(
            "gram point index must be >= -1, got {n}"
        )));
    }
    let target = n as f64 * PI;
    let f = |t: f64| theta_unchecked(t, cfg.em_threshold) - target;

    // ϑ is increasing on [7, ∞); grow the upper end until it passes nπ.
    let lo = 7.0;
    let mut hi = 2.0 * PI * E + 2.0 * (target.max(1.0)) + 10.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > MAX_T {
            return Err(Error::NotBracketed {
                lo,
                hi,
                f_lo: f(lo),
                f_hi: f(hi),
            });
        }
    }
    roots::brent(f, lo, hi, Tolerance::relative(1e-13))
}

/// Evaluate Z(t) with an error estimate.
pub fn hardy_z(t: f64, cfg: &EvalConfig) -> Result<ZEval> {
    HardyZ::new(*cfg)?.eval(t)
}

/// A validated evaluator for Z(t).
///
/// [`HardyZ::eval`] is the checked path. [`HardyZ::value`] skips the per-call
/// checks and is meant for inner loops whose range has been cleared once by
/// [`HardyZ::check_range`].
#[derive(Debug, Clone, Copy)]
pub struct HardyZ {
    cfg: EvalConfig,
    /// Smallest t with an RS truncation bound within target.
    rs_from: f64,
}

impl HardyZ {
    pub fn new(cfg: EvalConfig) -> Result<Self> {
        cfg.validate()?;
        let order = cfg.rs_correction_order;
        let bound = |t: f64| riemann_siegel::remainder_bound(t, order);
        // bound(t) = c·t^{-e}; invert, then settle on the exact floating-point edge
        let e = (2.0 * order.min(4) as f64 + 3.0) / 4.0;
        let mut rs_from = (bound(1.0) / cfg.target_abs_error).powf(1.0 / e);
        while bound(rs_from) > cfg.target_abs_error {
            rs_from = rs_from.next_up();
        }
        while bound(rs_from.next_down()) <= cfg.target_abs_error {
            rs_from = rs_from.next_down();
        }
        Ok(Self { cfg, rs_from })
    }

    pub fn config(&self) -> &EvalConfig {
        &self.cfg
    }

    fn rs_bound(&self, t: f64) -> f64 {
        riemann_siegel::remainder_bound(t, self.cfg.rs_correction_order)
    }

    /// Truncation bound plus the floating-point floor of the phases t·ln n.
    fn rs_error(&self, t: f64) -> f64 {
        let n = (t / (2.0 * PI)).sqrt().max(1.0);
        self.rs_bound(t) + 2.0 * n.sqrt() * t * n.ln().max(1.0) * f64::EPSILON
    }

    fn select(&self, t: f64) -> Result<Method> {
        if t < self.cfg.em_threshold {
            return Ok(Method::EulerMaclaurin);
        }
        if t >= self.rs_from {
            Ok(Method::RiemannSiegel)
        } else if t <= EM_FALLBACK_LIMIT {
            Ok(Method::EulerMaclaurin)
        } else {
            Err(Error::Accuracy {
                t,
                bound: self.rs_bound(t),
                target: self.cfg.target_abs_error,
            })
        }
    }

    /// Verify that every ordinate in `[lo, hi]` can be evaluated to target.
    pub fn check_range(&self, lo: f64, hi: f64) -> Result<()> {
        check_ordinate(lo)?;
        check_ordinate(hi)?;
        // The RS bound decreases in t, so the first RS-only ordinate is the worst.
        let worst = lo
            .max(self.cfg.em_threshold)
            .max(EM_FALLBACK_LIMIT.next_up());
        if worst <= hi {
            self.select(worst)?;
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<ZEval> {
        check_ordinate(t)?;
        let method = self.select(t)?;
        let theta = theta_unchecked(t, self.cfg.em_threshold);
        match method {
            Method::RiemannSiegel => {
                let z = riemann_siegel::hardy_z_rs(t, theta, self.cfg.rs_correction_order);
                Ok(ZEval {
                    t,
                    z,
                    theta,
                    est_error: self.rs_error(t),
                    method,
                })
            }
            Method::EulerMaclaurin => {
                let (zeta, err) = euler_maclaurin::zeta_half_line(
                    t,
                    self.cfg.em_terms,
                    self.cfg.target_abs_error,
                );
                let rotated = Complex64::from_polar(1.0, theta) * zeta;
                if rotated.im.abs() >= MAX_IMAG_RESIDUE {
                    return Err(Error::Accuracy {
                        t,
                        bound: rotated.im.abs(),
                        target: MAX_IMAG_RESIDUE,
                    });
                }
                Ok(ZEval {
                    t,
                    z: rotated.re,
                    theta,
                    est_error: err,
                    method,
                })
            }
        }
    }

    /// Unchecked Z(t) for inner loops; see [`HardyZ::check_range`].
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let theta = theta_unchecked(t, self.cfg.em_threshold);
        match self.select(t) {
            Ok(Method::EulerMaclaurin) => {
                let (zeta, _) = euler_maclaurin::zeta_half_line(
                    t,
                    self.cfg.em_terms,
                    self.cfg.target_abs_error,
                );
                (Complex64::from_polar(1.0, theta) * zeta).re
            }
            _ => riemann_siegel::hardy_z_rs(t, theta, self.cfg.rs_correction_order),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    #[test]
    fn theta_at_zero_vanishes() {
        assert_eq!(theta(0.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn theta_rejects_negative() {
        assert!(matches!(theta(-1.0, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(hardy_z(-0.5, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_100_matches_truncated_stirling() {
        let t: f64 = 100.0;
        let short = 0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0 + 1.0 / (48.0 * t);
        assert!((theta(t, &cfg()).unwrap() - short).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg();
        c.rs_correction_order = 5;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.em_threshold = 5.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.em_terms = 3;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.target_abs_error = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn method_follows_threshold() {
        let z = HardyZ::new(cfg()).unwrap();
        assert_eq!(z.eval(29.9).unwrap().method, Method::EulerMaclaurin);
        assert_eq!(z.eval(5000.0).unwrap().method, Method::RiemannSiegel);
    }

    #[test]
    fn accuracy_error_is_reported() {
        let c = EvalConfig {
            rs_correction_order: 0,
            target_abs_error: 1e-6,
            ..cfg()
        };
        let z = HardyZ::new(c).unwrap();
        // C₀ alone cannot reach 1e-6 until t ≈ 6.6e6
        assert!(matches!(z.eval(5000.0), Err(Error::Accuracy { .. })));
        assert!(matches!(
            z.check_range(0.0, 1e4),
            Err(Error::Accuracy { .. })
        ));
        assert!(z.check_range(0.0, 900.0).is_ok());
    }

    #[test]
    fn oscillation_scale_values() {
        let s = oscillation_scale(2.0 * PI * E * E).unwrap();
        assert!((s - PI).abs() < 1e-14);
        let s = oscillation_scale(1e4).unwrap();
        // 2π / ln(1591.549…) = 0.8522504…
        assert!((s - 0.852_250_47).abs() < 1e-8);
        let a = oscillation_scale(1e3).unwrap();
        let b = oscillation_scale(1e4).unwrap();
        let c = oscillation_scale(1e5).unwrap();
        assert!(a > b && b > c);
        assert!(oscillation_scale(2.0 * PI * E).is_err());
    }

    #[test]
    fn gram_round_trip() {
        for n in [0i64, 10, 1000] {
            let g = gram_point(n, &cfg()).unwrap();
            let th = theta(g, &cfg()).unwrap();
            let target = n as f64 * PI;
            assert!(
                (th - target).abs() <= 1e-8 * target.abs().max(1.0),
                "n = {n}"
            );
        }
        assert!(gram_point(-2, &cfg()).is_err());
    }

    #[test]
    fn z_squared_finite_and_nonnegative() {
        let z = HardyZ::new(cfg()).unwrap();
        for i in 0..200 {
            let t = i as f64 * 37.3;
            let v = z.eval(t).unwrap().z;
            assert!(v.is_finite() && v * v >= 0.0);
        }
    }
}
