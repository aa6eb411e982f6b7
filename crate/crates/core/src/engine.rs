//! One configured evaluator tying Z, the prefix integrals, the ladder and
//! the area report together.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ladder::{self, LadderPoint, TkaReport};
use crate::oscillation::{self, ScanPolicy};
use crate::quad::{self, config_fingerprint, QuadConfig, QuadResult, SweepCheckpoint};
use crate::zeta::{EvalConfig, HardyZ};

/// Which level σ the sign sets are taken against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AreaMode {
    /// σ(T) from the ladder.
    Moser,
    /// σ₁(T) = ln T + 2c − 1 − ln 2π.
    Balasubramanian,
    Level(f64),
}

impl fmt::Display for AreaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AreaMode::Moser => write!(f, "moser"),
            AreaMode::Balasubramanian => write!(f, "balasubramanian"),
            AreaMode::Level(s) => write!(f, "level={s}"),
        }
    }
}

impl FromStr for AreaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moser" => Ok(AreaMode::Moser),
            "balasubramanian" | "bala" => Ok(AreaMode::Balasubramanian),
            _ => {
                let v = s
                    .strip_prefix("level=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| v.is_finite() && *v > 0.0)
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "mode must be moser, balasubramanian or level=<positive value>, got {s:?}"
                        ))
                    })?;
                Ok(AreaMode::Level(v))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// (m⁺ − m⁻) − (I₂ − Tσ)
    pub identity_i: f64,
    pub identity_i_rel: f64,
    /// (η₁m⁺ − η₂m⁻) − (I₄ − Tσ²)
    pub identity_ii: f64,
    pub identity_ii_rel: f64,
    /// Largest relative gap between reconstructed and direct areas.
    pub reconstruction_rel: Option<f64>,
    /// |F(φ) − I₂| in moser mode.
    pub solve: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub mode: String,
    pub sigma_level: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub diff: f64,
    pub abs_sum: f64,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub eta_gap_over_ln3t: Option<f64>,
    pub m_plus_hat: Option<f64>,
    pub m_minus_hat: Option<f64>,
    pub i2: f64,
    pub i4: f64,
    pub est_error_i2: f64,
    pub est_error_i4: f64,
    pub area_est_error: f64,
    pub measure_plus: f64,
    pub measure_minus: f64,
    pub clamped_plus: f64,
    pub clamped_minus: f64,
    pub crossing_count: usize,
    pub interval_count: usize,
    pub near_tangency_count: usize,
    pub max_z2: f64,
    pub fourth_moment_ratio: f64,
    pub ladder: Option<LadderPoint>,
    pub identity_residuals: IdentityResiduals,
    pub diagnostics: BTreeMap<String, f64>,
}

impl AreaReport {
    /// Names of the identities whose relative residual exceeds `tol`.
    pub fn failed_identities(&self, tol: f64) -> Vec<&'static str> {
        let r = &self.identity_residuals;
        let mut out = Vec::new();
        if !(r.identity_i_rel <= tol) {
            out.push("identity_i");
        }
        if !(r.identity_ii_rel <= tol) {
            out.push("identity_ii");
        }
        if let Some(rec) = r.reconstruction_rel {
            if !(rec <= tol.max(1e-6)) {
                out.push("reconstruction");
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Engine {
    pub z: HardyZ,
    pub prefix: QuadConfig,
    pub weighted: QuadConfig,
    pub scan: ScanPolicy,
    pub c0: f64,
}

impl Engine {
    pub fn new(eval: EvalConfig, prefix: QuadConfig) -> Result<Self> {
        prefix.validate()?;
        Ok(Self {
            z: HardyZ::new(eval)?,
            prefix,
            weighted: QuadConfig {
                rel_tol: QuadConfig::weighted().rel_tol.max(prefix.rel_tol),
                ..prefix
            },
            scan: ScanPolicy::default(),
            c0: 0.0,
        })
    }

    pub fn fingerprint(&self) -> String {
        config_fingerprint(self.z.config(), &self.prefix)
    }

    pub fn fresh_checkpoint(&self) -> SweepCheckpoint {
        SweepCheckpoint::for_config(self.z.config(), &self.prefix)
    }

    /// [I₂(T), I₄(T)] from 0.
    pub fn moments(&self, t: f64) -> Result<[QuadResult; 2]> {
        quad::prefix_moments(&self.z, &self.prefix, t)
    }

    pub fn ladder(&self, t: f64) -> Result<LadderPoint> {
        let [i2, _] = self.moments(t)?;
        ladder::solve_phi(t, i2.value, self.c0)
    }

    pub fn tka(&self, deltas: &[f64]) -> Result<Vec<TkaReport>> {
        ladder::tka_check(&self.z, &self.weighted, deltas)
    }

    pub fn area_report(&self, t: f64, mode: AreaMode) -> Result<AreaReport> {
        let prefix = self.moments(t)?;
        self.area_report_with(t, mode, prefix)
    }

    /// Report at `t` given precomputed prefix integrals [I₂(t), I₄(t)].
    pub fn area_report_with(
        &self,
        t: f64,
        mode: AreaMode,
        prefix: [QuadResult; 2],
    ) -> Result<AreaReport> {
        let [i2, i4] = prefix;
        let (sigma, ladder) = match mode {
            AreaMode::Moser => {
                let pt = ladder::solve_phi(t, i2.value, self.c0)?;
                (pt.sigma, Some(pt))
            }
            AreaMode::Balasubramanian => (ladder::sigma_balasubramanian(t)?, None),
            AreaMode::Level(s) => (s, None),
        };
        let dec = oscillation::decompose_sign_sets(&self.z, t, sigma, &self.scan)?;
        let a = oscillation::areas(&self.z, &dec, &self.prefix)?;

        let diff = a.m_plus - a.m_minus;
        let rhs4 = i4.value - t * sigma * sigma;
        let identity_i = diff - (i2.value - t * sigma);
        let identity_ii = a.fourth_plus - a.fourth_minus - rhs4;
        let etas = oscillation::eta_values(&dec, &a).ok();
        let mut hat = None;
        let mut reconstruction_rel = None;
        if let Some((e1, e2)) = etas {
            if let Ok((p, m)) = oscillation::reconstruct_areas_via_eta(diff, e1, e2, rhs4) {
                hat = Some((p, m));
                if (e1 - e2).abs() > 0.1 {
                    let rel =
                        ((p - a.m_plus).abs() / a.m_plus).max((m - a.m_minus).abs() / a.m_minus);
                    reconstruction_rel = Some(rel);
                }
            }
        }
        let ln3 = t.ln().powi(3);
        Ok(AreaReport {
            t,
            mode: mode.to_string(),
            sigma_level: sigma,
            m_plus: a.m_plus,
            m_minus: a.m_minus,
            diff,
            abs_sum: a.m_plus + a.m_minus,
            eta1: etas.map(|e| e.0),
            eta2: etas.map(|e| e.1),
            eta_gap_over_ln3t: etas.map(|(e1, e2)| (e1 - e2) / ln3),
            m_plus_hat: hat.map(|h| h.0),
            m_minus_hat: hat.map(|h| h.1),
            i2: i2.value,
            i4: i4.value,
            est_error_i2: i2.est_error,
            est_error_i4: i4.est_error,
            area_est_error: a.est_error,
            measure_plus: a.measure_plus,
            measure_minus: a.measure_minus,
            clamped_plus: a.clamped_plus,
            clamped_minus: a.clamped_minus,
            crossing_count: dec.crossings.len(),
            interval_count: dec.intervals.len(),
            near_tangency_count: dec.near_tangency_count,
            max_z2: dec.max_sample,
            fourth_moment_ratio: oscillation::fourth_moment_ratio(i4.value, t)?,
            ladder,
            identity_residuals: IdentityResiduals {
                identity_i,
                identity_i_rel: identity_i.abs() / i2.value,
                identity_ii,
                identity_ii_rel: identity_ii.abs() / i4.value,
                reconstruction_rel,
                solve: ladder.map(|p| p.solve_residual),
            },
            diagnostics: oscillation::conditional_diagnostics(t, a.m_plus, a.m_minus),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!("moser".parse::<AreaMode>().unwrap(), AreaMode::Moser);
        assert_eq!(
            "balasubramanian".parse::<AreaMode>().unwrap(),
            AreaMode::Balasubramanian
        );
        assert_eq!(
            "level=3.0".parse::<AreaMode>().unwrap(),
            AreaMode::Level(3.0)
        );
        for bad in ["level=", "level=-1", "level=x", "other"] {
            assert!(bad.parse::<AreaMode>().is_err(), "{bad}");
        }
        assert_eq!(AreaMode::Level(2.5).to_string(), "level=2.5");
    }
}
