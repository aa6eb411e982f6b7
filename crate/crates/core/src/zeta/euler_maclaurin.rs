//! ζ(1/2 + it) by Euler–Maclaurin summation.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

use super::riemann_siegel::{tables, TABLE_LEN};

const MAX_CORRECTIONS: usize = 60;

/// b_k = B_2k / (2k)! = (−1)^{k+1} 2 ζ(2k) / (2π)^{2k}, k = 1..=MAX_CORRECTIONS+1.
fn bernoulli_ratios() -> &'static [f64] {
    static B: OnceLock<Vec<f64>> = OnceLock::new();
    B.get_or_init(|| {
        let two_pi = 2.0 * PI;
        (1..=MAX_CORRECTIONS + 1)
            .map(|k| {
                let zeta = even_zeta(2 * k as i32);
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * zeta / two_pi.powi(2 * k as i32)
            })
            .collect()
    })
}

fn even_zeta(s: i32) -> f64 {
    match s {
        2 => PI * PI / 6.0,
        4 => PI.powi(4) / 90.0,
        6 => PI.powi(6) / 945.0,
        _ => {
            // direct sum plus midpoint tail ∫_{1000.5}^∞ x^{-s} dx
            let head: f64 = (1..=1000).rev().map(|n| (n as f64).powi(-s)).sum();
            head + 1000.5f64.powi(1 - s) / f64::from(s - 1)
        }
    }
}

fn n_pow_minus_s(n: usize, t: f64) -> Complex64 {
    let (ln, inv_sqrt) = if n <= TABLE_LEN {
        let tab = tables();
        (tab.ln[n], tab.inv_sqrt[n])
    } else {
        let x = n as f64;
        (x.ln(), 1.0 / x.sqrt())
    };
    let phase = t * ln;
    Complex64::new(inv_sqrt * phase.cos(), -inv_sqrt * phase.sin())
}

/// Returns ζ(1/2 + it) and an estimate of the absolute truncation error.
///
/// `direct_terms` is a lower bound on the number of summed terms; it is raised
/// to ⌈t/π⌉ so the correction series converges geometrically.
pub(crate) fn zeta_half_line(t: f64, direct_terms: usize, target: f64) -> (Complex64, f64) {
    let s = Complex64::new(0.5, t);
    let n = direct_terms.max((t / PI).ceil() as usize).max(2);

    let mut sum = Complex64::new(0.0, 0.0);
    for k in (1..n).rev() {
        sum += n_pow_minus_s(k, t);
    }

    let nf = n as f64;
    let n_s = n_pow_minus_s(n, t);
    sum += n_s * nf / (s - 1.0) + 0.5 * n_s;

    let b = bernoulli_ratios();
    let inv_n2 = 1.0 / (nf * nf);
    let mut factor = s / nf;
    let mut err = f64::INFINITY;
    for k in 1..=MAX_CORRECTIONS {
        sum += b[k - 1] * factor * n_s;
        let kf = k as f64;
        factor = factor * (s + 2.0 * kf - 1.0) * (s + 2.0 * kf) * inv_n2;
        let next = (b[k] * factor * n_s).norm();
        err = next * (s + 2.0 * kf + 1.0).norm() / (0.5 + 2.0 * kf + 1.0);
        if err < 1e-3 * target {
            break;
        }
    }
    let rounding = 4.0 * f64::EPSILON * (nf.sqrt() * 2.0 + 1.0);
    (sum, err + rounding)
}
